"""Hash-chained block ledger with a deterministic state machine and
quorum-replicated nodes."""

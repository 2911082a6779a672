"""Privacy-preserving vaccination passes.

The package is organised around the lifecycle of an anonymous credential:

- :mod:`vaxpass.crypto` -- hidden-order group arithmetic, commitments and
  sigma-protocol proofs that everything else is built from.
- :mod:`vaxpass.anoncreds` -- credential schemas, blind issuance of
  multi-attribute signatures, and zero-knowledge presentations.
- :mod:`vaxpass.revocation` -- an RSA-accumulator revocation registry with
  holder-updatable membership witnesses.
- :mod:`vaxpass.ledger` -- a simulated hash-chained identity ledger with
  quorum replication, used as the public root of trust.
- :mod:`vaxpass.agent` -- DID-based peer identities, encrypted message
  envelopes and the issue/present protocol state machines.
- :mod:`vaxpass.services` -- issuer and verifier HTTP services, the wallet,
  and the demo wiring that ties a full deployment together.
"""

__version__ = "0.1.0"

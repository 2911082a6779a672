"""Hidden-order group cryptography: arithmetic, commitments, sigma proofs."""

"""Anonymous credentials: schemas, blind issuance, ZK presentations."""

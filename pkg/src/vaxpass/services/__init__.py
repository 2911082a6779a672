"""Role-facing deployables: issuer service, verifier service, holder wallet."""

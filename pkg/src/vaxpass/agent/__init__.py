"""Peer identities, encrypted envelopes, and exchange protocols."""

"""Shared builders for ledger tests: identities, genesis configs, and
signed transactions with per-author sequence counters."""

import itertools

from vaxpass.agent.dids import AgentIdentity
from vaxpass.ledger.chain import make_tx
from vaxpass.ledger.node import Network

_seq = itertools.count(1)


def ident(tag: str) -> AgentIdentity:
    seed = tag.encode().ljust(32, b"\x00")[:32]
    return AgentIdentity.from_seed(seed)


def genesis_config(authority: AgentIdentity, trusted=(), n_nodes: int = 4) -> dict:
    return {
        "authority_did": authority.did,
        "authority_verkey": authority.verification_key.hex(),
        "trusted": list(trusted),
        "n_nodes": n_nodes,
        "node_endpoints": [f"inproc://node{i}" for i in range(n_nodes)],
    }


def new_network(n_nodes: int = 4, store_dir=None, trusted=()):
    authority = ident("authority")
    net = Network(genesis_config(authority, trusted, n_nodes), n_nodes, store_dir)
    return net, authority


def signed_tx(kind: str, payload: dict, author: AgentIdentity) -> dict:
    return make_tx(kind, payload, author.did, next(_seq), author.sign)


def register_did(net: Network, who: AgentIdentity, endpoint: str = "inproc://x") -> dict:
    return net.submit(signed_tx("DID_DOC", who.document(endpoint), who))


def set_trust_list(net: Network, authority: AgentIdentity, dids) -> dict:
    return net.submit(signed_tx("TRUST_LIST", {"trusted": list(dids)}, authority))

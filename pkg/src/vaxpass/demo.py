"""One-process demonstration stack: ledger, issuer, verifier, wallet.

``build_stack`` wires everything over the in-process transport, exactly as
the end-to-end tests run it. ``create_demo_app`` additionally exposes the
whole stack over HTTP on one port (issuer, verifier, ledger node, wallet
bridge under path prefixes) for the browser UI.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .agent.dids import AgentIdentity
from .agent.transport import HttpTransport, InProcTransport
from .crypto.arith import make_rng
from .errors import UnknownConnection
from .crypto.params import SystemParams, setup_params
from .ledger.chain import make_tx
from .ledger.client import InProcLedgerClient
from .ledger.node import Network
from .services.issuer import IssuerService
from .services.trust import TrustConfig
from .services.verifier import VerifierService
from .services.wallet import Wallet, new_wallet_state


class Authority:
    """The trust-list editor. Signs TRUST_LIST updates with the genesis key."""

    def __init__(self, identity: AgentIdentity, ledger):
        self.identity = identity
        self.ledger = ledger
        self.trusted: set[str] = set()
        self._seq = itertools.count(1)  # seq 0 was the genesis trust list

    def grant(self, *dids: str) -> dict:
        self.trusted.update(dids)
        tx = make_tx(
            "TRUST_LIST",
            {"trusted": sorted(self.trusted)},
            self.identity.did,
            next(self._seq),
            sign=self.identity.sign,
        )
        return self.ledger.submit(tx)

    def revoke_trust(self, did: str) -> dict:
        self.trusted.discard(did)
        tx = make_tx(
            "TRUST_LIST",
            {"trusted": sorted(self.trusted)},
            self.identity.did,
            next(self._seq),
            sign=self.identity.sign,
        )
        return self.ledger.submit(tx)


class StackTransport:
    """In-process delivery with HTTP fallback. A stack served over uvicorn
    registers its agents under public URLs, so invitations work for external
    wallets while in-stack traffic never leaves the process."""

    def __init__(self):
        self._local: dict[str, object] = {}
        self._http: HttpTransport | None = None

    def register(self, endpoint: str, handler) -> None:
        self._local[endpoint] = handler

    def deliver(self, endpoint: str, payload: dict) -> list[dict]:
        handler = self._local.get(endpoint)
        if handler is not None:
            return handler(payload) or []
        if endpoint.startswith(("http://", "https://")):
            if self._http is None:
                self._http = HttpTransport()
            return self._http.deliver(endpoint, payload)
        raise UnknownConnection(f"no agent listening on {endpoint!r}")


@dataclass
class Stack:
    params: SystemParams
    transport: InProcTransport | StackTransport
    network: Network
    ledger: InProcLedgerClient
    authority: Authority
    issuer: IssuerService
    verifier: VerifierService
    wallet: Wallet


def build_stack(
    profile: str = "test",
    seed: bytes | None = None,
    n_nodes: int = 4,
    freshness_seconds: int = 300,
    registry_capacity: int = 1024,
    base_url: str | None = None,
) -> Stack:
    params = setup_params(profile, seed)
    rng = make_rng(None if seed is None else seed + b"/issuer")
    transport = StackTransport() if base_url else InProcTransport()
    issuer_endpoint = f"{base_url}/issuer/inbox" if base_url else "inproc://issuer"
    verifier_endpoint = f"{base_url}/verifier/inbox" if base_url else "inproc://verifier"

    authority_identity = AgentIdentity.generate()
    genesis_config = {
        "authority_did": authority_identity.did,
        "authority_verkey": authority_identity.verification_key.hex(),
        "trusted": [],
        "node_endpoints": [f"inproc://node{i}" for i in range(n_nodes)],
        "params": params.to_dict(),
    }
    network = Network(genesis_config, n_nodes=n_nodes)
    ledger = InProcLedgerClient(network)
    authority = Authority(authority_identity, ledger)

    issuer = IssuerService(
        params,
        AgentIdentity.generate(),
        ledger,
        transport,
        issuer_endpoint,
        registry_capacity=registry_capacity,
    )
    issuer.register_identity()
    authority.grant(issuer.identity.did)
    issuer.publish_definitions(rng)

    def fresh_trust() -> TrustConfig:
        return TrustConfig(
            node_endpoints=list(genesis_config["node_endpoints"]),
            genesis_hash=network.genesis_hash,
            freshness_seconds=freshness_seconds,
        )

    verifier = VerifierService(
        params, AgentIdentity.generate(), ledger, transport, verifier_endpoint, fresh_trust()
    )
    wallet = Wallet(
        new_wallet_state(params.to_dict(), trust=fresh_trust()),
        transport,
        ledger,
        endpoint="inproc://wallet",
    )
    return Stack(params, transport, network, ledger, authority, issuer, verifier, wallet)


def create_demo_app(stack: Stack):
    from fastapi import FastAPI
    from fastapi.middleware.cors import CORSMiddleware

    from .ledger.httpapi import create_ledger_app
    from .services.bridge import create_bridge_app
    from .services.issuer import create_issuer_app
    from .services.verifier import create_verifier_app

    app = FastAPI(title="vaxpass demo stack", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.mount("/ledger", create_ledger_app(stack.network))
    app.mount("/issuer", create_issuer_app(stack.issuer))
    app.mount("/verifier", create_verifier_app(stack.verifier))
    app.mount("/wallet", create_bridge_app(stack.wallet))

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "issuer_did": stack.issuer.identity.did,
            "verifier_did": stack.verifier.identity.did,
            "wallet_did": stack.wallet.identity.did,
            "ledger_height": stack.network.tip()["height"],
        }

    return app


DEMO_RECORD = {
    "full_name": "Alice Prover",
    "birth_date": "1990-04-02",
    "pathogen": "SARS-CoV-2",
    "laboratory": "LabX",
    "dose": 2,
    "vaccination_date": "2021-06-01",
    "location": "Lisbon",
}


def run_demo(profile: str = "test", echo=print) -> None:
    """Scripted happy path plus the two refusal flows, narrated."""
    echo(f"building stack (profile={profile})...")
    stack = build_stack(profile)
    echo(f"ledger height {stack.network.tip()['height']}, "
         f"issuer {stack.issuer.identity.did} trusted")

    issued = stack.issuer.create_issuance(DEMO_RECORD)
    echo(f"issuance {issued['issuance_id']} created; wallet scans the QR")
    stack.wallet.connect(issued["invitation"])
    offer = stack.wallet.pending_items()[0]
    echo(f"wallet holds offer {offer['id']} with claims {offer['claims']['dose']} dose(s)")
    outcome = stack.wallet.respond(offer["id"], "accept")
    echo(f"offer accepted -> {outcome['state']}; wallet now has "
         f"{len(stack.wallet.list_credentials())} credential(s)")

    req = stack.verifier.create_request(
        {"revealed": ["pathogen"], "predicates": [{"attr": "dose", "op": "ge", "bound": 1}]}
    )
    stack.wallet.connect(req["invitation"])
    item = stack.wallet.pending_items()[0]
    stack.wallet.respond(item["id"], "accept")
    status = stack.verifier.request_status(req["request_id"])
    echo(f"dose >= 1 -> {status['status']}, revealed {status.get('revealed')}")

    req3 = stack.verifier.create_request(
        {"predicates": [{"attr": "dose", "op": "ge", "bound": 3}]}
    )
    stack.wallet.connect(req3["invitation"])
    item3 = stack.wallet.pending_items()[0]
    out3 = stack.wallet.respond(item3["id"], "accept")
    status3 = stack.verifier.request_status(req3["request_id"])
    echo(f"dose >= 3 -> {status3['status']} ({status3.get('reason')}); "
         f"wallet said {out3.get('code')}")

    serial = stack.wallet.list_credentials()[0]["serial"]
    stack.issuer.revoke(serial=serial)
    synced = stack.wallet.sync_revocation()
    echo(f"after revocation, wallet sync reports revoked={synced[0]['revoked']}")

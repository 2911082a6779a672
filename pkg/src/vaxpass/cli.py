"""Command-line entry point: the holder wallet, plus a demo stack runner.

The wallet commands follow a load -> act -> save cycle over the encrypted
store; nothing touches disk unencrypted. Mutating commands hold the store's
file lock only while reading and writing, so a stray second invocation
cannot corrupt the file.
"""

from __future__ import annotations

import functools
import json
import os

import click

from .agent.connections import decode_qr
from .agent.transport import HttpTransport
from .errors import BadPayload, VaxPassError
from .ledger.client import HttpLedgerClient
from .services.config import load_config
from .services.trust import TrustConfig
from .services.wallet import Wallet, load_wallet, new_wallet_state, save_wallet

_CONFIG_DEFAULTS = {"store": "wallet.vaxw", "ledger": ""}


def _cli_errors(fn):
    """Turn domain errors into clean one-line failures instead of tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VaxPassError as exc:
            raise click.ClickException(f"{exc.code}: {exc.detail or exc}") from exc

    return wrapper


def _settings(config_path: str | None) -> dict:
    return load_config(config_path, _CONFIG_DEFAULTS)


def _resolve(option_value: str | None, settings: dict, key: str) -> str:
    return option_value if option_value else settings.get(key, "")


store_option = click.option(
    "--store",
    envvar="VAXPASS_WALLET",
    default=None,
    help="Path to the wallet store file.",
)
passphrase_option = click.option(
    "--passphrase",
    envvar="VAXPASS_PASSPHRASE",
    prompt="Wallet passphrase",
    hide_input=True,
    help="Wallet passphrase (prompted if not given).",
)
config_option = click.option(
    "--config",
    "config_path",
    envvar="VAXPASS_CONFIG",
    default=None,
    help="Config file (canonical JSON) with store/ledger defaults.",
)


@click.group()
def main():
    """Privacy-preserving vaccination pass tools."""


# ------------------------------------------------------------------- wallet


@main.group()
def wallet():
    """Holder wallet: credentials, connections, consent."""


def _open_wallet(store: str, passphrase: str) -> Wallet:
    state = load_wallet(store, passphrase)
    trust = TrustConfig.from_dict(state["trust"]) if state.get("trust") else None
    ledger = HttpLedgerClient(trust.node_endpoints[0]) if trust and trust.node_endpoints else None
    return Wallet(state, HttpTransport(), ledger=ledger, endpoint="urn:vaxpass:return-route")


@wallet.command("init")
@store_option
@config_option
@click.option("--ledger", default=None, help="Ledger node base URL to pin and trust.")
@click.option("--freshness", default=300, show_default=True, help="Trust cache lifetime, seconds.")
@click.option(
    "--passphrase",
    envvar="VAXPASS_PASSPHRASE",
    prompt="New wallet passphrase",
    hide_input=True,
    confirmation_prompt=True,
)
@_cli_errors
def wallet_init(store, config_path, ledger, freshness, passphrase):
    """Create a new encrypted wallet, pinning the ledger's genesis block."""
    settings = _settings(config_path)
    store = _resolve(store, settings, "store")
    ledger = _resolve(ledger, settings, "ledger")
    if not ledger:
        raise click.ClickException("a ledger URL is required (--ledger or config)")
    if os.path.exists(store):
        raise click.ClickException(f"refusing to overwrite existing store {store}")
    client = HttpLedgerClient(ledger)
    genesis = client.genesis_config()
    trust = TrustConfig(
        node_endpoints=[ledger],
        genesis_hash=client.genesis_hash(),
        freshness_seconds=freshness,
    )
    state = new_wallet_state(genesis["params"], trust)
    save_wallet(store, passphrase, state)
    w = Wallet(state, HttpTransport())
    click.echo(f"wallet created at {store}")
    click.echo(f"wallet DID: {w.identity.did}")
    click.echo(f"pinned genesis: {trust.genesis_hash}")


@wallet.command("unlock")
@store_option
@config_option
@passphrase_option
@_cli_errors
def wallet_unlock(store, config_path, passphrase):
    """Check the passphrase and re-verify every stored credential."""
    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)
    click.echo(f"wallet unlocked: {w.identity.did}")
    click.echo(
        f"{len(w.credentials)} credential(s), {len(w.peer.connections)} connection(s)"
    )


@wallet.command("connect")
@click.argument("payload")
@store_option
@config_option
@passphrase_option
@click.option("--yes", is_flag=True, help="Skip the interactive consent prompt.")
@_cli_errors
def wallet_connect(payload, store, config_path, passphrase, yes):
    """Accept a connection invitation (QR payload text or a file holding it)."""
    store = _resolve(store, _settings(config_path), "store")
    if os.path.exists(payload):
        with open(payload, "r", encoding="utf-8") as fh:
            payload = fh.read().strip()
    try:
        invitation = decode_qr(payload)  # decode before asking, so consent names the peer
    except VaxPassError as exc:
        raise BadPayload(exc.detail or str(exc)) from exc
    who = invitation.get("inviter", "unknown peer")
    if not yes and not click.confirm(f"Connect to {who} at {invitation.get('endpoint')}?"):
        click.echo("DECLINED: connection refused, nothing stored")
        return
    w = _open_wallet(store, passphrase)
    result = w.connect(payload, consent=True)
    save_wallet(store, passphrase, w.to_state())
    click.echo(f"connected: {result['connection_id']} -> {result['remote_did']}")
    for item in w.pending_items():
        click.echo(f"new pending {item['kind']}: {item['id']}")


@wallet.command("connections")
@store_option
@config_option
@passphrase_option
@_cli_errors
def wallet_connections(store, config_path, passphrase):
    """List established connections."""
    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)
    rows = w.list_connections()
    if not rows:
        click.echo("no connections")
    for c in rows:
        click.echo(f"{c['connection_id']}  {c['remote_did']}  {c['remote_endpoint']}")


@wallet.command("list")
@store_option
@config_option
@passphrase_option
@_cli_errors
def wallet_list(store, config_path, passphrase):
    """List stored credentials."""
    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)
    rows = w.list_credentials()
    if not rows:
        click.echo("no credentials")
    for c in rows:
        flag = "REVOKED" if c["revoked"] else "ok"
        claims = ", ".join(f"{k}={v}" for k, v in sorted(c["claims"].items()))
        click.echo(f"{c['serial']}  [{flag}]  issuer={c['issuer_did']}")
        click.echo(f"  {claims}")


@wallet.command("pending")
@store_option
@config_option
@passphrase_option
@_cli_errors
def wallet_pending(store, config_path, passphrase):
    """List items awaiting a decision (credential offers, proof requests)."""
    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)
    items = w.pending_items()
    if not items:
        click.echo("nothing pending")
    for item in items:
        click.echo(f"{item['id']}  {item['kind']}  from {item['from']}")
        if item["kind"] == "credential-offer":
            claims = ", ".join(f"{k}={v}" for k, v in sorted(item["claims"].items()))
            click.echo(f"  claims: {claims}")
        else:
            req = item["request"]
            click.echo(
                f"  reveal: {req.get('revealed', [])}  predicates: {req.get('predicates', [])}"
            )


@wallet.command("respond")
@click.argument("item_id")
@click.argument("decision", type=click.Choice(["accept", "decline"]))
@store_option
@config_option
@passphrase_option
@_cli_errors
def wallet_respond(item_id, decision, store, config_path, passphrase):
    """Accept or decline a pending offer or proof request."""
    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)
    outcome = w.respond(item_id, decision)
    save_wallet(store, passphrase, w.to_state())
    line = f"{outcome['kind']}: {outcome['state']}"
    if outcome.get("detail"):
        line += f" ({outcome['detail']})"
    if outcome.get("code"):
        line += f" [{outcome['code']}]"
    click.echo(line)


@wallet.command("sync")
@store_option
@config_option
@passphrase_option
@_cli_errors
def wallet_sync(store, config_path, passphrase):
    """Fetch revocation registry deltas and update witnesses."""
    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)
    report = w.sync_revocation()
    save_wallet(store, passphrase, w.to_state())
    if not report:
        click.echo("no credentials to sync")
    for row in report:
        flag = "REVOKED" if row["revoked"] else f"ok, witness epoch {row['witness_epoch']}"
        click.echo(f"{row['serial']}: {flag}")


@wallet.command("export")
@store_option
@config_option
@passphrase_option
@click.option("--out", default=None, help="Write to a file instead of stdout.")
@_cli_errors
def wallet_export(store, config_path, passphrase, out):
    """Dump the decrypted wallet state as JSON (handle with care)."""
    store = _resolve(store, _settings(config_path), "store")
    state = load_wallet(store, passphrase)
    text = json.dumps(state, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        click.echo(f"exported to {out} (unencrypted)")
    else:
        click.echo(text)


@wallet.command("bridge")
@store_option
@config_option
@passphrase_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8470, show_default=True)
@_cli_errors
def wallet_bridge(store, config_path, passphrase, host, port):
    """Serve the localhost consent bridge for the browser demo UI."""
    import uvicorn

    from .services.bridge import create_bridge_app

    store = _resolve(store, _settings(config_path), "store")
    w = _open_wallet(store, passphrase)

    def save():
        save_wallet(store, passphrase, w.to_state())

    click.echo(f"wallet bridge for {w.identity.did} on http://{host}:{port}")
    uvicorn.run(create_bridge_app(w, save=save), host=host, port=port, log_level="warning")


# --------------------------------------------------------------------- demo


@main.group()
def demo():
    """Run the whole system in one process for demos and development."""


@demo.command("run")
@click.option("--profile", default="test", show_default=True, type=click.Choice(["test", "prod"]))
@_cli_errors
def demo_run(profile):
    """Narrated end-to-end flow: issue, verify, decline, revoke."""
    from .demo import run_demo

    run_demo(profile)


@demo.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True)
@click.option("--profile", default="test", show_default=True, type=click.Choice(["test", "prod"]))
@click.option("--seed", default=None, help="Deterministic setup seed (hex or text).")
@_cli_errors
def demo_serve(host, port, profile, seed):
    """Serve ledger, issuer, verifier, and wallet bridge under one HTTP app."""
    import uvicorn

    from .demo import build_stack, create_demo_app

    seed_bytes = seed.encode() if seed else None
    stack = build_stack(profile=profile, seed=seed_bytes, base_url=f"http://{host}:{port}")
    click.echo(f"issuer DID: {stack.issuer.identity.did}")
    click.echo(f"wallet DID: {stack.wallet.identity.did}")
    click.echo(f"serving on http://{host}:{port} (ledger/issuer/verifier/wallet)")
    uvicorn.run(create_demo_app(stack), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()

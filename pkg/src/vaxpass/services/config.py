"""Service configuration: one canonical-JSON file plus environment overrides.

Each deployable reads a single JSON file; any key in it can be overridden
by an environment variable named ``VAXPASS_<KEY>`` (upper-cased). Override
values are parsed as JSON when possible, otherwise taken as plain strings.
"""

from __future__ import annotations

import json
import os

from ..canonical import canonical_json
from ..errors import BadFormat

ENV_PREFIX = "VAXPASS_"


def load_config(path: str | None, defaults: dict | None = None, env=None) -> dict:
    env = os.environ if env is None else env
    config = dict(defaults or {})
    if path is not None:
        try:
            with open(path, "rb") as fh:
                loaded = json.loads(fh.read())
        except FileNotFoundError:
            loaded = {}
        except (OSError, json.JSONDecodeError) as exc:
            raise BadFormat(f"config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise BadFormat(f"config file {path} must hold a JSON object")
        config.update(loaded)
    for key in list(config):
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is None:
            continue
        try:
            config[key] = json.loads(raw)
        except json.JSONDecodeError:
            config[key] = raw
    return config


def save_config(path: str, config: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(canonical_json(config) + b"\n")

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vaxpass.crypto.params import setup_params


@pytest.fixture(scope="session")
def toy():
    return setup_params("toy-fixed")


@pytest.fixture(scope="session")
def tparams():
    # fixed seed: the suite exercises one reproducible 512-bit group
    return setup_params("test", seed=b"vaxpass-unit-tests")


@pytest.fixture(scope="session")
def stack():
    """One live issuer + verifier + ledger wired over in-process transport.

    Shared across the service tests; every test issues to its own fresh
    wallet, so only the ledger and the revocation registry accumulate."""
    from vaxpass.demo import build_stack

    return build_stack(profile="test", seed=b"service-tests")

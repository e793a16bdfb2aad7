import sys

import pytest
from hypothesis import settings

from chainauth.crypto import KeyPair, Rng
from chainauth.ledger import Ledger

settings.register_profile("default", deadline=None)
settings.load_profile("default")


class FixedNonce:
    """Stands in for Rng when a test needs a known nonce."""

    def __init__(self, nonce: bytes):
        self._nonce = nonce

    def nonce(self) -> bytes:
        return self._nonce


@pytest.fixture
def rng():
    return Rng(1234)


@pytest.fixture
def alice():
    return KeyPair(b"a" * 32)


@pytest.fixture
def bob():
    return KeyPair(b"b" * 32)


@pytest.fixture
def carol():
    return KeyPair(b"c" * 32)


@pytest.fixture
def chain(alice, bob):
    return Ledger({alice.address: 100, bob.address: 10})


def mine_all(ledger):
    while ledger.pending:
        ledger.mine_block()
    return ledger.height


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])

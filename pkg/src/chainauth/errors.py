"""Exception hierarchy.

Ledger and contract failures surface in two ways: raised directly when a
submission is rejected up front, or recorded by class name in a reverted
transaction receipt. :func:`error_class` maps the name back.
"""


class AuthFailure(Exception):
    """Authenticated decryption failed (tampering or wrong key)."""


class EncodingError(ValueError):
    pass


class LedgerError(Exception):
    pass


class InsufficientFunds(LedgerError):
    pass


class InvalidPayload(LedgerError):
    pass


class InvalidTimeout(LedgerError):
    pass


class WrongState(LedgerError):
    pass


class NotPayer(LedgerError):
    pass


class BadPreimage(LedgerError):
    pass


class Expired(LedgerError):
    pass


class NotYetExpired(LedgerError):
    pass


class UnknownHtlc(LedgerError):
    pass


class UnknownContract(LedgerError):
    pass


# authorization contract

class InvalidPolicy(LedgerError):
    pass


class NotOwner(LedgerError):
    pass


class WrongPrice(LedgerError):
    pass


class NotAllowed(LedgerError):
    pass


class EventNotSatisfied(LedgerError):
    pass


class UnknownScope(LedgerError):
    pass


class NotAuthorizedAS(LedgerError):
    pass


class NotClient(LedgerError):
    pass


class UnknownRequest(LedgerError):
    pass


class LockMismatch(LedgerError):
    """Client acknowledgment names a hash-lock other than the posted one."""


class UndecryptableGrant(LedgerError):
    """Revealed preimage does not open the posted encrypted token."""


# protocol roles

class ProtocolError(Exception):
    pass


class PriceRejected(ProtocolError):
    pass


class CommitMismatch(ProtocolError):
    """Disclosed artifacts disagree with an on-chain commitment."""

    def __init__(self, commitment: str, expected: bytes, actual: bytes):
        super().__init__(f"{commitment}: on-chain {expected.hex()} != recomputed {actual.hex()}")
        self.commitment = commitment
        self.expected = expected
        self.actual = actual


class ConfigError(ValueError):
    pass


class ParseError(ValueError):
    pass


class InvariantViolation(AssertionError):
    pass


def error_class(name: str) -> type[Exception]:
    cls = globals().get(name)
    if isinstance(cls, type) and issubclass(cls, Exception):
        return cls
    return LedgerError

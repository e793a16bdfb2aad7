"""The constrained resource server.

A :class:`Thing` is provisioned with its identifier and the key it shares
with the AS, and nothing else: no ledger handle, no AS handle. Access is a
one-round proof-of-possession handshake::

    client -> Thing : token, E_Thing(PoP)            (begin_access)
    Thing  -> client: 16-byte challenge
    client -> Thing : HMAC(PoP, challenge || token tag)   (complete_access)
    Thing  -> client: resource payload, or a denial
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import crypto
from .crypto import Ciphertext
from .errors import AuthFailure, EncodingError
from .tokens import SignedToken, Verdict, verify_token

CHALLENGE_SIZE = 16


def pop_aad(thing_id: str) -> bytes:
    return b"chainauth/e_thing_pop/" + thing_id.encode()


SEALED_TOKEN_AAD = b"chainauth/sealed-token"


class DenyReason(enum.Enum):
    BAD_MAC = "BadMac"
    WRONG_AUDIENCE = "WrongAudience"
    POP_BINDING_MISMATCH = "PopBindingMismatch"
    EXPIRED = "Expired"
    BAD_POP = "BadPop"
    SCOPE_DENIED = "ScopeDenied"
    REPLAYED_CHALLENGE = "ReplayedChallenge"


class AccessDenied(Exception):
    def __init__(self, reason: DenyReason):
        super().__init__(reason.value)
        self.reason = reason


_FROM_VERDICT = {
    Verdict.BAD_MAC: DenyReason.BAD_MAC,
    Verdict.WRONG_AUDIENCE: DenyReason.WRONG_AUDIENCE,
    Verdict.EXPIRED: DenyReason.EXPIRED,
    Verdict.SCOPE_DENIED: DenyReason.SCOPE_DENIED,
}


@dataclass(frozen=True)
class PopChallenge:
    challenge: bytes


@dataclass(frozen=True)
class PopResponse:
    response: bytes


def pop_response(pop_key: bytes, challenge: PopChallenge, token: SignedToken) -> PopResponse:
    return PopResponse(crypto.mac(pop_key, challenge.challenge + token.tag))


def seal_token(pop_key: bytes, token: SignedToken, rng: crypto.Rng) -> Ciphertext:
    """Encrypt a token under its own PoP key for presentation over an open link."""
    return crypto.encrypt(pop_key, token.to_bytes(), SEALED_TOKEN_AAD, rng)


class Thing:
    def __init__(self, thing_id: str, k_thing_as: bytes, resources: dict[str, bytes], rng: crypto.Rng):
        self.thing_id = thing_id
        self._key = k_thing_as
        self.resources = dict(resources)
        self.clock = 0
        self._rng = rng
        self._outstanding: dict[bytes, tuple[SignedToken, bytes]] = {}

    def tick(self, height: int) -> None:
        self.clock = height

    def _open_pop(self, e_thing_pop: Ciphertext) -> bytes:
        try:
            return crypto.decrypt(self._key, e_thing_pop, pop_aad(self.thing_id))
        except AuthFailure:
            raise AccessDenied(DenyReason.POP_BINDING_MISMATCH) from None

    def _check_token(self, st: SignedToken) -> None:
        verdict = verify_token(st, self._key, self.clock, None, self.thing_id)
        if verdict is not Verdict.VALID:
            raise AccessDenied(_FROM_VERDICT[verdict])

    def _challenge(self, st: SignedToken, pop_key: bytes) -> PopChallenge:
        if crypto.digest(pop_key) != st.token.pop_binding:
            raise AccessDenied(DenyReason.POP_BINDING_MISMATCH)
        ch = self._rng.bytes(CHALLENGE_SIZE)
        self._outstanding[ch] = (st, pop_key)
        return PopChallenge(ch)

    def begin_access(self, st: SignedToken, e_thing_pop: Ciphertext) -> PopChallenge:
        self._check_token(st)
        return self._challenge(st, self._open_pop(e_thing_pop))

    def begin_access_sealed(self, sealed: Ciphertext, e_thing_pop: Ciphertext) -> PopChallenge:
        """Like :meth:`begin_access`, for a token sealed with :func:`seal_token`."""
        pop_key = self._open_pop(e_thing_pop)
        try:
            st = SignedToken.from_bytes(crypto.decrypt(pop_key, sealed, SEALED_TOKEN_AAD))
        except (AuthFailure, EncodingError):
            raise AccessDenied(DenyReason.POP_BINDING_MISMATCH) from None
        self._check_token(st)
        return self._challenge(st, pop_key)

    def complete_access(self, challenge: PopChallenge, response: PopResponse, required_scope: str) -> bytes:
        entry = self._outstanding.pop(challenge.challenge, None)
        if entry is None:
            raise AccessDenied(DenyReason.REPLAYED_CHALLENGE)
        st, pop_key = entry
        if not crypto.mac_verify(pop_key, challenge.challenge + st.tag, response.response):
            raise AccessDenied(DenyReason.BAD_POP)
        if required_scope not in st.token.scopes:
            raise AccessDenied(DenyReason.SCOPE_DENIED)
        if not self.clock < st.token.expires_at:
            raise AccessDenied(DenyReason.EXPIRED)
        return self.resources.get(required_scope, b"")

"""Self-contained access tokens, MAC-protected under the Thing/AS shared key.

Canonical layout (all integers big-endian, unsigned)::

    u8      version (0x01)
    u16     len(issuer)    | issuer   (UTF-8)
    u16     len(audience)  | audience (UTF-8)
    u16     scope count
            per scope, sorted by UTF-8 bytes:  u16 len | scope (UTF-8)
    u64     issued_at      (block height)
    u64     expires_at     (block height, exclusive)
    32      pop_binding    (SHA-256 of the PoP key)
    16      session_nonce

A signed token on the wire is ``canonical || HMAC-SHA-256 tag`` (32 bytes).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from . import crypto
from .errors import EncodingError

VERSION = 1
SESSION_NONCE_SIZE = 16
_U16_MAX = 0xFFFF
_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class AccessToken:
    issuer: str
    audience: str
    scopes: frozenset[str]
    issued_at: int
    expires_at: int
    pop_binding: bytes
    session_nonce: bytes

    def __post_init__(self):
        object.__setattr__(self, "scopes", frozenset(self.scopes))
        if not self.scopes:
            raise EncodingError("token needs at least one scope")
        if any(not s for s in self.scopes):
            raise EncodingError("empty scope string")
        if not (0 <= self.issued_at < self.expires_at <= _U64_MAX):
            raise EncodingError("need 0 <= issued_at < expires_at < 2**64")
        if len(self.pop_binding) != crypto.DIGEST_SIZE:
            raise EncodingError("pop_binding must be 32 bytes")
        if len(self.session_nonce) != SESSION_NONCE_SIZE:
            raise EncodingError("session_nonce must be 16 bytes")
        if len(self.scopes) > _U16_MAX:
            raise EncodingError("too many scopes")


def _field(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > _U16_MAX:
        raise EncodingError("field longer than 65535 bytes")
    return struct.pack(">H", len(raw)) + raw


def canonical_encode(token: AccessToken) -> bytes:
    scopes = sorted(s.encode("utf-8") for s in token.scopes)
    parts = [bytes([VERSION]), _field(token.issuer), _field(token.audience),
             struct.pack(">H", len(scopes))]
    parts += [_field(s.decode("utf-8")) for s in scopes]
    parts += [struct.pack(">QQ", token.issued_at, token.expires_at),
              token.pop_binding, token.session_nonce]
    return b"".join(parts)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw, self.pos = raw, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise EncodingError("truncated token")
        out = self.raw[self.pos:self.pos + n]
        self.pos += n
        return out

    def text(self) -> str:
        (n,) = struct.unpack(">H", self.take(2))
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(str(exc)) from None


def canonical_decode(raw: bytes) -> AccessToken:
    r = _Reader(raw)
    if r.take(1) != bytes([VERSION]):
        raise EncodingError("unknown token version")
    issuer, audience = r.text(), r.text()
    (count,) = struct.unpack(">H", r.take(2))
    scopes = [r.text() for _ in range(count)]
    if [s.encode() for s in scopes] != sorted({s.encode() for s in scopes}):
        raise EncodingError("scopes not in canonical order")
    issued_at, expires_at = struct.unpack(">QQ", r.take(16))
    pop_binding, nonce = r.take(32), r.take(SESSION_NONCE_SIZE)
    if r.pos != len(raw):
        raise EncodingError("trailing bytes")
    return AccessToken(issuer, audience, frozenset(scopes), issued_at, expires_at, pop_binding, nonce)


@dataclass(frozen=True)
class SignedToken:
    token: AccessToken
    tag: bytes

    def to_bytes(self) -> bytes:
        return canonical_encode(self.token) + self.tag

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SignedToken":
        if len(raw) < crypto.DIGEST_SIZE:
            raise EncodingError("truncated signed token")
        return cls(canonical_decode(raw[:-crypto.DIGEST_SIZE]), raw[-crypto.DIGEST_SIZE:])


@dataclass(frozen=True)
class Claims:
    issuer: str
    audience: str
    scopes: frozenset[str]
    issued_at: int
    expires_at: int
    session_nonce: bytes


def issue_token(claims: Claims, pop_key: bytes, k_thing_as: bytes) -> SignedToken:
    token = AccessToken(claims.issuer, claims.audience, frozenset(claims.scopes),
                        claims.issued_at, claims.expires_at,
                        crypto.digest(pop_key), claims.session_nonce)
    return SignedToken(token, crypto.mac(k_thing_as, canonical_encode(token)))


class Verdict(enum.Enum):
    VALID = "Valid"
    BAD_MAC = "BadMac"
    EXPIRED = "Expired"
    SCOPE_DENIED = "ScopeDenied"
    WRONG_AUDIENCE = "WrongAudience"

    def __bool__(self):
        return self is Verdict.VALID


def verify_token(st: SignedToken, k_thing_as: bytes, now: int, required_scope: str | None,
                 expected_audience: str) -> Verdict:
    """Offline check in the order MAC, audience, expiry, scope.

    ``required_scope=None`` skips the scope check.
    """
    try:
        encoded = canonical_encode(st.token)
    except EncodingError:
        return Verdict.BAD_MAC
    if not crypto.mac_verify(k_thing_as, encoded, st.tag):
        return Verdict.BAD_MAC
    if st.token.audience != expected_audience:
        return Verdict.WRONG_AUDIENCE
    if not now < st.token.expires_at:
        return Verdict.EXPIRED
    if required_scope is not None and required_scope not in st.token.scopes:
        return Verdict.SCOPE_DENIED
    return Verdict.VALID

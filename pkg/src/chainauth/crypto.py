"""Deterministic cryptographic primitives.

Everything here is a thin layer over ``hashlib``/``hmac`` and the
``cryptography`` package. The only stateful object is :class:`Rng`, which
feeds every key, nonce and secret so that whole protocol runs replay
byte-for-byte from a seed.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import AuthFailure

DIGEST_SIZE = 32
KEY_SIZE = 32
NONCE_SIZE = 12
TAG_SIZE = 16
ADDRESS_SIZE = 20
PUBLIC_KEY_SIZE = 64  # ed25519 verify key || x25519 encryption key

_RAW = serialization.Encoding.Raw
_RAW_PUB = serialization.PublicFormat.Raw


def digest(data: bytes) -> bytes:
    """SHA-256 of ``data``; also the hash-lock function."""
    return hashlib.sha256(data).digest()


def _require_len(name: str, value: bytes, size: int) -> None:
    if not isinstance(value, (bytes, bytearray)) or len(value) != size:
        raise ValueError(f"{name} must be {size} bytes")


class Rng:
    """Seedable byte source. Not a CSPRNG; this is a simulation."""

    def __init__(self, seed: int | bytes):
        if isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=seed < 0)
        self._seed = bytes(seed)
        self._r = random.Random(digest(b"rng" + self._seed))

    def bytes(self, n: int) -> bytes:
        return self._r.randbytes(n)

    def key(self) -> bytes:
        return self.bytes(KEY_SIZE)

    secret = key

    def nonce(self) -> bytes:
        return self.bytes(NONCE_SIZE)

    def randint(self, a: int, b: int) -> int:
        return self._r.randint(a, b)

    def child(self, label: str) -> "Rng":
        """Independent stream, stable regardless of how much the parent has been used."""
        return Rng(digest(self._seed + b"/" + label.encode()))


@dataclass(frozen=True)
class Ciphertext:
    nonce: bytes
    body: bytes
    tag: bytes

    def __post_init__(self):
        _require_len("nonce", self.nonce, NONCE_SIZE)
        if len(self.tag) > TAG_SIZE:
            raise ValueError("tag longer than 16 bytes")

    def to_bytes(self) -> bytes:
        return self.nonce + self.body + self.tag

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Ciphertext":
        if len(raw) < NONCE_SIZE + TAG_SIZE:
            raise AuthFailure("ciphertext too short")
        return cls(raw[:NONCE_SIZE], raw[NONCE_SIZE:-TAG_SIZE], raw[-TAG_SIZE:])


def encrypt(key: bytes, plaintext: bytes, aad: bytes, rng: Rng) -> Ciphertext:
    _require_len("key", key, KEY_SIZE)
    nonce = rng.nonce()
    sealed = ChaCha20Poly1305(bytes(key)).encrypt(nonce, plaintext, aad)
    return Ciphertext(nonce, sealed[:-TAG_SIZE], sealed[-TAG_SIZE:])


def decrypt(key: bytes, c: Ciphertext, aad: bytes) -> bytes:
    if len(key) != KEY_SIZE or len(c.tag) != TAG_SIZE or len(c.nonce) != NONCE_SIZE:
        raise AuthFailure("malformed key or ciphertext")
    try:
        return ChaCha20Poly1305(bytes(key)).decrypt(c.nonce, c.body + c.tag, aad)
    except InvalidTag:
        raise AuthFailure("authentication failed") from None


def mac(key: bytes, data: bytes) -> bytes:
    _require_len("key", key, KEY_SIZE)
    return hmac.new(key, data, hashlib.sha256).digest()


def mac_verify(key: bytes, data: bytes, tag: bytes) -> bool:
    if len(key) != KEY_SIZE:
        return False
    return hmac.compare_digest(mac(key, data), tag)


def address_of(public: bytes) -> bytes:
    return digest(public)[:ADDRESS_SIZE]


@dataclass(frozen=True, repr=False)
class KeyPair:
    """Ledger account key material: Ed25519 for signing, X25519 for encryption."""

    seed: bytes

    def __repr__(self):
        return f"KeyPair(address={self.address.hex()})"

    @property
    def _signing(self) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(digest(b"sign/" + self.seed))

    @property
    def _decryption(self) -> X25519PrivateKey:
        return X25519PrivateKey.from_private_bytes(digest(b"enc/" + self.seed))

    @property
    def public(self) -> bytes:
        return (self._signing.public_key().public_bytes(_RAW, _RAW_PUB)
                + self._decryption.public_key().public_bytes(_RAW, _RAW_PUB))

    @property
    def address(self) -> bytes:
        return address_of(self.public)


def keypair_from_seed(seed: bytes) -> KeyPair:
    _require_len("seed", seed, 32)
    return KeyPair(bytes(seed))


def sign(kp: KeyPair, data: bytes) -> bytes:
    return kp._signing.sign(data)


def verify(public: bytes, data: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public[:32]).verify(signature, data)
    except (InvalidSignature, ValueError):
        return False
    return True


def _pk_key(shared: bytes, eph_pub: bytes, recipient_pub: bytes) -> bytes:
    return HKDF(hashes.SHA256(), KEY_SIZE, salt=None,
                info=b"chainauth/pk-encrypt" + eph_pub + recipient_pub).derive(shared)


def pk_encrypt(public: bytes, plaintext: bytes, rng: Rng, aad: bytes = b"") -> Ciphertext:
    """Ephemeral-static X25519 hybrid encryption.

    The 32-byte ephemeral public key is carried as the first bytes of ``body``.
    """
    _require_len("public key", public, PUBLIC_KEY_SIZE)
    recipient = public[32:]
    eph = X25519PrivateKey.from_private_bytes(rng.key())
    eph_pub = eph.public_key().public_bytes(_RAW, _RAW_PUB)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(recipient))
    inner = encrypt(_pk_key(shared, eph_pub, recipient), plaintext, aad, rng)
    return Ciphertext(inner.nonce, eph_pub + inner.body, inner.tag)


def pk_session_key(kp: KeyPair, c: Ciphertext) -> bytes:
    """The one-time AEAD key of a single pk_encrypt ciphertext.

    Disclosing it opens that ciphertext (see ``pk_open``) and nothing else.
    """
    if len(c.body) < 32:
        raise AuthFailure("missing ephemeral key")
    eph_pub = c.body[:32]
    priv = kp._decryption
    try:
        shared = priv.exchange(X25519PublicKey.from_public_bytes(eph_pub))
    except ValueError:
        raise AuthFailure("bad ephemeral key") from None
    own = priv.public_key().public_bytes(_RAW, _RAW_PUB)
    return _pk_key(shared, eph_pub, own)


def pk_open(session_key: bytes, c: Ciphertext, aad: bytes = b"") -> bytes:
    if len(c.body) < 32:
        raise AuthFailure("missing ephemeral key")
    return decrypt(session_key, Ciphertext(c.nonce, c.body[32:], c.tag), aad)


def pk_decrypt(kp: KeyPair, c: Ciphertext, aad: bytes = b"") -> bytes:
    return pk_open(pk_session_key(kp, c), c, aad)

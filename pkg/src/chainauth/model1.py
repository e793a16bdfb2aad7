"""Direct client/AS exchange with payment-linked token release.

Flow, one ledger transaction per numbered step that touches the chain::

    1  client -> AS   (secure)  access request for a scope
    2  AS -> client   (secure)  PoP key, E_Thing(PoP), E_s(token), h = H(s), price
    3  AS -> ledger   tx #1     commit1, commit2 and HTLC(payer=client, payee=owner, h)
    4  client -> ledger tx #2   deposit the price into the HTLC
    5  AS -> ledger   tx #3     claim with s; owner is paid and s becomes public
    6  client                   read s from the chain, decrypt E_s(token)

``commit1 = H(signed token)`` and ``commit2 = H(E_Thing(PoP) || PoP || E_s(token))``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import crypto
from .crypto import Ciphertext, KeyPair, Rng
from .errors import (AuthFailure, CommitMismatch, InsufficientFunds, LedgerError, PriceRejected,
                     UnknownHtlc, UnknownScope)
from .ledger import HtlcState, Ledger
from .thing import pop_aad
from .tokens import Claims, SignedToken, issue_token
from .transcript import Transcript

TOKEN_AAD = b"chainauth/model1/e_s_token"
MAX_CLAIMS = 2


def commitment1(token: SignedToken) -> bytes:
    return crypto.digest(token.to_bytes())


def commitment2(e_thing_pop: Ciphertext, pop_key: bytes, e_s_token: Ciphertext) -> bytes:
    return crypto.digest(e_thing_pop.to_bytes() + pop_key + e_s_token.to_bytes())


@dataclass(frozen=True)
class GrantPackage:
    session_id: bytes
    pop_key: bytes
    e_thing_pop: Ciphertext
    e_s_token: Ciphertext
    hash_lock: bytes
    price: int
    htlc_id: bytes
    commit1: bytes
    commit2: bytes

    def to_json(self) -> dict:
        return {"session_id": self.session_id, "pop_key": self.pop_key,
                "e_thing_pop": self.e_thing_pop.to_bytes(), "e_s_token": self.e_s_token.to_bytes(),
                "hash_lock": self.hash_lock, "price": self.price, "htlc_id": self.htlc_id,
                "commit1": self.commit1, "commit2": self.commit2}


class Phase(enum.Enum):
    REQUESTED = "Requested"
    COMMITTED = "Committed"
    DEPOSITED = "Deposited"
    REVEALED = "Revealed"
    COMPLETED = "Completed"
    REFUNDED = "Refunded"
    ABORTED = "Aborted"


TERMINAL = {Phase.COMPLETED, Phase.REFUNDED, Phase.ABORTED}


@dataclass(frozen=True)
class Misbehaviour:
    """Adversary toggles for the AS."""

    withhold_secret: bool = False
    tamper_package: bool = False
    wrong_preimage: bool = False
    wrong_audience: bool = False


@dataclass
class AsSession:
    session_id: bytes
    client: bytes
    scope: str
    secret: bytes
    token: SignedToken
    package: GrantPackage
    phase: Phase = Phase.COMMITTED
    claim_tx: bytes | None = None
    claim_attempts: int = 0


def _flip(c: Ciphertext) -> Ciphertext:
    body = bytearray(c.body)
    body[0] ^= 0x01
    return Ciphertext(c.nonce, bytes(body), c.tag)


class AuthorizationServer:
    def __init__(self, keypair: KeyPair, k_thing_as: bytes, ledger: Ledger, rng: Rng, *,
                 issuer: str, thing_id: str, owner: bytes, prices: dict[str, int],
                 timeout_blocks: int = 20, token_lifetime: int = 100,
                 misbehaviour: Misbehaviour = Misbehaviour(), transcript: Transcript | None = None):
        self.keypair = keypair
        self.address = keypair.address
        self._k_thing_as = k_thing_as
        self.ledger = ledger
        self._rng = rng
        self.issuer = issuer
        self.thing_id = thing_id
        self.owner = owner
        self.prices = dict(prices)
        self.timeout_blocks = timeout_blocks
        self.token_lifetime = token_lifetime
        self.misbehaviour = misbehaviour
        self.transcript = transcript or Transcript()
        self.sessions: dict[bytes, AsSession] = {}

    def handle_request(self, client: bytes, scope: str, client_pub: bytes) -> GrantPackage:
        """Steps 1-3: answer at once, commit on chain, return the package for the secure channel."""
        if scope not in self.prices:
            raise UnknownScope(scope)
        rng = self._rng
        session_id = rng.bytes(16)
        pop_key, secret = rng.key(), rng.secret()
        now = self.ledger.height
        audience = self.thing_id if not self.misbehaviour.wrong_audience else self.thing_id + "-other"
        claims = Claims(self.issuer, audience, frozenset({scope}), now, now + self.token_lifetime,
                        session_id)
        token = issue_token(claims, pop_key, self._k_thing_as)
        e_thing_pop = crypto.encrypt(self._k_thing_as, pop_key, pop_aad(self.thing_id), rng)
        e_s_token = crypto.encrypt(secret, token.to_bytes(), TOKEN_AAD, rng)
        hash_lock = crypto.digest(secret)
        c1, c2 = commitment1(token), commitment2(e_thing_pop, pop_key, e_s_token)
        price = self.prices[scope]
        htlc_id = self.ledger.htlc_create(
            self.address, self.owner, price, hash_lock,
            self.ledger.height + 1 + self.timeout_blocks, payer=client, records=[c1, c2])
        pkg = GrantPackage(session_id, pop_key, e_thing_pop, e_s_token, hash_lock, price, htlc_id, c1, c2)
        self.sessions[session_id] = AsSession(session_id, client, scope, secret, token, pkg)
        if self.misbehaviour.tamper_package:
            pkg = GrantPackage(session_id, pop_key, e_thing_pop, _flip(e_s_token), hash_lock, price,
                               htlc_id, c1, c2)
        return pkg

    def step(self) -> None:
        for session in self.sessions.values():
            self._advance(session)

    def _advance(self, s: AsSession) -> None:
        if s.phase in TERMINAL or s.phase is Phase.REVEALED:
            return
        try:
            htlc = self.ledger.htlc(s.package.htlc_id)
        except UnknownHtlc:
            return
        if htlc.state is HtlcState.REFUNDED:
            s.phase = Phase.REFUNDED
            return
        if htlc.state is HtlcState.CLAIMED:
            s.phase = Phase.REVEALED
            return
        if htlc.state is HtlcState.CREATED and self.ledger.height + 1 >= htlc.timeout_height:
            s.phase = Phase.ABORTED
            return
        if s.claim_tx is not None:
            receipt = self.ledger.receipt(s.claim_tx)
            if receipt is None:
                return
            s.claim_tx = None
            if not receipt.ok:
                self.transcript.emit("error", role="as", error=receipt.error, detail=receipt.detail)
        if htlc.state is HtlcState.DEPOSITED:
            s.phase = Phase.DEPOSITED
            if (not self.misbehaviour.withhold_secret and s.claim_attempts < MAX_CLAIMS
                    and self.ledger.height + 1 < htlc.timeout_height):
                self.reveal(s.session_id)

    def reveal(self, session_id: bytes) -> bytes:
        """Step 5: claim the HTLC with s once the deposit is on chain."""
        s = self.sessions[session_id]
        preimage = s.secret
        if self.misbehaviour.wrong_preimage and s.claim_attempts == 0:
            preimage = self._rng.secret()
        s.claim_attempts += 1
        s.claim_tx = self.ledger.htlc_claim(self.address, s.package.htlc_id, preimage)
        return s.claim_tx

    @property
    def done(self) -> bool:
        return all(s.phase in TERMINAL | {Phase.REVEALED} for s in self.sessions.values())


class Client:
    def __init__(self, keypair: KeyPair, ledger: Ledger, *, scope: str,
                 max_price: int | None = None, transcript: Transcript | None = None):
        self.keypair = keypair
        self.address = keypair.address
        self.ledger = ledger
        self.scope = scope
        self.max_price = max_price
        self.transcript = transcript or Transcript()
        self.phase: Phase | None = None
        self.package: GrantPackage | None = None
        self.token: SignedToken | None = None
        self.pop_key: bytes | None = None
        self.error: Exception | None = None
        self._deposit_tx: bytes | None = None
        self._refund_tx: bytes | None = None

    def request(self, server: AuthorizationServer) -> GrantPackage:
        """Step 1 over the secure channel; the reply is the step-2 package."""
        self.transcript.emit("message", channel="secure", src="client", dst="as", kind="access_request",
                             body={"client": self.address, "scope": self.scope,
                                   "client_pub": self.keypair.public})
        pkg = server.handle_request(self.address, self.scope, self.keypair.public)
        self.transcript.emit("message", channel="secure", src="as", dst="client", kind="grant_package",
                             body=pkg.to_json())
        self.package = pkg
        self.phase = Phase.REQUESTED
        return pkg

    def check_commitments(self, pkg: GrantPackage) -> None:
        """Recompute commit2 from the package and require both commitments on chain."""
        recomputed = commitment2(pkg.e_thing_pop, pkg.pop_key, pkg.e_s_token)
        if recomputed != pkg.commit2:
            raise CommitMismatch("commit2", pkg.commit2, recomputed)
        for name, value in (("commit1", pkg.commit1), ("commit2", pkg.commit2)):
            if not self.ledger.find_records(value):
                raise CommitMismatch(name, value, b"")

    def deposit(self, pkg: GrantPackage) -> bytes:
        """Step 4."""
        if self.max_price is not None and pkg.price > self.max_price:
            raise PriceRejected(f"price {pkg.price} above limit {self.max_price}")
        if self.ledger.balance(self.address) < pkg.price:
            raise InsufficientFunds(f"balance {self.ledger.balance(self.address)} < {pkg.price}")
        self._deposit_tx = self.ledger.htlc_deposit(self.address, pkg.htlc_id)
        return self._deposit_tx

    def finalize(self, pkg: GrantPackage) -> tuple[SignedToken, bytes]:
        """Step 6: read s from the chain, decrypt the token, check both commitments."""
        secret = self.ledger.read_preimage(pkg.htlc_id)
        if secret is None:
            raise LedgerError("HTLC not claimed; no preimage on chain")
        self.check_commitments(pkg)
        token = SignedToken.from_bytes(crypto.decrypt(secret, pkg.e_s_token, TOKEN_AAD))
        recomputed = commitment1(token)
        if recomputed != pkg.commit1:
            raise CommitMismatch("commit1", pkg.commit1, recomputed)
        self.token, self.pop_key = token, pkg.pop_key
        self.transcript.emit("disclosure", model=1, role="client", session_id=pkg.session_id,
                             htlc_id=pkg.htlc_id, token=token.to_bytes(), pop_key=pkg.pop_key,
                             e_thing_pop=pkg.e_thing_pop.to_bytes(), e_s_token=pkg.e_s_token.to_bytes(),
                             hash_lock=pkg.hash_lock)
        return token, pkg.pop_key

    def refund(self, pkg: GrantPackage) -> bytes:
        self._refund_tx = self.ledger.htlc_refund(self.address, pkg.htlc_id)
        return self._refund_tx

    def _abort(self, exc: Exception) -> None:
        self.error = exc
        self.phase = Phase.ABORTED
        self.transcript.emit("error", role="client", error=type(exc).__name__, detail=str(exc))

    def step(self, server: AuthorizationServer) -> None:
        if self.phase is None:
            try:
                self.request(server)
            except UnknownScope as exc:
                self._abort(exc)
            return
        if self.phase in TERMINAL:
            return
        pkg = self.package
        try:
            htlc = self.ledger.htlc(pkg.htlc_id)
        except UnknownHtlc:
            return
        tip = self.ledger.height
        if self.phase is Phase.REQUESTED:
            try:
                self.check_commitments(pkg)
                if htlc.payer != self.address or htlc.amount != pkg.price or htlc.hash_lock != pkg.hash_lock:
                    raise CommitMismatch("htlc", pkg.hash_lock, htlc.hash_lock)
                if tip + 2 >= htlc.timeout_height:
                    raise LedgerError("too close to the HTLC timeout to deposit safely")
                self.deposit(pkg)
            except (CommitMismatch, PriceRejected, InsufficientFunds, LedgerError) as exc:
                self._abort(exc)
                return
            self.phase = Phase.COMMITTED
            return
        if self._deposit_tx is not None and self.phase is Phase.COMMITTED:
            receipt = self.ledger.receipt(self._deposit_tx)
            if receipt is None:
                return
            if not receipt.ok:
                self._abort(LedgerError(f"deposit reverted: {receipt.error}"))
                return
            self.phase = Phase.DEPOSITED
        if htlc.state is HtlcState.CLAIMED:
            self.phase = Phase.REVEALED
            try:
                self.finalize(pkg)
            except (CommitMismatch, AuthFailure, LedgerError) as exc:
                self.error = exc
                self.transcript.emit("error", role="client", error=type(exc).__name__, detail=str(exc))
            self.phase = Phase.COMPLETED
        elif htlc.state is HtlcState.REFUNDED:
            self.phase = Phase.REFUNDED
        elif htlc.state is HtlcState.DEPOSITED and tip + 1 >= htlc.timeout_height:
            if self._refund_tx is not None:
                receipt = self.ledger.receipt(self._refund_tx)
                if receipt is None:
                    return
                self._refund_tx = None
            self.refund(pkg)

    @property
    def done(self) -> bool:
        return self.phase in TERMINAL

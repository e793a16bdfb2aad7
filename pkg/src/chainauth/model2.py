"""Contract-mediated flow: the client and the AS never talk directly.

    T1  client -> contract  request_access, deposit escrowed
    T2  AS -> contract      post_grant: E_Thing(PoP), E_PKclient(PoP), E_s(token), h
    T3  client -> contract  acknowledge h, which arms the hash-lock
    T4  AS -> contract      reveal_secret(s); owner paid, s public

The AS learns of requests by scanning each new block once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import contract as authz
from . import crypto
from .contract import GrantArtifacts, RequestState
from .crypto import Ciphertext, KeyPair, Rng
from .errors import AuthFailure, EncodingError, LedgerError, UnknownRequest
from .ledger import Ledger
from .thing import pop_aad
from .tokens import Claims, SignedToken, issue_token
from .transcript import Transcript

TOKEN_WRAP_AAD = b"chainauth/model2/token-wrap"
MAX_REVEALS = 2


def client_pop_aad(request_id: bytes) -> bytes:
    return b"chainauth/model2/e_client_pop/" + request_id


@dataclass(frozen=True)
class Misbehaviour:
    withhold_secret: bool = False
    tamper_package: bool = False
    wrong_preimage: bool = False
    wrong_audience: bool = False


@dataclass
class WatcherState:
    last_scanned: int = 0
    pending: list = field(default_factory=list)


@dataclass
class Served:
    request_id: bytes
    secret: bytes
    token: SignedToken
    pop_key: bytes
    reveal_tx: bytes | None = None
    attempts: int = 0
    done: bool = False


class AuthorizationServer:
    def __init__(self, keypair: KeyPair, k_thing_as: bytes, ledger: Ledger, contract: bytes, rng: Rng, *,
                 issuer: str, thing_id: str, token_lifetime: int = 100, token_pk_wrap: bool = False,
                 misbehaviour: Misbehaviour = Misbehaviour(), transcript: Transcript | None = None):
        self.keypair = keypair
        self.address = keypair.address
        self._k_thing_as = k_thing_as
        self.ledger = ledger
        self.contract = contract
        self._rng = rng
        self.issuer = issuer
        self.thing_id = thing_id
        self.token_lifetime = token_lifetime
        self.token_pk_wrap = token_pk_wrap
        self.misbehaviour = misbehaviour
        self.transcript = transcript or Transcript()
        self.watcher = WatcherState(last_scanned=ledger.height)
        self.served: dict[bytes, Served] = {}

    def scan(self) -> list[bytes]:
        """Collect request ids from blocks not yet scanned; idempotent."""
        found = []
        for block in self.ledger.blocks[self.watcher.last_scanned + 1:]:
            for txid in block.txids:
                tx, receipt = self.ledger.tx(txid), self.ledger.receipt(txid)
                if (tx.kind == "ContractCall" and tx.to == self.contract and receipt.ok
                        and tx.payload["method"] == "request_access"):
                    rid = receipt.outputs["request_id"]
                    if rid not in self.watcher.pending and rid not in self.served:
                        self.watcher.pending.append(rid)
                        found.append(rid)
                        self.transcript.emit("contract_event", name="Requested", request_id=rid,
                                             height=block.height)
            self.watcher.last_scanned = block.height
        return found

    def serve(self, request_id: bytes) -> bytes:
        """T2: mint PoP and s, issue the token and post the encrypted artifacts."""
        req = self.ledger.contract(self.contract).read_request(request_id)
        rng = self._rng
        pop_key, secret = rng.key(), rng.secret()
        now = self.ledger.height
        audience = self.thing_id if not self.misbehaviour.wrong_audience else self.thing_id + "-other"
        token = issue_token(Claims(self.issuer, audience, frozenset({req.scope}), now,
                                   now + self.token_lifetime, request_id[:16]),
                            pop_key, self._k_thing_as)
        inner = token.to_bytes()
        if self.token_pk_wrap:
            inner = crypto.pk_encrypt(req.client_pub, inner, rng, TOKEN_WRAP_AAD).to_bytes()
        e_s_token = crypto.encrypt(secret, inner, authz.token_aad(request_id), rng)
        if self.misbehaviour.tamper_package:
            body = bytearray(e_s_token.body)
            body[0] ^= 0x01
            e_s_token = Ciphertext(e_s_token.nonce, bytes(body), e_s_token.tag)
        artifacts = GrantArtifacts(
            e_thing_pop=crypto.encrypt(self._k_thing_as, pop_key, pop_aad(self.thing_id), rng),
            e_client_pop=crypto.pk_encrypt(req.client_pub, pop_key, rng, client_pop_aad(request_id)),
            e_s_token=e_s_token,
            hash_lock=crypto.digest(secret))
        self.served[request_id] = Served(request_id, secret, token, pop_key)
        return authz.post_grant(self.ledger, self.contract, self.address, request_id, artifacts)

    def reveal(self, request_id: bytes) -> bytes:
        """T4."""
        s = self.served[request_id]
        preimage = s.secret
        if self.misbehaviour.wrong_preimage and s.attempts == 0:
            preimage = self._rng.secret()
        s.attempts += 1
        s.reveal_tx = authz.reveal_secret(self.ledger, self.contract, self.address, request_id, preimage)
        return s.reveal_tx

    def step(self) -> None:
        self.scan()
        c = self.ledger.contract(self.contract)
        tip = self.ledger.height
        for rid in list(self.watcher.pending):
            req = c.read_request(rid)
            self.watcher.pending.remove(rid)
            if req.state is RequestState.REQUESTED and tip + 1 < req.timeout_height:
                self.serve(rid)
        for s in self.served.values():
            if s.done:
                continue
            req = c.read_request(s.request_id)
            if req.state in (RequestState.CLAIMED, RequestState.REFUNDED):
                s.done = True
                continue
            if s.reveal_tx is not None:
                receipt = self.ledger.receipt(s.reveal_tx)
                if receipt is None:
                    continue
                s.reveal_tx = None
                if not receipt.ok:
                    self.transcript.emit("error", role="as", error=receipt.error, detail=receipt.detail)
            if tip + 1 >= req.timeout_height:
                continue
            if req.acknowledged and not self.misbehaviour.withhold_secret and s.attempts < MAX_REVEALS:
                self.reveal(s.request_id)

    @property
    def done(self) -> bool:
        return not self.watcher.pending and all(s.done for s in self.served.values())


class Phase(enum.Enum):
    SUBMITTED = "Submitted"
    REQUESTED = "Requested"
    ACKNOWLEDGED = "Acknowledged"
    COMPLETED = "Completed"
    REFUNDED = "Refunded"
    REJECTED = "Rejected"


TERMINAL = {Phase.COMPLETED, Phase.REFUNDED, Phase.REJECTED}


class Client:
    def __init__(self, keypair: KeyPair, ledger: Ledger, contract: bytes, *, scope: str,
                 token_pk_wrap: bool = False, transcript: Transcript | None = None):
        self.keypair = keypair
        self.address = keypair.address
        self.ledger = ledger
        self.contract = contract
        self.scope = scope
        self.token_pk_wrap = token_pk_wrap
        self.transcript = transcript or Transcript()
        self.phase: Phase | None = None
        self.request_id: bytes | None = None
        self.token: SignedToken | None = None
        self.pop_key: bytes | None = None
        self.artifacts: GrantArtifacts | None = None
        self.error: Exception | None = None
        self._tx: dict[str, bytes] = {}
        self._grant_rejected = False

    def request(self, deposit: int | None = None) -> bytes:
        """T1; ``deposit`` defaults to the contract's posted price."""
        if deposit is None:
            deposit = self.ledger.contract(self.contract).price(self.scope)
        txid = self.ledger.call(self.address, self.contract, "request_access",
                                {"scope": self.scope, "client_pub": self.keypair.public}, value=deposit)
        self.request_id = authz.request_id_for(txid)
        self._tx["request"] = txid
        self.phase = Phase.SUBMITTED
        return self.request_id

    def validate(self, artifacts: GrantArtifacts) -> bytes:
        """Open our copy of the PoP key; raises AuthFailure if it is not for us."""
        if len(artifacts.hash_lock) != crypto.DIGEST_SIZE:
            raise AuthFailure("malformed hash-lock")
        return crypto.pk_decrypt(self.keypair, artifacts.e_client_pop, client_pop_aad(self.request_id))

    def acknowledge(self) -> bytes:
        """T3."""
        req = self.ledger.contract(self.contract).read_request(self.request_id)
        if req.artifacts is None:
            raise LedgerError("no grant posted yet")
        self.validate(req.artifacts)
        self.artifacts = req.artifacts
        self._tx["ack"] = authz.acknowledge(self.ledger, self.contract, self.address, self.request_id,
                                            req.artifacts.hash_lock)
        return self._tx["ack"]

    def finalize(self) -> tuple[SignedToken, bytes]:
        """Read s and the artifacts from the contract; recover token and PoP key."""
        req = self.ledger.contract(self.contract).read_request(self.request_id)
        if req.state is not RequestState.CLAIMED:
            raise LedgerError(f"request is {req.state.value}, not Claimed")
        released = crypto.decrypt(req.revealed_preimage, req.artifacts.e_s_token,
                                  authz.token_aad(self.request_id))
        inner, wrap = released, {}
        if self.token_pk_wrap:
            sealed = Ciphertext.from_bytes(released)
            key = crypto.pk_session_key(self.keypair, sealed)
            inner = crypto.pk_open(key, sealed, TOKEN_WRAP_AAD)
            # enough for an auditor to open this one wrap, not our private key
            wrap = {"released": released, "wrap_key": key}
        try:
            token = SignedToken.from_bytes(inner)
        except EncodingError as exc:
            raise AuthFailure(f"token does not parse: {exc}") from None
        pop_key = self.validate(req.artifacts)
        if crypto.digest(pop_key) != token.token.pop_binding:
            raise AuthFailure("PoP key does not match the token binding")
        self.token, self.pop_key, self.artifacts = token, pop_key, req.artifacts
        self.transcript.emit("disclosure", model=2, role="client", request_id=self.request_id,
                             token=token.to_bytes(), pop_key=pop_key, **req.artifacts.to_args(),
                             **wrap)
        return token, pop_key

    def refund(self) -> bytes:
        self._tx["refund"] = authz.refund(self.ledger, self.contract, self.address, self.request_id)
        return self._tx["refund"]

    def _fail(self, exc: Exception) -> None:
        self.error = exc
        self.transcript.emit("error", role="client", error=type(exc).__name__, detail=str(exc))

    def step(self) -> None:
        if self.phase is None:
            self.request()
            return
        if self.phase in TERMINAL:
            return
        if self.phase is Phase.SUBMITTED:
            receipt = self.ledger.receipt(self._tx["request"])
            if receipt is None:
                return
            if not receipt.ok:
                self._fail(receipt_error(receipt))
                self.phase = Phase.REJECTED
                return
            self.phase = Phase.REQUESTED
        try:
            req = self.ledger.contract(self.contract).read_request(self.request_id)
        except UnknownRequest:
            return
        tip = self.ledger.height
        if req.state is RequestState.CLAIMED:
            try:
                self.finalize()
            except (AuthFailure, LedgerError) as exc:
                self._fail(exc)
            self.phase = Phase.COMPLETED
            return
        if req.state is RequestState.REFUNDED:
            self.phase = Phase.REFUNDED
            return
        if tip + 1 >= req.timeout_height:
            pending = self._tx.get("refund")
            if pending is None or self.ledger.receipt(pending) is not None:
                self.refund()
            return
        if (self.phase is Phase.REQUESTED and req.state is RequestState.GRANTED
                and not self._grant_rejected and tip + 2 < req.timeout_height):
            try:
                self.acknowledge()
            except AuthFailure as exc:
                self._grant_rejected = True
                self._fail(exc)
                return
            self.phase = Phase.ACKNOWLEDGED

    @property
    def done(self) -> bool:
        return self.phase in TERMINAL


def receipt_error(receipt) -> Exception:
    try:
        receipt.raise_for_status()
    except Exception as exc:  # noqa: BLE001 - mapped from the receipt's error name
        return exc
    return LedgerError("no error")

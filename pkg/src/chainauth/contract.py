"""On-ledger authorization contract for the contract-mediated flow.

Per-request lifecycle::

    request_access (client, escrows deposit)      -> Requested
    post_grant     (AS, encrypted artifacts)      -> Granted
    acknowledge    (client, confirms hash-lock)   -> Granted + acknowledged
    reveal_secret  (AS, preimage)                 -> Claimed   (owner paid)
    refund         (client, height >= timeout)    -> Refunded  (from Requested or Granted)
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, replace

from . import crypto
from .crypto import Ciphertext
from .errors import (AuthFailure, BadPreimage, EventNotSatisfied, Expired, InvalidPayload,
                     InvalidPolicy, LockMismatch, NotAllowed, NotAuthorizedAS, NotClient, NotOwner,
                     NotYetExpired, UndecryptableGrant, UnknownRequest, UnknownScope, WrongPrice,
                     WrongState)
from .ledger import CallContext, Ledger, jsonable, register_contract, words

CONTRACT_TYPE = "authz"


def token_aad(request_id: bytes) -> bytes:
    return b"chainauth/model2/e_s_token/" + request_id


@dataclass(frozen=True)
class EventPredicate:
    topic: str
    required: bool = True


@dataclass(frozen=True)
class Policy:
    owner: bytes
    as_address: bytes
    prices: dict
    timeout_blocks: int
    allowlist: frozenset | None = None
    required_events: tuple = ()

    def __post_init__(self):
        if not self.prices:
            raise InvalidPolicy("policy needs at least one priced scope")
        if any(not isinstance(p, int) or isinstance(p, bool) or p < 0 for p in self.prices.values()):
            raise InvalidPolicy("prices must be non-negative integers")
        if not isinstance(self.timeout_blocks, int) or self.timeout_blocks < 1:
            raise InvalidPolicy("timeout_blocks must be >= 1")
        object.__setattr__(self, "prices", dict(sorted(self.prices.items())))
        if self.allowlist is not None:
            object.__setattr__(self, "allowlist", frozenset(self.allowlist))
        object.__setattr__(self, "required_events", tuple(self.required_events))

    def to_json(self) -> dict:
        return {"owner": self.owner, "as_address": self.as_address, "prices": dict(self.prices),
                "timeout_blocks": self.timeout_blocks,
                "allowlist": sorted(self.allowlist) if self.allowlist is not None else None,
                "required_events": [[e.topic, e.required] for e in self.required_events]}

    @classmethod
    def from_json(cls, d: dict) -> "Policy":
        try:
            return cls(d["owner"], d["as_address"], dict(d["prices"]), d["timeout_blocks"],
                       frozenset(d["allowlist"]) if d["allowlist"] is not None else None,
                       tuple(EventPredicate(t, r) for t, r in d["required_events"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidPolicy(f"malformed policy: {exc}") from None

    def storage_words(self) -> int:
        n = 3 + sum(words(len(s.encode())) + 1 for s in self.prices)
        n += len(self.allowlist or ())
        return n + sum(words(len(e.topic.encode())) + 1 for e in self.required_events)


@dataclass(frozen=True)
class GrantArtifacts:
    e_thing_pop: Ciphertext
    e_client_pop: Ciphertext
    e_s_token: Ciphertext
    hash_lock: bytes

    def to_args(self) -> dict:
        return {"e_thing_pop": self.e_thing_pop.to_bytes(), "e_client_pop": self.e_client_pop.to_bytes(),
                "e_s_token": self.e_s_token.to_bytes(), "hash_lock": self.hash_lock}

    @classmethod
    def from_args(cls, a: dict) -> "GrantArtifacts":
        try:
            return cls(Ciphertext.from_bytes(a["e_thing_pop"]), Ciphertext.from_bytes(a["e_client_pop"]),
                       Ciphertext.from_bytes(a["e_s_token"]), a["hash_lock"])
        except (KeyError, AuthFailure, ValueError, TypeError) as exc:
            raise InvalidPayload(f"malformed grant artifacts: {exc}") from None

    def storage_words(self) -> int:
        return sum(words(len(v)) for v in self.to_args().values())


class RequestState(enum.Enum):
    REQUESTED = "Requested"
    GRANTED = "Granted"
    CLAIMED = "Claimed"
    REFUNDED = "Refunded"


@dataclass
class AuthRequest:
    request_id: bytes
    client: bytes
    client_pub: bytes
    scope: str
    deposit: int
    created_height: int
    timeout_height: int
    state: RequestState = RequestState.REQUESTED
    artifacts: GrantArtifacts | None = None
    acknowledged: bool = False
    revealed_preimage: bytes | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["artifacts"] = self.artifacts.to_args() if self.artifacts else None
        return jsonable(d)


def request_id_for(txid: bytes) -> bytes:
    return crypto.digest(b"request/" + txid)


def _arg(args: dict, key: str, typ: type):
    value = args.get(key)
    if not isinstance(value, typ) or (typ is int and isinstance(value, bool)):
        raise InvalidPayload(f"argument {key!r} must be {typ.__name__}")
    return value


@register_contract(CONTRACT_TYPE)
class AuthzContract:
    def __init__(self, address: bytes, policy: Policy):
        self.address = address
        self.policy = policy
        self._requests: dict[bytes, AuthRequest] = {}

    @classmethod
    def deploy(cls, address: bytes, sender: bytes, init: dict, height: int):
        policy = Policy.from_json(init)
        if sender != policy.owner:
            raise InvalidPolicy("contract must be deployed by the policy owner")
        return cls(address, policy), policy.storage_words()

    # -- public reads

    def price(self, scope: str) -> int:
        try:
            return self.policy.prices[scope]
        except KeyError:
            raise UnknownScope(scope) from None

    def read_request(self, request_id: bytes) -> AuthRequest:
        try:
            return replace(self._requests[request_id])
        except KeyError:
            raise UnknownRequest(request_id.hex()) from None

    def requests(self) -> list[AuthRequest]:
        return [replace(r) for r in self._requests.values()]

    def export(self) -> dict:
        return jsonable({"policy": self.policy.to_json(),
                         "requests": {k.hex(): r.to_json() for k, r in sorted(self._requests.items())}})

    # -- dispatch

    def call(self, ctx: CallContext, method: str, args: dict, txid: bytes):
        handler = getattr(self, "_m_" + method, None)
        if handler is None:
            raise InvalidPayload(f"no contract method {method!r}")
        if method != "request_access" and ctx.value:
            raise InvalidPayload(f"{method} is not payable")
        return handler(ctx, args, txid)

    def _live(self, args: dict) -> AuthRequest:
        rid = _arg(args, "request_id", bytes)
        if rid not in self._requests:
            raise UnknownRequest(rid.hex())
        return self._requests[rid]

    def _m_update_policy(self, ctx, args, txid):
        if ctx.sender != self.policy.owner:
            raise NotOwner("only the owner may update the policy")
        policy = Policy.from_json(_arg(args, "policy", dict))
        if policy.owner != self.policy.owner:
            raise InvalidPolicy("ownership cannot change")
        self.policy = policy
        return 0

    def _m_request_access(self, ctx, args, txid):
        scope = _arg(args, "scope", str)
        client_pub = _arg(args, "client_pub", bytes)
        price = self.price(scope)
        if ctx.value != price:
            raise WrongPrice(f"deposit {ctx.value} != price {price} for {scope!r}")
        if crypto.address_of(client_pub) != ctx.sender:
            raise NotAllowed("client_pub does not belong to the sender")
        if self.policy.allowlist is not None and ctx.sender not in self.policy.allowlist:
            raise NotAllowed("client not on the allowlist")
        for pred in self.policy.required_events:
            if pred.required and not ctx.has_event(pred.topic):
                raise EventNotSatisfied(pred.topic)
        rid = request_id_for(txid)
        self._requests[rid] = AuthRequest(rid, ctx.sender, client_pub, scope, ctx.value, ctx.height,
                                          ctx.height + self.policy.timeout_blocks)
        # client, deposit, state, created, timeout, acknowledged; plus client_pub and scope
        return 6 + words(len(client_pub)) + words(len(scope.encode())), {"request_id": rid}

    def _m_post_grant(self, ctx, args, txid):
        req = self._live(args)
        if ctx.sender != self.policy.as_address:
            raise NotAuthorizedAS("only the policy's AS may post grants")
        if req.state is not RequestState.REQUESTED:
            raise WrongState(f"request is {req.state.value}")
        if ctx.height >= req.timeout_height:
            raise Expired(f"height {ctx.height} >= timeout {req.timeout_height}")
        artifacts = GrantArtifacts.from_args(args)
        if len(artifacts.hash_lock) != crypto.DIGEST_SIZE:
            raise InvalidPayload("hash_lock must be 32 bytes")
        req.artifacts = artifacts
        req.state = RequestState.GRANTED
        return artifacts.storage_words()

    def _m_acknowledge(self, ctx, args, txid):
        req = self._live(args)
        if ctx.sender != req.client:
            raise NotClient("only the requesting client may acknowledge")
        if req.state is not RequestState.GRANTED or req.acknowledged:
            raise WrongState(f"request is {req.state.value}, acknowledged={req.acknowledged}")
        if ctx.height >= req.timeout_height:
            raise Expired(f"height {ctx.height} >= timeout {req.timeout_height}")
        if _arg(args, "hash_lock", bytes) != req.artifacts.hash_lock:
            raise LockMismatch("acknowledged hash-lock differs from the posted one")
        req.acknowledged = True
        return 0

    def _m_reveal_secret(self, ctx, args, txid):
        req = self._live(args)
        if ctx.sender != self.policy.as_address:
            raise NotAuthorizedAS("only the policy's AS may reveal")
        if req.state is not RequestState.GRANTED or not req.acknowledged:
            raise WrongState(f"request is {req.state.value}, acknowledged={req.acknowledged}")
        if ctx.height >= req.timeout_height:
            raise Expired(f"height {ctx.height} >= timeout {req.timeout_height}")
        preimage = _arg(args, "preimage", bytes)
        if crypto.digest(preimage) != req.artifacts.hash_lock:
            raise BadPreimage("hash(preimage) != hash_lock")
        try:
            crypto.decrypt(preimage, req.artifacts.e_s_token, token_aad(req.request_id))
        except AuthFailure:
            raise UndecryptableGrant("preimage does not open e_s_token") from None
        req.state = RequestState.CLAIMED
        req.revealed_preimage = preimage
        ctx.pay(self.policy.owner, req.deposit)
        return 1

    def _m_refund(self, ctx, args, txid):
        req = self._live(args)
        if ctx.sender != req.client:
            raise NotClient("only the requesting client may refund")
        if req.state not in (RequestState.REQUESTED, RequestState.GRANTED):
            raise WrongState(f"request is {req.state.value}")
        if ctx.height < req.timeout_height:
            raise NotYetExpired(f"height {ctx.height} < timeout {req.timeout_height}")
        req.state = RequestState.REFUNDED
        ctx.pay(req.client, req.deposit)
        return 0


# -- thin client-side wrappers that queue ledger transactions ---------------

def deploy(ledger: Ledger, policy: Policy) -> tuple[bytes, bytes]:
    """Queue deployment by the policy owner; returns ``(txid, contract_address)``."""
    return ledger.deploy(policy.owner, CONTRACT_TYPE, policy.to_json())


def request_access(ledger: Ledger, contract: bytes, client: bytes, client_pub: bytes,
                   scope: str, deposit: int) -> bytes:
    """Queue T1; returns the request id (known before mining)."""
    txid = ledger.call(client, contract, "request_access",
                       {"scope": scope, "client_pub": client_pub}, value=deposit)
    return request_id_for(txid)


def post_grant(ledger: Ledger, contract: bytes, sender: bytes, request_id: bytes,
               artifacts: GrantArtifacts) -> bytes:
    return ledger.call(sender, contract, "post_grant", {"request_id": request_id, **artifacts.to_args()})


def acknowledge(ledger: Ledger, contract: bytes, client: bytes, request_id: bytes,
                hash_lock: bytes) -> bytes:
    return ledger.call(client, contract, "acknowledge", {"request_id": request_id, "hash_lock": hash_lock})


def reveal_secret(ledger: Ledger, contract: bytes, sender: bytes, request_id: bytes,
                  preimage: bytes) -> bytes:
    return ledger.call(sender, contract, "reveal_secret", {"request_id": request_id, "preimage": preimage})


def refund(ledger: Ledger, contract: bytes, client: bytes, request_id: bytes) -> bytes:
    return ledger.call(client, contract, "refund", {"request_id": request_id})


def update_policy(ledger: Ledger, contract: bytes, sender: bytes, policy: Policy) -> bytes:
    return ledger.call(sender, contract, "update_policy", {"policy": policy.to_json()})

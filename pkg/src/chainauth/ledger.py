"""Deterministic single-node chain: balances, hash records, HTLC escrow, gas, contracts.

Transactions are validated lightly at :meth:`Ledger.submit` (payload shape,
sender balance) and executed when mined. Execution failures do not raise:
the transaction is still included, its state changes are rolled back, and
its receipt carries ``status="reverted"`` plus the error class name. Call
:meth:`Receipt.raise_for_status` to turn that back into an exception.

A transaction executes at the height of the block that includes it, so
right after mining block ``h`` the next submission runs at ``h + 1``.
"""

from __future__ import annotations

import copy
import enum
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Iterable, Iterator

from . import crypto
from .errors import (BadPreimage, Expired, InsufficientFunds, InvalidPayload, InvalidTimeout,
                     LedgerError, NotPayer, NotYetExpired, ParseError, UnknownContract,
                     UnknownHtlc, WrongState, error_class)

TX_KINDS = ("Transfer", "RecordHash", "HtlcCreate", "HtlcDeposit", "HtlcClaim", "HtlcRefund",
            "ContractDeploy", "ContractCall")
SELECTOR_SIZE = 4
ZERO_DIGEST = bytes(32)
DUMP_VERSION = 1


# -- encoding helpers -------------------------------------------------------

def jsonable(obj: Any) -> Any:
    if isinstance(obj, (bytes, bytearray)):
        return {"hex": bytes(obj).hex()}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def from_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        if set(obj) == {"hex"}:
            return bytes.fromhex(obj["hex"])
        return {k: from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> bytes:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":")).encode()


def calldata_size(obj: Any) -> int:
    """Raw byte count of a payload: bytes/str by length, ints as 32-byte words."""
    if isinstance(obj, (bytes, bytearray)):
        return len(obj)
    if isinstance(obj, str):
        return len(obj.encode())
    if isinstance(obj, bool):
        return 1
    if isinstance(obj, int):
        return 32
    if obj is None:
        return 0
    if isinstance(obj, dict):
        return sum(calldata_size(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return sum(calldata_size(v) for v in obj)
    raise InvalidPayload(f"unsupported payload value {type(obj).__name__}")


def words(n_bytes: int) -> int:
    return math.ceil(n_bytes / 32)


# -- records -----------------------------------------------------------------

@dataclass(frozen=True)
class GasTable:
    base: int = 21000
    per_byte: int = 16
    per_word: int = 20000


@dataclass(frozen=True)
class LedgerConfig:
    txs_per_block: int = 1
    gas: GasTable = field(default_factory=GasTable)
    charge_gas: bool = False
    gas_price: int = 1

    def __post_init__(self):
        if self.txs_per_block < 1:
            raise ValueError("txs_per_block must be >= 1")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "LedgerConfig":
        return cls(txs_per_block=d["txs_per_block"], gas=GasTable(**d["gas"]),
                   charge_gas=d["charge_gas"], gas_price=d["gas_price"])


@dataclass(frozen=True)
class LedgerTx:
    sender: bytes
    kind: str
    payload: dict = field(default_factory=dict)
    value: int = 0
    to: bytes | None = None
    nonce: int = -1

    def encode(self) -> bytes:
        return canonical_json({"sender": self.sender, "kind": self.kind, "payload": self.payload,
                               "value": self.value, "to": self.to, "nonce": self.nonce})

    @property
    def txid(self) -> bytes:
        return crypto.digest(self.encode())

    def payload_bytes(self) -> int:
        if self.kind == "ContractCall":
            return SELECTOR_SIZE + calldata_size(self.payload.get("args", {}))
        return calldata_size(self.payload)


@dataclass(frozen=True)
class GasReceipt:
    txid: bytes
    sender: bytes
    gas_used: int
    base: int
    payload_bytes: int
    payload_cost: int
    storage_words: int
    storage_cost: int


def meter(tx: LedgerTx, storage_words: int, table: GasTable) -> GasReceipt:
    n = tx.payload_bytes()
    payload_cost = n * table.per_byte
    storage_cost = storage_words * table.per_word
    return GasReceipt(tx.txid, tx.sender, table.base + payload_cost + storage_cost,
                      table.base, n, payload_cost, storage_words, storage_cost)


@dataclass(frozen=True)
class Receipt:
    txid: bytes
    kind: str
    height: int
    index: int
    status: str
    error: str | None
    detail: str | None
    gas: GasReceipt
    outputs: dict

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def raise_for_status(self) -> None:
        if not self.ok:
            raise error_class(self.error)(self.detail or self.error)

    def to_json(self) -> dict:
        return jsonable({"status": self.status, "error": self.error, "detail": self.detail,
                         "gas": asdict(self.gas), "outputs": self.outputs,
                         "height": self.height, "index": self.index, "kind": self.kind})


@dataclass(frozen=True)
class Block:
    height: int
    prev: bytes
    txids: tuple[bytes, ...]
    block_hash: bytes


class HtlcState(enum.Enum):
    CREATED = "Created"
    DEPOSITED = "Deposited"
    CLAIMED = "Claimed"
    REFUNDED = "Refunded"


@dataclass
class Htlc:
    id: bytes
    payer: bytes
    payee: bytes
    amount: int
    hash_lock: bytes
    timeout_height: int
    created_height: int
    state: HtlcState = HtlcState.CREATED
    revealed_preimage: bytes | None = None

    def to_json(self) -> dict:
        return jsonable(asdict(self))


HTLC_WORDS = 6  # payer, payee, amount, hash_lock, timeout, state


@dataclass(frozen=True)
class HashRecord:
    submitter: bytes
    value: bytes
    height: int
    topic: str | None = None


# -- contracts ---------------------------------------------------------------

CONTRACT_TYPES: dict[str, Any] = {}


def register_contract(name: str) -> Callable[[type], type]:
    """Class decorator making a contract type deployable by name.

    The class must provide ``deploy(address, sender, init, height) -> (instance, words)``,
    ``call(ctx, method, args, txid) -> words | (words, outputs)`` and ``export() -> dict``.
    """
    def wrap(cls):
        CONTRACT_TYPES[name] = cls
        cls.contract_type = name
        return cls
    return wrap


class CallContext:
    """What a contract sees while one of its methods executes."""

    def __init__(self, ledger: "Ledger", address: bytes, sender: bytes, value: int, height: int):
        self._ledger = ledger
        self.address = address
        self.sender = sender
        self.value = value
        self.height = height

    def pay(self, to: bytes, amount: int) -> None:
        held = self._ledger._contract_balances[self.address]
        if amount > held:
            raise InsufficientFunds("contract balance too low")
        self._ledger._contract_balances[self.address] = held - amount
        self._ledger._credit(to, amount)

    def has_event(self, topic: str) -> bool:
        return self._ledger.has_event(topic, self.height)


# -- the ledger --------------------------------------------------------------

class Ledger:
    def __init__(self, genesis: dict[bytes, int], config: LedgerConfig | None = None):
        self.config = config or LedgerConfig()
        if any(v < 0 for v in genesis.values()):
            raise ValueError("negative genesis balance")
        self.genesis = dict(sorted(genesis.items()))
        self._balances: dict[bytes, int] = dict(self.genesis)
        self._htlcs: dict[bytes, Htlc] = {}
        self._records: list[HashRecord] = []
        self._contracts: dict[bytes, Any] = {}
        self._contract_balances: dict[bytes, int] = {}
        self._burned = 0
        self._nonces: dict[bytes, int] = {}
        self._pending: deque[LedgerTx] = deque()
        self._txs: dict[bytes, LedgerTx] = {}
        self._receipts: dict[bytes, Receipt] = {}
        self._listeners: list[Callable[..., None]] = []
        self.total_supply = sum(self.genesis.values())
        g = crypto.digest(canonical_json({"genesis": self.genesis, "config": self.config.to_json()}))
        self.blocks: list[Block] = [Block(0, ZERO_DIGEST, (), self._block_hash(ZERO_DIGEST, 0, [], g))]

    # -- observation

    def subscribe(self, fn: Callable[..., None]) -> None:
        """``fn("submit", tx)`` and ``fn("block", block, receipts)`` on every event."""
        self._listeners.append(fn)

    def _notify(self, *event) -> None:
        for fn in self._listeners:
            fn(*event)

    # -- read side

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    @property
    def pending(self) -> tuple[LedgerTx, ...]:
        return tuple(self._pending)

    def balance(self, addr: bytes) -> int:
        return self._balances.get(addr, 0)

    def balances(self) -> dict[bytes, int]:
        return dict(self._balances)

    def htlc(self, htlc_id: bytes) -> Htlc:
        try:
            return replace(self._htlcs[htlc_id])
        except KeyError:
            raise UnknownHtlc(htlc_id.hex()) from None

    def htlcs(self) -> list[Htlc]:
        return [replace(h) for h in self._htlcs.values()]

    def read_preimage(self, htlc_id: bytes) -> bytes | None:
        h = self.htlc(htlc_id)
        return h.revealed_preimage if h.state is HtlcState.CLAIMED else None

    def find_records(self, value: bytes) -> list[HashRecord]:
        return [r for r in self._records if r.value == value]

    def records(self) -> list[HashRecord]:
        return list(self._records)

    def has_event(self, topic: str, at_height: int | None = None) -> bool:
        limit = self.height if at_height is None else at_height
        return any(r.topic == topic and r.height <= limit for r in self._records)

    def contract(self, address: bytes):
        try:
            return self._contracts[address]
        except KeyError:
            raise UnknownContract(address.hex()) from None

    def contract_balance(self, address: bytes) -> int:
        return self._contract_balances.get(address, 0)

    def receipt(self, txid: bytes) -> Receipt | None:
        return self._receipts.get(txid)

    def tx(self, txid: bytes) -> LedgerTx:
        return self._txs[txid]

    def mined_txs(self) -> Iterator[tuple[LedgerTx, Receipt]]:
        for b in self.blocks:
            for txid in b.txids:
                yield self._txs[txid], self._receipts[txid]

    def escrowed(self) -> int:
        in_htlcs = sum(h.amount for h in self._htlcs.values() if h.state is HtlcState.DEPOSITED)
        return in_htlcs + sum(self._contract_balances.values())

    @property
    def burned(self) -> int:
        return self._burned

    def conservation_holds(self) -> bool:
        return sum(self._balances.values()) + self.escrowed() + self._burned == self.total_supply

    def verify_chain(self) -> bool:
        prev = ZERO_DIGEST
        for i, b in enumerate(self.blocks):
            if b.height != i or b.prev != prev:
                return False
            if i > 0:
                receipts = [self._receipts[t] for t in b.txids]
                if b.block_hash != self._block_hash(prev, i, receipts):
                    return False
                if any(self._txs[t].txid != t for t in b.txids):
                    return False
            prev = b.block_hash
        return True

    # -- submission

    def submit(self, tx: LedgerTx) -> bytes:
        if tx.kind not in TX_KINDS:
            raise InvalidPayload(f"unknown tx kind {tx.kind!r}")
        if not isinstance(tx.value, int) or tx.value < 0:
            raise InvalidPayload("value must be a non-negative integer")
        if tx.value and tx.kind not in ("Transfer", "HtlcDeposit", "ContractCall"):
            raise InvalidPayload(f"{tx.kind} carries no value")
        _validate_payload(tx)
        calldata_size(tx.payload)
        if tx.kind == "ContractCall" and tx.to not in self._contracts:
            raise UnknownContract((tx.to or b"").hex())
        if self.balance(tx.sender) < tx.value:
            raise InsufficientFunds(f"balance {self.balance(tx.sender)} < {tx.value}")
        nonce = self._nonces.get(tx.sender, 0)
        self._nonces[tx.sender] = nonce + 1
        tx = replace(tx, nonce=nonce)
        self._pending.append(tx)
        self._txs[tx.txid] = tx
        self._notify("submit", tx)
        return tx.txid

    def transfer(self, sender: bytes, to: bytes, amount: int) -> bytes:
        return self.submit(LedgerTx(sender, "Transfer", {}, value=amount, to=to))

    def record_hash(self, sender: bytes, value: bytes, topic: str | None = None) -> bytes:
        payload: dict = {"value": value}
        if topic is not None:
            payload["topic"] = topic
        return self.submit(LedgerTx(sender, "RecordHash", payload))

    def htlc_create(self, sender: bytes, payee: bytes, amount: int, hash_lock: bytes,
                    timeout_height: int, *, payer: bytes | None = None,
                    records: Iterable[bytes] = ()) -> bytes:
        """Queue an HTLC creation; returns the HTLC id (known before mining).

        ``records`` are extra digests committed in the same transaction.
        """
        payload = {"payer": payer or sender, "payee": payee, "amount": amount,
                   "hash_lock": hash_lock, "timeout_height": timeout_height,
                   "records": list(records)}
        txid = self.submit(LedgerTx(sender, "HtlcCreate", payload))
        return htlc_id_for(txid)

    def htlc_deposit(self, sender: bytes, htlc_id: bytes) -> bytes:
        h = self.htlc(htlc_id)
        return self.submit(LedgerTx(sender, "HtlcDeposit", {"id": htlc_id}, value=h.amount))

    def htlc_claim(self, sender: bytes, htlc_id: bytes, preimage: bytes) -> bytes:
        return self.submit(LedgerTx(sender, "HtlcClaim", {"id": htlc_id, "preimage": preimage}))

    def htlc_refund(self, sender: bytes, htlc_id: bytes) -> bytes:
        return self.submit(LedgerTx(sender, "HtlcRefund", {"id": htlc_id}))

    def deploy(self, sender: bytes, contract_type: str, init: dict) -> tuple[bytes, bytes]:
        """Queue a contract deployment; returns ``(txid, contract_address)``."""
        txid = self.submit(LedgerTx(sender, "ContractDeploy", {"type": contract_type, "init": init}))
        return txid, contract_address_for(txid)

    def call(self, sender: bytes, to: bytes, method: str, args: dict, value: int = 0) -> bytes:
        return self.submit(LedgerTx(sender, "ContractCall", {"method": method, "args": args},
                                    value=value, to=to))

    # -- mining

    def mine_block(self) -> Block:
        batch = [self._pending.popleft()
                 for _ in range(min(self.config.txs_per_block, len(self._pending)))]
        return self._mine(batch)

    def _mine(self, batch: list[LedgerTx]) -> Block:
        height = self.height + 1
        receipts = [self._execute(tx, height, i) for i, tx in enumerate(batch)]
        prev = self.blocks[-1].block_hash
        block = Block(height, prev, tuple(tx.txid for tx in batch),
                      self._block_hash(prev, height, receipts))
        self.blocks.append(block)
        for r in receipts:
            self._receipts[r.txid] = r
        self._notify("block", block, receipts)
        return block

    @staticmethod
    def _block_hash(prev: bytes, height: int, receipts: list[Receipt], extra: bytes = b"") -> bytes:
        body = b"".join(r.txid + crypto.digest(canonical_json(r.to_json())) for r in receipts)
        return crypto.digest(prev + height.to_bytes(8, "big") + body + extra)

    def _state(self) -> tuple:
        return (self._balances, self._htlcs, self._records, self._contracts,
                self._contract_balances, self._burned)

    def _execute(self, tx: LedgerTx, height: int, index: int) -> Receipt:
        snapshot = copy.deepcopy(self._state())
        outputs: dict = {}
        try:
            if self.balance(tx.sender) < tx.value:
                raise InsufficientFunds(f"balance {self.balance(tx.sender)} < {tx.value}")
            if tx.value:
                self._balances[tx.sender] -= tx.value
            new_words = getattr(self, "_exec_" + tx.kind)(tx, height, outputs)
            status, error, detail = "ok", None, None
        except LedgerError as exc:
            (self._balances, self._htlcs, self._records, self._contracts,
             self._contract_balances, self._burned) = snapshot
            new_words, outputs = 0, {}
            status, error, detail = "reverted", type(exc).__name__, str(exc) or None
        gas = meter(tx, new_words, self.config.gas)
        if self.config.charge_gas:
            fee = min(gas.gas_used * self.config.gas_price, self.balance(tx.sender))
            self._balances[tx.sender] = self.balance(tx.sender) - fee
            self._burned += fee
        return Receipt(tx.txid, tx.kind, height, index, status, error, detail, gas, outputs)

    def _credit(self, addr: bytes, amount: int) -> None:
        self._balances[addr] = self._balances.get(addr, 0) + amount

    def _exec_Transfer(self, tx, height, outputs) -> int:
        self._credit(tx.to, tx.value)
        return 0

    def _exec_RecordHash(self, tx, height, outputs) -> int:
        topic = tx.payload.get("topic")
        self._records.append(HashRecord(tx.sender, tx.payload["value"], height, topic))
        return 1 + (words(len(topic.encode())) if topic else 0)

    def _exec_HtlcCreate(self, tx, height, outputs) -> int:
        p = tx.payload
        if p["timeout_height"] <= height:
            raise InvalidTimeout(f"timeout {p['timeout_height']} <= height {height}")
        hid = htlc_id_for(tx.txid)
        self._htlcs[hid] = Htlc(hid, p["payer"], p["payee"], p["amount"], p["hash_lock"],
                                p["timeout_height"], height)
        for value in p["records"]:
            self._records.append(HashRecord(tx.sender, value, height))
        outputs["htlc_id"] = hid
        return HTLC_WORDS + len(p["records"])

    def _live_htlc(self, hid: bytes) -> Htlc:
        if hid not in self._htlcs:
            raise UnknownHtlc(hid.hex())
        return self._htlcs[hid]

    def _exec_HtlcDeposit(self, tx, height, outputs) -> int:
        h = self._live_htlc(tx.payload["id"])
        if tx.sender != h.payer:
            raise NotPayer("only the payer may deposit")
        if h.state is not HtlcState.CREATED:
            raise WrongState(f"HTLC is {h.state.value}")
        if tx.value != h.amount:
            raise InsufficientFunds(f"deposit {tx.value} != amount {h.amount}")
        h.state = HtlcState.DEPOSITED
        return 0

    def _exec_HtlcClaim(self, tx, height, outputs) -> int:
        h = self._live_htlc(tx.payload["id"])
        if h.state is not HtlcState.DEPOSITED:
            raise WrongState(f"HTLC is {h.state.value}")
        if height >= h.timeout_height:
            raise Expired(f"height {height} >= timeout {h.timeout_height}")
        preimage = tx.payload["preimage"]
        if crypto.digest(preimage) != h.hash_lock:
            raise BadPreimage("hash(preimage) != hash_lock")
        h.state = HtlcState.CLAIMED
        h.revealed_preimage = preimage
        self._credit(h.payee, h.amount)
        return 1

    def _exec_HtlcRefund(self, tx, height, outputs) -> int:
        h = self._live_htlc(tx.payload["id"])
        if h.state is not HtlcState.DEPOSITED:
            raise WrongState(f"HTLC is {h.state.value}")
        if tx.sender != h.payer:
            raise NotPayer("only the payer may refund")
        if height < h.timeout_height:
            raise NotYetExpired(f"height {height} < timeout {h.timeout_height}")
        h.state = HtlcState.REFUNDED
        self._credit(h.payer, h.amount)
        return 0

    def _exec_ContractDeploy(self, tx, height, outputs) -> int:
        cls = CONTRACT_TYPES[tx.payload["type"]]
        address = contract_address_for(tx.txid)
        instance, new_words = cls.deploy(address, tx.sender, tx.payload["init"], height)
        self._contracts[address] = instance
        self._contract_balances[address] = 0
        outputs["address"] = address
        return new_words

    def _exec_ContractCall(self, tx, height, outputs) -> int:
        contract = self._contracts.get(tx.to)
        if contract is None:
            raise UnknownContract(tx.to.hex())
        self._contract_balances[tx.to] += tx.value
        ctx = CallContext(self, tx.to, tx.sender, tx.value, height)
        result = contract.call(ctx, tx.payload["method"], tx.payload["args"], tx.txid)
        new_words, extra = result if isinstance(result, tuple) else (result, {})
        outputs.update(extra)
        return new_words

    # -- export / import

    def state_json(self) -> dict:
        return jsonable({
            "height": self.height,
            "balances": {k.hex(): v for k, v in sorted(self._balances.items())},
            "htlcs": {k.hex(): h.to_json() for k, h in sorted(self._htlcs.items())},
            "records": [asdict(r) for r in self._records],
            "contracts": {k.hex(): {"type": c.contract_type, "balance": self._contract_balances[k],
                                    "state": c.export()}
                          for k, c in sorted(self._contracts.items())},
            "burned": self._burned,
        })

    def dump_lines(self) -> list[str]:
        def line(obj):
            return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))

        out = [line({"record": "genesis", "version": DUMP_VERSION,
                     "balances": {k.hex(): v for k, v in self.genesis.items()},
                     "config": self.config.to_json()})]
        for b in self.blocks:
            out.append(line({"record": "block", "height": b.height, "prev": b.prev.hex(),
                             "block_hash": b.block_hash.hex(), "txids": [t.hex() for t in b.txids]}))
            for i, txid in enumerate(b.txids):
                tx, r = self._txs[txid], self._receipts[txid]
                out.append(line({"record": "tx", "height": b.height, "index": i, "txid": txid.hex(),
                                 "sender": tx.sender.hex(), "kind": tx.kind,
                                 "to": tx.to.hex() if tx.to else None, "value": tx.value,
                                 "nonce": tx.nonce, "payload": tx.payload,
                                 "receipt": r.to_json()}))
        out.append(line({"record": "state", **self.state_json()}))
        return out

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.dump_lines()) + "\n")

    @classmethod
    def load_lines(cls, lines: Iterable[str]) -> "Ledger":
        """Rebuild a ledger by replaying a dump; raises ParseError on any divergence."""
        try:
            rows = [json.loads(s) for s in lines if s.strip()]
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad chain dump: {exc}") from None
        if not rows or rows[0].get("record") != "genesis" or rows[0].get("version") != DUMP_VERSION:
            raise ParseError("chain dump must start with a version-1 genesis record")
        g = rows[0]
        ledger = cls({bytes.fromhex(k): v for k, v in g["balances"].items()},
                     LedgerConfig.from_json(g["config"]))
        blocks = [r for r in rows if r["record"] == "block"]
        txs: dict[int, list[dict]] = {}
        for r in rows:
            if r["record"] == "tx":
                txs.setdefault(r["height"], []).append(r)
        if not blocks or blocks[0]["block_hash"] != ledger.blocks[0].block_hash.hex():
            raise ParseError("genesis block mismatch")
        for b in blocks[1:]:
            batch = []
            for r in sorted(txs.get(b["height"], []), key=lambda r: r["index"]):
                tx = LedgerTx(bytes.fromhex(r["sender"]), r["kind"], from_jsonable(r["payload"]),
                              r["value"], bytes.fromhex(r["to"]) if r["to"] else None, r["nonce"])
                if tx.txid.hex() != r["txid"]:
                    raise ParseError(f"tx {r['txid']} does not match its contents")
                ledger._txs[tx.txid] = tx
                ledger._nonces[tx.sender] = tx.nonce + 1
                batch.append(tx)
            block = ledger._mine(batch)
            if block.block_hash.hex() != b["block_hash"]:
                raise ParseError(f"block {b['height']} hash mismatch on replay")
        states = [r for r in rows if r["record"] == "state"]
        if states:
            expected = {k: v for k, v in states[-1].items() if k != "record"}
            if expected != json.loads(json.dumps(ledger.state_json())):
                raise ParseError("replayed state differs from dumped state")
        return ledger

    @classmethod
    def load(cls, path) -> "Ledger":
        with open(path) as fh:
            return cls.load_lines(fh)


def htlc_id_for(txid: bytes) -> bytes:
    return crypto.digest(b"htlc/" + txid)


def contract_address_for(txid: bytes) -> bytes:
    return crypto.digest(b"contract/" + txid)[:crypto.ADDRESS_SIZE]


_SCHEMAS: dict[str, dict[str, type | tuple]] = {
    "Transfer": {},
    "RecordHash": {"value": bytes},
    "HtlcCreate": {"payer": bytes, "payee": bytes, "amount": int, "hash_lock": bytes,
                   "timeout_height": int, "records": list},
    "HtlcDeposit": {"id": bytes},
    "HtlcClaim": {"id": bytes, "preimage": bytes},
    "HtlcRefund": {"id": bytes},
    "ContractDeploy": {"type": str, "init": dict},
    "ContractCall": {"method": str, "args": dict},
}
_OPTIONAL = {"RecordHash": {"topic": str}}


def _validate_payload(tx: LedgerTx) -> None:
    p = tx.payload
    if not isinstance(p, dict):
        raise InvalidPayload("payload must be a mapping")
    schema, optional = _SCHEMAS[tx.kind], _OPTIONAL.get(tx.kind, {})
    if not set(schema) <= set(p) <= set(schema) | set(optional):
        raise InvalidPayload(f"{tx.kind} payload fields {sorted(p)} != {sorted(schema)}")
    for key, typ in {**schema, **optional}.items():
        if key in p and (not isinstance(p[key], typ) or (typ is int and isinstance(p[key], bool))):
            raise InvalidPayload(f"{tx.kind}.{key} must be {typ.__name__}")
    if tx.kind == "Transfer" and not isinstance(tx.to, bytes):
        raise InvalidPayload("Transfer needs a recipient")
    if tx.kind == "RecordHash" and len(p["value"]) != crypto.DIGEST_SIZE:
        raise InvalidPayload("record value must be a 32-byte digest")
    if tx.kind == "HtlcCreate":
        if p["amount"] < 0 or len(p["hash_lock"]) != crypto.DIGEST_SIZE:
            raise InvalidPayload("bad HTLC amount or hash_lock")
        if not all(isinstance(v, bytes) and len(v) == crypto.DIGEST_SIZE for v in p["records"]):
            raise InvalidPayload("committed records must be 32-byte digests")
    if tx.kind == "ContractDeploy" and p["type"] not in CONTRACT_TYPES:
        raise InvalidPayload(f"unknown contract type {p['type']!r}")

"""Newline-delimited JSON event log shared by all roles of one run.

Every event has ``seq`` and ``type``. Types:

``message``      off-chain message; ``channel`` is ``secure`` (client<->AS) or
                 ``insecure`` (client<->Thing); ``src``, ``dst``, ``kind``, ``body``
``tx``           a ledger submission (``txid``, ``sender``, ``kind``, ``to``,
                 ``value``, ``nonce``, ``payload``)
``block``        a mined block with its receipts
``setup``        end of one-time setup (height, contract address, config)
``contract_event`` request/grant state changes observed on the contract
``disclosure``   artifacts a client holds after finalizing, kept for audits
``access``       outcome of a Thing access attempt
``error``        a role-level failure (``role``, ``error``, ``detail``)
``outcome``      final classification of the run

Binary values are encoded as ``{"hex": "..."}``.
"""

from __future__ import annotations

import json
from typing import Any, Iterable

from .ledger import Ledger, from_jsonable, jsonable


class Transcript:
    def __init__(self, events: Iterable[dict] | None = None):
        self.events: list[dict] = list(events or [])

    def emit(self, type_: str, **fields: Any) -> dict:
        event = {"seq": len(self.events), "type": type_, **jsonable(fields)}
        self.events.append(event)
        return event

    def attach(self, ledger: Ledger) -> None:
        ledger.subscribe(self._on_ledger)

    def _on_ledger(self, what: str, *args) -> None:
        if what == "submit":
            (tx,) = args
            self.emit("tx", txid=tx.txid, sender=tx.sender, kind=tx.kind, to=tx.to, value=tx.value,
                      nonce=tx.nonce, payload=tx.payload)
        elif what == "block":
            block, receipts = args
            self.emit("block", height=block.height, block_hash=block.block_hash,
                      txids=list(block.txids), receipts=[r.to_json() for r in receipts])

    def of_type(self, type_: str) -> list[dict]:
        return [e for e in self.events if e["type"] == type_]

    def messages(self, channel: str | None = None) -> list[dict]:
        return [e for e in self.of_type("message") if channel is None or e["channel"] == channel]

    def decoded(self, event: dict) -> dict:
        return from_jsonable(event)

    def lines(self) -> list[str]:
        return [json.dumps(e, sort_keys=True, separators=(",", ":")) for e in self.events]

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.lines()) + "\n")

    @classmethod
    def load(cls, path) -> "Transcript":
        with open(path) as fh:
            return cls(json.loads(s) for s in fh if s.strip())

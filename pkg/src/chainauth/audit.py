"""Dispute resolution from a transcript and a chain dump.

Given what a client disclosed after finalizing (token, PoP key and the
ciphertexts it received), recompute every commitment and check that it is
on chain. The chain dump is read record by record, so a dump with a record
removed fails the lookup instead of being silently repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import contract as authz
from . import crypto
from .crypto import Ciphertext
from .errors import AuthFailure, EncodingError, ParseError
from .ledger import Ledger, from_jsonable
from .model2 import TOKEN_WRAP_AAD
from .tokens import SignedToken


@dataclass(frozen=True)
class AuditItem:
    name: str
    passed: bool
    reason: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.reason}" if self.reason else "")


@dataclass
class AuditReport:
    model: int | None
    items: list[AuditItem]

    @property
    def ok(self) -> bool:
        return bool(self.items) and all(i.passed for i in self.items)

    @property
    def failed(self) -> list[str]:
        return [i.name for i in self.items if not i.passed]

    def lines(self) -> list[str]:
        return [i.line() for i in self.items]


def _parse_lines(lines: list[str], what: str) -> list[dict]:
    rows = []
    for n, s in enumerate(lines, 1):
        if not s.strip():
            continue
        try:
            rows.append(json.loads(s))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{what} line {n}: {exc}") from None
    return rows


class ChainIndex:
    """What an auditor can look up in a dump without trusting its state record."""

    def __init__(self, lines: list[str]):
        rows = _parse_lines(lines, "chain dump")
        if not rows or rows[0].get("record") != "genesis":
            raise ParseError("chain dump must start with a genesis record")
        self.lines = lines
        self.records: set[bytes] = set()
        self.hash_locks: set[bytes] = set()
        self.grants: dict[bytes, dict] = {}
        self.reveals: dict[bytes, bytes] = {}
        for row in rows:
            if row.get("record") != "tx":
                continue
            row = from_jsonable(row)
            ok = row["receipt"]["status"] == "ok"
            p = row["payload"]
            if not ok:
                continue
            if row["kind"] == "RecordHash":
                self.records.add(p["value"])
            elif row["kind"] == "HtlcCreate":
                self.records.update(p["records"])
                self.hash_locks.add(p["hash_lock"])
            elif row["kind"] == "ContractCall" and p["method"] == "post_grant":
                self.grants[p["args"]["request_id"]] = p["args"]
            elif row["kind"] == "ContractCall" and p["method"] == "reveal_secret":
                self.reveals[p["args"]["request_id"]] = p["args"]["preimage"]

    def replays(self) -> AuditItem:
        try:
            Ledger.load_lines(self.lines)
        except ParseError as exc:
            return AuditItem("chain_replay", False, str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            return AuditItem("chain_replay", False, f"malformed record: {exc}")
        return AuditItem("chain_replay", True)


def _audit_model1(d: dict, chain: ChainIndex) -> list[AuditItem]:
    items = []
    token_bytes = d["token"]
    c1 = crypto.digest(token_bytes)
    items.append(AuditItem("commit1", c1 in chain.records,
                           "" if c1 in chain.records else "missing record for H(token)"))
    c2 = crypto.digest(d["e_thing_pop"] + d["pop_key"] + d["e_s_token"])
    items.append(AuditItem("commit2", c2 in chain.records,
                           "" if c2 in chain.records else "missing record for H(E_Thing(PoP) || PoP || E_s(token))"))
    h = d["hash_lock"]
    items.append(AuditItem("hash_lock", h in chain.hash_locks,
                           "" if h in chain.hash_locks else "no HTLC with this hash-lock"))
    return items


def _audit_model2(d: dict, chain: ChainIndex) -> list[AuditItem]:
    rid = d["request_id"]
    posted = chain.grants.get(rid)
    names = ("e_thing_pop", "e_client_pop", "e_s_token", "hash_lock")
    if posted is None:
        return [AuditItem(n, False, "missing record: no grant posted for this request") for n in names]
    items = []
    for n in names:
        same = crypto.digest(d[n]) == crypto.digest(posted[n])
        items.append(AuditItem(n, same, "" if same else f"H({n}) differs from the posted grant"))
    s = chain.reveals.get(rid)
    if s is None:
        items.append(AuditItem("token", False, "missing record: no secret revealed"))
        return items + [_pop_binding(d)]
    try:
        inner = crypto.decrypt(s, Ciphertext.from_bytes(posted["e_s_token"]), authz.token_aad(rid))
    except (AuthFailure, EncodingError):
        items.append(AuditItem("token", False, "revealed secret does not open the posted E_s(token)"))
        return items + [_pop_binding(d)]
    # with the public-key wrap the chain releases a ciphertext only the client can
    # open; the client discloses that wrap's one-time key so the auditor can
    released = d.get("released", d["token"])
    matches = crypto.digest(inner) == crypto.digest(released)
    reason = "" if matches else "disclosed token differs from the released one"
    if matches and "released" in d:
        try:
            opened = crypto.pk_open(d["wrap_key"], Ciphertext.from_bytes(released), TOKEN_WRAP_AAD)
        except (AuthFailure, EncodingError):
            opened, reason = None, "wrap_key does not open the released ciphertext"
        matches = opened is not None and crypto.digest(opened) == crypto.digest(d["token"])
        if opened is not None and not matches:
            reason = "disclosed token differs from the one inside the released wrap"
    items.append(AuditItem("token", matches, reason))
    items.append(_pop_binding(d))
    return items


def _pop_binding(d: dict) -> AuditItem:
    """The disclosed PoP key must be the one the disclosed token is bound to."""
    try:
        binding = SignedToken.from_bytes(d["token"]).token.pop_binding
    except EncodingError:
        return AuditItem("pop_key", False, "disclosed token does not parse")
    same = crypto.digest(d["pop_key"]) == binding
    return AuditItem("pop_key", same, "" if same else "H(pop_key) differs from the token's binding")


def audit_lines(transcript_lines: list[str], chain_lines: list[str]) -> AuditReport:
    events = _parse_lines(transcript_lines, "transcript")
    chain = ChainIndex(chain_lines)
    disclosures = [from_jsonable(e) for e in events if e.get("type") == "disclosure"]
    if not disclosures:
        return AuditReport(None, [AuditItem("disclosure", False, "transcript has no disclosure to audit")])
    model = disclosures[-1]["model"]
    items = []
    for d in disclosures:
        try:
            items += _audit_model1(d, chain) if d["model"] == 1 else _audit_model2(d, chain)
        except KeyError as exc:
            raise ParseError(f"disclosure lacks field {exc}") from None
    items.append(chain.replays())
    return AuditReport(model, items)


def audit(transcript_path, chain_path) -> AuditReport:
    try:
        t = Path(transcript_path).read_text().splitlines()
        c = Path(chain_path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(str(exc)) from None
    return audit_lines(t, c)

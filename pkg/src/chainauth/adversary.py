"""Passive observer turned active: replays everything public against the Thing.

The eavesdropper sees the full chain dump and every byte on the insecure
client/Thing link. It tries to recover the token and the PoP key, then makes
repeated access attempts with whatever it found.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import cycle
from typing import Iterable

from . import contract as authz
from . import crypto
from .crypto import Ciphertext, Rng
from .errors import AuthFailure, EncodingError
from .ledger import from_jsonable
from .thing import AccessDenied, PopChallenge, PopResponse, Thing, pop_aad
from .tokens import AccessToken, SignedToken, canonical_encode


def _walk_bytes(obj) -> Iterable[bytes]:
    if isinstance(obj, bytes):
        yield obj
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _walk_bytes(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _walk_bytes(v)


def public_key_candidates(chain_lines: Iterable[str], messages: Iterable[dict] = ()) -> list[bytes]:
    """Every 32-byte value visible on the chain or the open link, in first-seen order."""
    seen: dict[bytes, None] = {}
    for line in chain_lines:
        for b in _walk_bytes(from_jsonable(json.loads(line))):
            if len(b) == 32:
                seen.setdefault(b)
    for m in messages:
        for b in _walk_bytes(from_jsonable(m)):
            if len(b) == 32:
                seen.setdefault(b)
    return list(seen)


@dataclass
class EavesdropReport:
    token_from_chain: bool = False
    token_from_link: bool = False
    pop_recovered: bool = False
    attempts: int = 0
    grants: int = 0
    denials: Counter = field(default_factory=Counter)

    @property
    def obtained_token(self) -> bool:
        return self.token_from_chain or self.token_from_link

    def to_json(self) -> dict:
        return {"token_from_chain": self.token_from_chain, "token_from_link": self.token_from_link,
                "pop_recovered": self.pop_recovered, "attempts": self.attempts, "grants": self.grants,
                "denials": dict(sorted(self.denials.items()))}


class Eavesdropper:
    def __init__(self, chain_lines: list[str], link_messages: list[dict], rng: Rng):
        self.chain_lines = chain_lines
        self.messages = [from_jsonable(m) for m in link_messages]
        self.rng = rng
        self.candidates = public_key_candidates(chain_lines, link_messages)
        self.report = EavesdropReport()

    def _grants_on_chain(self):
        """(request_id, e_s_token, e_thing_pop, e_client_pop) for every posted grant, plus reveals."""
        grants, reveals = [], {}
        for line in self.chain_lines:
            row = from_jsonable(json.loads(line))
            if row.get("record") != "tx" or row["kind"] != "ContractCall":
                continue
            method, args = row["payload"]["method"], row["payload"]["args"]
            if method == "post_grant":
                grants.append((args["request_id"], Ciphertext.from_bytes(args["e_s_token"]),
                               Ciphertext.from_bytes(args["e_thing_pop"]),
                               Ciphertext.from_bytes(args["e_client_pop"])))
            elif method == "reveal_secret":
                reveals.setdefault(args["request_id"], []).append(args["preimage"])
        return grants, reveals

    def harvest(self, thing_id: str) -> tuple[list[SignedToken], list[Ciphertext], list[Ciphertext]]:
        """Collect plain tokens, sealed presentations and E_Thing(PoP) blobs; try every candidate key."""
        tokens: list[SignedToken] = []
        sealed: list[Ciphertext] = []
        e_thing_pops: list[Ciphertext] = []
        grants, reveals = self._grants_on_chain()
        for rid, e_s_token, e_thing_pop, _ in grants:
            e_thing_pops.append(e_thing_pop)
            for s in reveals.get(rid, []):
                try:
                    tokens.append(SignedToken.from_bytes(crypto.decrypt(s, e_s_token, authz.token_aad(rid))))
                    self.report.token_from_chain = True
                except (AuthFailure, EncodingError):
                    pass
        for m in self.messages:
            body = m.get("body", {})
            if "token" in body:
                try:
                    tokens.append(SignedToken.from_bytes(body["token"]))
                    self.report.token_from_link = True
                except EncodingError:
                    pass
            if "sealed_token" in body:
                sealed.append(Ciphertext.from_bytes(body["sealed_token"]))
            if "e_thing_pop" in body:
                e_thing_pops.append(Ciphertext.from_bytes(body["e_thing_pop"]))
        for c in e_thing_pops:
            for k in self.candidates:
                try:
                    crypto.decrypt(k, c, pop_aad(thing_id))
                    self.report.pop_recovered = True
                except AuthFailure:
                    pass
        return tokens, sealed, e_thing_pops

    def _observed_pairs(self) -> list[tuple[bytes, bytes]]:
        challenges = [m["body"]["challenge"] for m in self.messages if m.get("kind") == "pop_challenge"]
        responses = [m["body"]["response"] for m in self.messages if m.get("kind") == "pop_response"]
        return list(zip(challenges, responses))

    def _begin(self, thing: Thing, i: int, tokens, sealed, e_thing_pops) -> tuple[PopChallenge, bytes]:
        """Open a handshake with whatever was harvested; returns the challenge and the token tag."""
        if e_thing_pops and tokens:
            token = tokens[i % len(tokens)]
            return thing.begin_access(token, e_thing_pops[i % len(e_thing_pops)]), token.tag
        if e_thing_pops and sealed:
            # the tag is unknown without opening the seal, so any response is a guess
            return thing.begin_access_sealed(sealed[i % len(sealed)], e_thing_pops[i % len(e_thing_pops)]), b""
        token = SignedToken.from_bytes(self._forged_token_bytes())
        blob = e_thing_pops[0] if e_thing_pops else Ciphertext(self.rng.nonce(), self.rng.bytes(32),
                                                                self.rng.bytes(16))
        return thing.begin_access(token, blob), token.tag

    def attack(self, thing: Thing, scope: str, attempts: int) -> EavesdropReport:
        tokens, sealed, e_thing_pops = self.harvest(thing.thing_id)
        pairs = self._observed_pairs()
        strategies = cycle(["replay", "stale_response", "candidate_key", "random"])
        keys = cycle(self.candidates or [bytes(32)])
        for i in range(attempts):
            strategy = next(strategies)
            self.report.attempts += 1
            try:
                if strategy == "replay" and pairs:
                    ch, resp = pairs[i % len(pairs)]
                    thing.complete_access(PopChallenge(ch), PopResponse(resp), scope)
                    self.report.grants += 1
                    continue
                challenge, tag = self._begin(thing, i, tokens, sealed, e_thing_pops)
                if strategy == "stale_response" and pairs:
                    response = pairs[i % len(pairs)][1]
                elif strategy == "candidate_key":
                    response = crypto.mac(next(keys), challenge.challenge + tag)
                else:
                    response = self.rng.bytes(32)
                thing.complete_access(challenge, PopResponse(response), scope)
                self.report.grants += 1
            except AccessDenied as exc:
                self.report.denials[exc.reason.value] += 1
        return self.report

    def _forged_token_bytes(self) -> bytes:
        fake = AccessToken("as.forged", "unknown", frozenset({"read"}), 0, 2**32,
                           self.rng.bytes(32), self.rng.bytes(16))
        return canonical_encode(fake) + self.rng.bytes(32)

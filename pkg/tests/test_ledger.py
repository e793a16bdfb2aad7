import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from chainauth import crypto
from chainauth.errors import (BadPreimage, Expired, InsufficientFunds, InvalidPayload, InvalidTimeout,
                              NotPayer, NotYetExpired, ParseError, UnknownHtlc, WrongState)
from chainauth.ledger import (GasTable, HtlcState, Ledger, LedgerConfig, LedgerTx, calldata_size, meter,
                              words)

from conftest import mine_all

S = b"\x5a" * 32
H = crypto.digest(S)


def executed(ledger, txid):
    mine_all(ledger)
    return ledger.receipt(txid)


def last_receipt(ledger):
    mine_all(ledger)
    return list(ledger.mined_txs())[-1][1]


def test_transfer_examples(chain, alice, bob):
    a = alice.address
    rich = Ledger({a: 10, bob.address: 0})
    r = executed(rich, rich.transfer(a, bob.address, 10))
    assert r.ok and rich.balance(a) == 0 and rich.balance(bob.address) == 10
    with pytest.raises(InsufficientFunds):
        rich.transfer(a, bob.address, 11)


def test_submit_rejects_malformed_payloads(chain, alice):
    with pytest.raises(InvalidPayload):
        chain.submit(LedgerTx(alice.address, "Teleport", {}))
    with pytest.raises(InvalidPayload):
        chain.record_hash(alice.address, b"short")
    with pytest.raises(InvalidPayload):
        chain.submit(LedgerTx(alice.address, "RecordHash", {"value": H}, value=3))


def test_fifo_within_a_block(alice, bob):
    ledger = Ledger({alice.address: 5, bob.address: 0}, LedgerConfig(txs_per_block=4))
    first = ledger.transfer(alice.address, bob.address, 3)
    second = ledger.transfer(alice.address, bob.address, 2)
    third = ledger.record_hash(bob.address, H)
    block = ledger.mine_block()
    assert block.txids == (first, second, third)
    assert [ledger.receipt(t).index for t in block.txids] == [0, 1, 2]


def test_one_tx_per_block_by_default(chain, alice):
    for _ in range(3):
        chain.record_hash(alice.address, crypto.digest(b"x"))
    assert mine_all(chain) == 3


def test_empty_block_advances_height(chain):
    block = chain.mine_block()
    assert block.height == 1 and block.txids == ()


def test_hash_records(chain, alice, bob):
    value = crypto.digest(b"record me")
    chain.record_hash(alice.address, value)
    chain.record_hash(bob.address, value)
    mine_all(chain)
    found = chain.find_records(value)
    assert [(r.submitter, r.height) for r in found] == [(alice.address, 1), (bob.address, 2)]
    assert chain.find_records(crypto.digest(b"nothing")) == []


def test_gas_examples_against_default_table(chain, alice, bob):
    t = GasTable()
    assert (t.base, t.per_byte, t.per_word) == (21000, 16, 20000)
    r = executed(chain, chain.transfer(alice.address, bob.address, 1))
    assert r.gas.gas_used == 21000
    r = executed(chain, chain.record_hash(alice.address, H))
    assert r.gas.gas_used == 21000 + 32 * 16 + 20000
    assert r.gas.gas_used == r.gas.base + r.gas.payload_cost + r.gas.storage_cost


def test_gas_reverted_tx_still_metered(chain, alice):
    txid = chain.htlc_claim(alice.address, b"\0" * 32, S)
    r = executed(chain, txid)
    assert r.status == "reverted" and r.error == "UnknownHtlc"
    assert r.gas.storage_words == 0 and r.gas.gas_used == 21000 + 64 * 16


def test_calldata_size_and_words():
    assert calldata_size({"a": b"12345", "b": "xyz", "n": 7, "f": True, "z": None}) == 5 + 3 + 32 + 1
    assert [words(n) for n in (0, 1, 32, 33, 64)] == [0, 1, 1, 2, 2]
    tx = LedgerTx(b"\0" * 20, "RecordHash", {"value": H})
    assert meter(tx, 1, GasTable(1, 1, 1)).gas_used == 1 + 32 + 1


def test_charge_gas_burns_and_conserves(alice, bob):
    ledger = Ledger({alice.address: 10**6, bob.address: 0},
                    LedgerConfig(charge_gas=True, gas=GasTable(base=10, per_byte=0, per_word=0)))
    executed(ledger, ledger.transfer(alice.address, bob.address, 1))
    assert ledger.burned == 10 and ledger.conservation_holds()


def _deposited(alice, bob, timeout=10):
    ledger = Ledger({alice.address: 10, bob.address: 0}, LedgerConfig(txs_per_block=4))
    hid = ledger.htlc_create(bob.address, bob.address, 10, H, timeout, payer=alice.address)
    mine_all(ledger)
    ledger.htlc_deposit(alice.address, hid)
    mine_all(ledger)
    return ledger, hid


def test_htlc_lifecycle(alice, bob):
    ledger, hid = _deposited(alice, bob)
    assert ledger.htlc(hid).state is HtlcState.DEPOSITED
    assert ledger.balance(alice.address) == 0 and ledger.escrowed() == 10
    assert ledger.read_preimage(hid) is None
    assert executed(ledger, ledger.htlc_claim(bob.address, hid, S)).ok
    assert ledger.read_preimage(hid) == S
    assert crypto.digest(ledger.read_preimage(hid)) == ledger.htlc(hid).hash_lock
    assert ledger.balance(bob.address) == 10 and ledger.escrowed() == 0


def test_htlc_create_timeout_must_be_in_the_future(chain, alice, bob):
    h = chain.height
    chain.htlc_create(alice.address, bob.address, 1, H, h)
    r = last_receipt(chain)
    with pytest.raises(InvalidTimeout):
        r.raise_for_status()
    hid = chain.htlc_create(alice.address, bob.address, 1, H, chain.height + 20)
    mine_all(chain)
    created = chain.htlc(hid)
    assert created.state is HtlcState.CREATED and created.revealed_preimage is None


def test_htlc_deposit_errors(alice, bob):
    ledger = Ledger({alice.address: 10, bob.address: 10}, LedgerConfig(txs_per_block=4))
    hid = ledger.htlc_create(bob.address, bob.address, 10, H, 10, payer=alice.address)
    mine_all(ledger)
    with pytest.raises(NotPayer):
        executed(ledger, ledger.htlc_deposit(bob.address, hid)).raise_for_status()
    assert executed(ledger, ledger.htlc_deposit(alice.address, hid)).ok
    assert ledger.balance(alice.address) == 0
    ledger._balances[alice.address] = 10  # enough to pass the submit-time check
    with pytest.raises(WrongState):
        executed(ledger, ledger.htlc_deposit(alice.address, hid)).raise_for_status()
    with pytest.raises(UnknownHtlc):
        ledger.htlc_deposit(alice.address, b"\1" * 32)


def test_htlc_claim_and_refund_errors(alice, bob):
    ledger, hid = _deposited(alice, bob, timeout=10)
    with pytest.raises(BadPreimage):
        executed(ledger, ledger.htlc_claim(bob.address, hid, b"\0" * 32)).raise_for_status()
    with pytest.raises(NotYetExpired):
        executed(ledger, ledger.htlc_refund(alice.address, hid)).raise_for_status()
    while ledger.height < 9:
        ledger.mine_block()
    with pytest.raises(Expired):
        executed(ledger, ledger.htlc_claim(bob.address, hid, S)).raise_for_status()
    with pytest.raises(NotPayer):
        executed(ledger, ledger.htlc_refund(bob.address, hid)).raise_for_status()
    assert executed(ledger, ledger.htlc_refund(alice.address, hid)).ok
    with pytest.raises(WrongState):
        executed(ledger, ledger.htlc_refund(alice.address, hid)).raise_for_status()
    with pytest.raises(UnknownHtlc):
        ledger.htlc(b"\1" * 32)


# -- exhaustive claim/refund interleavings around the timeout ---------------

ACTIONS = ("claim", "claim_bad", "refund", "refund_by_payee")


def _oracle(sequence, timeout):
    """Independent model of the escrow: returns expected per-attempt success and final state."""
    state, results = "Deposited", []
    for action, h in sequence:
        ok = False
        if state == "Deposited":
            if action == "claim":
                ok = h < timeout
            elif action == "refund":
                ok = h >= timeout
        if ok:
            state = "Claimed" if action == "claim" else "Refunded"
        results.append(ok)
    return results, state


def _interleavings(timeout):
    events = [(a, h) for a in ACTIONS for h in (timeout - 1, timeout, timeout + 1)]
    for k in (1, 2, 3):
        for seq in itertools.product(events, repeat=k):
            if all(seq[i][1] <= seq[i + 1][1] for i in range(k - 1)):
                yield seq


def run_interleavings(alice, bob, timeout=6):
    """Replay every ordered claim/refund sequence; returns (sequences checked, violations)."""
    checked, violations = 0, []
    for seq in _interleavings(timeout):
        ledger, hid = _deposited(alice, bob, timeout)
        txids = []
        for action, h in seq:
            while ledger.height < h - 1:
                ledger.mine_block()
            sender = bob.address if action in ("claim", "claim_bad", "refund_by_payee") else alice.address
            if action.startswith("claim"):
                txids.append((ledger.htlc_claim(sender, hid, S if action == "claim" else b"\1" * 32), h))
            else:
                txids.append((ledger.htlc_refund(sender, hid), h))
            # flush whenever the next event is at a later height
            nxt = seq[len(txids)] if len(txids) < len(seq) else None
            if nxt is None or nxt[1] > h:
                ledger.mine_block()
        expected, final = _oracle(seq, timeout)
        receipts = [ledger.receipt(t) for t, _ in txids]
        state = ledger.htlc(hid).state.value
        good = ([r.height for r in receipts] == [h for _, h in seq]
                and [r.ok for r in receipts] == expected
                and state == final
                and sum(r.ok for r in receipts) <= 1
                and ledger.conservation_holds()
                and (ledger.read_preimage(hid) is not None) == (state == "Claimed"))
        if not good:
            violations.append(seq)
        checked += 1
    return checked, violations


def test_claim_refund_interleavings_exhaustive(alice, bob):
    checked, violations = run_interleavings(alice, bob)
    assert violations == []
    assert checked > 500


ALICE, BOB = crypto.KeyPair(b"a" * 32), crypto.KeyPair(b"b" * 32)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.sampled_from(ACTIONS), st.integers(0, 4)), min_size=1, max_size=6),
       st.integers(3, 8))
def test_random_interleavings_match_oracle(steps, timeout):
    alice, bob = ALICE, BOB
    ledger, hid = _deposited(alice, bob, timeout)
    seq, results = [], []
    for action, gap in steps:
        for _ in range(gap):
            ledger.mine_block()
        sender = bob.address if action != "refund" else alice.address
        if action.startswith("claim"):
            txid = ledger.htlc_claim(sender, hid, S if action == "claim" else b"\1" * 32)
        else:
            txid = ledger.htlc_refund(sender, hid)
        ledger.mine_block()
        seq.append((action, ledger.height))
        results.append(ledger.receipt(txid).ok)
    expected, final = _oracle(seq, timeout)
    assert results == expected and ledger.htlc(hid).state.value == final
    assert ledger.conservation_holds()


# -- dump / replay ------------------------------------------------------------

def test_dump_and_replay_reproduce_state(alice, bob, tmp_path):
    ledger, hid = _deposited(alice, bob)
    ledger.htlc_claim(bob.address, hid, S)
    ledger.record_hash(alice.address, H, topic="door-opened")
    mine_all(ledger)
    path = tmp_path / "chain.ndjson"
    ledger.dump(path)
    again = Ledger.load(path)
    assert again.dump_lines() == ledger.dump_lines()
    assert again.verify_chain()


def test_replay_detects_tampering(alice, bob):
    ledger, hid = _deposited(alice, bob)
    lines = ledger.dump_lines()
    rows = [json.loads(s) for s in lines]
    for row in rows:
        if row["record"] == "tx" and row["kind"] == "HtlcDeposit":
            row["value"] = 9
    with pytest.raises(ParseError):
        Ledger.load_lines(json.dumps(r) for r in rows)
    with pytest.raises(ParseError):
        Ledger.load_lines(["not json"])
    with pytest.raises(ParseError):
        Ledger.load_lines(lines[1:])


def test_chain_is_append_only(chain, alice):
    chain.record_hash(alice.address, H)
    mine_all(chain)
    before = [b.block_hash for b in chain.blocks]
    chain.mine_block()
    assert [b.block_hash for b in chain.blocks[:-1]] == before
    assert chain.verify_chain()


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 60)), max_size=15))
def test_conservation_under_random_transfers(moves):
    kps = [crypto.KeyPair(bytes([i]) * 32) for i in range(3)]
    ledger = Ledger({k.address: 50 for k in kps})
    for src, dst, amount in moves:
        try:
            ledger.transfer(kps[src].address, kps[dst].address, amount)
        except InsufficientFunds:
            pass
        ledger.mine_block()
        assert ledger.conservation_holds()
    assert sum(ledger.balances().values()) == 150

import pytest

from chainauth import contract as authz
from chainauth import crypto, model2
from chainauth.contract import Policy, RequestState
from chainauth.crypto import KeyPair, Rng
from chainauth.errors import AuthFailure, NotAllowed, WrongPrice, WrongState
from chainauth.harness import Adversary, ScenarioConfig, run
from chainauth.ledger import Ledger, LedgerConfig
from chainauth.thing import pop_aad

from conftest import mine_all

CLIENT, AS, OWNER, OTHER = (KeyPair(bytes([i]) * 32) for i in (21, 22, 23, 24))
K = b"\x44" * 32


def parties(allowlist=None, wrap=False, misbehaviour=model2.Misbehaviour(), txs_per_block=1):
    ledger = Ledger({CLIENT.address: 100, OWNER.address: 0}, LedgerConfig(txs_per_block=txs_per_block))
    _, addr = authz.deploy(ledger, Policy(OWNER.address, AS.address, {"read": 10}, 20, allowlist))
    mine_all(ledger)
    server = model2.AuthorizationServer(AS, K, ledger, addr, Rng(2), issuer="as.example", thing_id="thing-01",
                                        token_pk_wrap=wrap, misbehaviour=misbehaviour)
    client = model2.Client(CLIENT, ledger, addr, scope="read", token_pk_wrap=wrap)
    return ledger, addr, server, client


def drive(ledger, server, client, ticks=80):
    for _ in range(ticks):
        if client.done and server.done and not ledger.pending:
            break
        client.step()
        server.step()
        ledger.mine_block()


def test_honest_flow_four_contract_calls():
    ledger, addr, server, client = parties()
    start = ledger.height
    drive(ledger, server, client)
    assert client.phase is model2.Phase.COMPLETED
    methods = [tx.payload["method"] for tx, r in ledger.mined_txs() if r.height > start]
    assert methods == ["request_access", "post_grant", "acknowledge", "reveal_secret"]
    assert crypto.digest(client.pop_key) == client.token.token.pop_binding
    assert ledger.balance(OWNER.address) == 10


def test_request_errors_propagate():
    ledger, addr, server, client = parties(allowlist=frozenset({OTHER.address}))
    client.request()
    mine_all(ledger)
    client.step()
    assert client.phase is model2.Phase.REJECTED and isinstance(client.error, NotAllowed)
    ledger, addr, server, client = parties()
    client.request(deposit=9)
    mine_all(ledger)
    client.step()
    assert isinstance(client.error, WrongPrice)


def test_watcher_scans_each_block_once():
    ledger, addr, server, client = parties()
    client.request()
    mine_all(ledger)
    assert len(server.scan()) == 1
    assert server.scan() == []
    assert server.watcher.last_scanned == ledger.height


def test_artifacts_open_only_for_their_holders():
    ledger, addr, server, client = parties()
    rid = client.request()
    mine_all(ledger)
    server.step()
    mine_all(ledger)
    art = ledger.contract(addr).read_request(rid).artifacts
    pop = server.served[rid].pop_key
    assert not any(pop.hex() in line for line in ledger.dump_lines())
    with pytest.raises(AuthFailure):
        crypto.pk_decrypt(OTHER, art.e_client_pop, model2.client_pop_aad(rid))
    assert crypto.pk_decrypt(CLIENT, art.e_client_pop, model2.client_pop_aad(rid)) == pop
    thing_pop = crypto.decrypt(K, art.e_thing_pop, pop_aad("thing-01"))
    assert crypto.digest(thing_pop) == server.served[rid].token.token.pop_binding


def test_acknowledge_ordering():
    ledger, addr, server, client = parties(txs_per_block=4)
    rid = client.request()
    mine_all(ledger)
    txid = authz.acknowledge(ledger, addr, CLIENT.address, rid, b"\0" * 32)
    mine_all(ledger)
    with pytest.raises(WrongState):
        ledger.receipt(txid).raise_for_status()
    server.step()
    mine_all(ledger)
    txid = server.reveal(rid)
    mine_all(ledger)
    with pytest.raises(WrongState):
        ledger.receipt(txid).raise_for_status()
    client.step()
    client.step()
    mine_all(ledger)
    assert ledger.contract(addr).read_request(rid).acknowledged


def test_withheld_secret_refunds():
    ledger, addr, server, client = parties(misbehaviour=model2.Misbehaviour(withhold_secret=True))
    drive(ledger, server, client)
    assert client.phase is model2.Phase.REFUNDED and client.token is None
    assert ledger.balance(CLIENT.address) == 100
    assert ledger.contract(addr).read_request(client.request_id).state is RequestState.REFUNDED


def test_wrong_preimage_is_retried_and_rejected_once():
    ledger, addr, server, client = parties(misbehaviour=model2.Misbehaviour(wrong_preimage=True))
    drive(ledger, server, client)
    errors = [r.error for tx, r in ledger.mined_txs() if tx.kind == "ContractCall"
              and tx.payload["method"] == "reveal_secret"]
    assert errors == ["BadPreimage", None]
    assert client.phase is model2.Phase.COMPLETED


def test_public_observer_gets_token_but_not_pop():
    ledger, addr, server, client = parties()
    drive(ledger, server, client)
    req = ledger.contract(addr).read_request(client.request_id)
    public_token = crypto.decrypt(req.revealed_preimage, req.artifacts.e_s_token, authz.token_aad(req.request_id))
    assert public_token == client.token.to_bytes()
    assert not any(client.pop_key.hex() in line for line in ledger.dump_lines())


def test_pk_wrap_hides_token_from_observers():
    ledger, addr, server, client = parties(wrap=True)
    drive(ledger, server, client)
    assert client.phase is model2.Phase.COMPLETED and client.token is not None
    req = ledger.contract(addr).read_request(client.request_id)
    released = crypto.decrypt(req.revealed_preimage, req.artifacts.e_s_token, authz.token_aad(req.request_id))
    assert released != client.token.to_bytes()
    assert client.token.to_bytes() not in released
    assert not any(client.token.to_bytes().hex() in line for line in ledger.dump_lines())


def test_harness_model2_counts_delay_and_mediation():
    res = run(ScenarioConfig(model=2, seed=11))
    r = res.report
    assert (r.tx_count, r.delay_blocks, r.outcome) == (4, 4, "Completed")
    assert r.checks["mediation"] and not res.transcript.messages("secure")
    assert r.ok


def test_harness_non_allowlisted_client_denied():
    r = run(ScenarioConfig(model=2, adversary=Adversary(non_allowlisted_client=True))).report
    assert (r.outcome, r.deny_reason, r.tx_count) == ("Denied", "NotAllowed", 1)
    assert r.ok


def test_harness_event_predicates():
    cfg = ScenarioConfig(model=2, required_events=("door/armed",))
    assert run(cfg).report.deny_reason == "EventNotSatisfied"
    cfg = ScenarioConfig(model=2, required_events=("door/armed",), recorded_events=("door/armed",))
    r = run(cfg).report
    assert r.outcome == "Completed" and r.tx_count == 4

import json
import subprocess
import sys

import pytest

from chainauth import cli
from chainauth.audit import audit, audit_lines
from chainauth.errors import ConfigError, ParseError
from chainauth.harness import (REFERENCE_GAS, Adversary, OfflineMonitor, ScenarioConfig, compare, parse_config,
                               run, write_outputs)
from chainauth.ledger import GasTable, Ledger

CONFIG = """
[scenario]
model = 2
seed = 77
scope = write
timeout_blocks = 12
token_pk_wrap = yes

[prices]
read = 10
write = 25

[balances]
client = 40

[adversary]
eavesdropper = true

[gas]
per_word = 10000
"""


def test_parse_config():
    cfg = parse_config(CONFIG)
    assert (cfg.model, cfg.seed, cfg.scope, cfg.timeout_blocks, cfg.token_pk_wrap) == (2, 77, "write", 12, True)
    assert cfg.prices == {"read": 10, "write": 25}
    assert cfg.balances == {"client": 40, "as": 0, "owner": 0}
    assert cfg.adversary == Adversary(eavesdropper=True)
    assert cfg.gas == GasTable(per_word=10000)


@pytest.mark.parametrize("text", [
    "[scenario]\nmodel = 3\n",
    "[scenario]\nseed = -1\n",
    "[scenario]\nseed = banana\n",
    "[scenario]\ncolour = blue\n",
    "[adversary]\nlaser = true\n",
    "[adversary]\neavesdropper = maybe\n",
    "[prices]\nread = -5\n",
    "[scenario]\ntimeout_blocks = 0\n",
    "[weather]\nrain = 1\n",
    "no section header",
    "[scenario]\nmodel = 1\n[adversary]\nnon_allowlisted_client = true\n",
])
def test_bad_configs_raise(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_run_is_deterministic():
    cfg = parse_config(CONFIG)
    a, b = run(cfg), run(cfg)
    assert a.transcript.lines() == b.transcript.lines()
    assert a.ledger.dump_lines() == b.ledger.dump_lines()
    assert run(ScenarioConfig(model=2, seed=78)).transcript.lines() != a.transcript.lines()


def test_report_matches_transcript():
    res = run(ScenarioConfig(model=1, seed=4))
    r = res.report
    setup = next(e["seq"] for e in res.transcript.events if e["type"] == "setup")
    assert r.tx_count == sum(1 for e in res.transcript.events[setup:] if e["type"] == "tx")
    assert r.delay_blocks == r.last_tx_height - r.first_tx_height + 1
    assert r.total_gas == sum(x["gas"]["gas_used"] for x in r.receipts)
    assert res.transcript.events[-1]["type"] == "outcome"


def test_offline_monitor_catches_ledger_access():
    monitor = OfflineMonitor()
    ledger = Ledger({})
    with monitor.watching():
        ledger.balance(b"\0" * 20)
    assert monitor.ledger_calls > 0 and not monitor.offline


def test_compare_reproduces_counts_and_delay():
    c = compare(5)
    assert (c.model1.tx_count, c.model2.tx_count) == (3, 4)
    assert c.delay_ratio == pytest.approx(4 / 3)
    table = c.table()
    assert "102476" in table and "366277" in table and "not reproduced" in table
    assert c.to_json()["reference_evm_gas_not_reproduced"] == {"1": REFERENCE_GAS[1], "2": REFERENCE_GAS[2]}


def test_audit_honest_runs_pass(tmp_path):
    for model in (1, 2):
        paths = write_outputs(run(ScenarioConfig(model=model, seed=9)), tmp_path / str(model))
        report = audit(paths["transcript"], paths["chain"])
        assert report.ok, report.lines()


def test_audit_flags_flipped_ciphertext_byte(tmp_path):
    res = run(ScenarioConfig(model=1, seed=9))
    lines = res.transcript.lines()
    events = [json.loads(s) for s in lines]
    d = next(e for e in events if e["type"] == "disclosure")
    raw = bytearray.fromhex(d["e_s_token"]["hex"])
    raw[5] ^= 0x01
    d["e_s_token"]["hex"] = raw.hex()
    report = audit_lines([json.dumps(e) for e in events], res.ledger.dump_lines())
    assert report.failed == ["commit2"]


def test_audit_missing_record(tmp_path):
    res = run(ScenarioConfig(model=1, seed=9))
    chain = [s for s in res.ledger.dump_lines() if '"kind":"HtlcCreate"' not in s]
    report = audit_lines(res.transcript.lines(), chain)
    assert {"commit1", "commit2"} <= set(report.failed)
    assert any("missing record" in line for line in report.lines())


def test_audit_model2_missing_grant():
    res = run(ScenarioConfig(model=2, seed=9))
    chain = [s for s in res.ledger.dump_lines() if '"method":"post_grant"' not in s]
    report = audit_lines(res.transcript.lines(), chain)
    assert not report.ok and all("missing record" in i.reason for i in report.items if i.name != "chain_replay")


def test_audit_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        audit_lines(["{not json"], [])
    with pytest.raises(ParseError):
        audit_lines([], ['{"record": "block"}'])
    with pytest.raises(ParseError):
        audit(tmp_path / "absent", tmp_path / "absent")


def test_audit_without_disclosure_fails():
    res = run(ScenarioConfig(model=1, adversary=Adversary(as_withholds_secret=True)))
    assert not audit_lines(res.transcript.lines(), res.ledger.dump_lines()).ok


def test_cli_run_audit_compare(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "s.ini"
    cfg.write_text(CONFIG)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"transcript.ndjson", "chain.ndjson", "metrics.json"}
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["ok"] and metrics["tx_count"] == 4
    assert cli.main(["audit", "--transcript", str(out / "transcript.ndjson"), "--chain", str(out / "chain.ndjson")]) == 0
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "env" / "chain.ndjson").exists()
    assert cli.main(["compare", "--seed", "3"]) == 0
    assert "model 2 / model 1" in capsys.readouterr().out
    bad = tmp_path / "bad.ini"
    bad.write_text("[scenario]\nmodel = 7\n")
    assert cli.main(["run", "--config", str(bad)]) == 2


def test_cli_exits_nonzero_on_invariant_breach(tmp_path, monkeypatch):
    import chainauth.harness as harness

    real = harness.OfflineMonitor.offline
    monkeypatch.setattr(harness.OfflineMonitor, "offline", property(lambda self: False))
    cfg = tmp_path / "s.ini"
    cfg.write_text("[scenario]\nmodel = 1\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    monkeypatch.setattr(harness.OfflineMonitor, "offline", real)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chainauth", "compare", "--json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["models"]["1"]["tx_count"] == 3

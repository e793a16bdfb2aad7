"""Command line entry point: ``chainauth run|compare|audit``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .audit import audit
from .errors import ConfigError, ParseError
from .harness import compare, load_config, run, write_outputs

OUT_ENV = "CHAINAUTH_OUT"


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    result = run(config)
    out = args.out or os.environ.get(OUT_ENV) or "chainauth-out"
    paths = write_outputs(result, out)
    r = result.report
    print(f"model {r.model} seed {r.seed}: {r.outcome}"
          + (f" ({r.deny_reason})" if r.deny_reason else "")
          + f", {r.tx_count} txs, {r.total_gas} gas, delay {r.delay_blocks} blocks")
    for name, ok in r.checks.items():
        print(f"  {'ok  ' if ok else 'FAIL'} {name}")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0 if r.ok else 1


def _cmd_compare(args) -> int:
    c = compare(args.seed)
    if args.json:
        print(json.dumps(c.to_json(), indent=2, sort_keys=True))
    else:
        print(c.table())
    return 0 if c.model1.ok and c.model2.ok else 1


def _cmd_audit(args) -> int:
    try:
        report = audit(args.transcript, args.chain)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainauth", description="Blockchain-backed OAuth flow simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario and write transcript, chain dump and metrics")
    r.add_argument("--config", required=True, help="scenario INI file")
    r.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./chainauth-out)")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="run both models honestly and print the comparison table")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--json", action="store_true", help="print JSON instead of the table")
    c.set_defaults(func=_cmd_compare)

    a = sub.add_parser("audit", help="check disclosed artifacts against a chain dump")
    a.add_argument("--transcript", required=True)
    a.add_argument("--chain", required=True)
    a.set_defaults(func=_cmd_audit)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

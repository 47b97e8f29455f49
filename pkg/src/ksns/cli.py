"""Command-line entry point (``ksns`` or ``python -m ksns``)."""

import argparse
import csv
import json
import sys
from pathlib import Path

from . import inequality_lab, runner
from .errors import InvalidConfig, KSNSError, RunAborted
from .fields import SimConfig, load_config


def _load(path, seed=None):
    cfg = load_config(path) if path else SimConfig()
    if seed is not None:
        cfg = cfg.with_overrides({"seed": seed})
    return cfg


def cmd_simulate(args):
    cfg = _load(args.config, args.seed)
    try:
        res = runner.run(cfg, args.out)
    except RunAborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3
    s = res.summary
    print(f"completed t={s['t_final']:.6g} steps={s['steps']} -> {res.out_dir}")
    print(f"mass drift {s['audits']['mass']['max_relative_drift']:.3e}, min c {s['audits']['positivity']['min_c']:.6g}")
    return 0


def cmd_sweep(args):
    cfg = _load(args.config)
    axes = dict(runner.parse_axis(a) for a in args.axis)
    res = runner.sweep(cfg, axes, args.out)
    failed = sum(r["status"] != "completed" for r in res.rows)
    print(f"{len(res.rows)} cells, {failed} not completed -> {res.table}")
    return 0


def cmd_check_inequalities(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for name in inequality_lab.CHECKS:
        rows, summary = inequality_lab.run_ensemble(name, args.trials, args.seed)
        _write_rows(out / f"{name}.csv", rows)
        summaries.append(summary)
    rows, summary = inequality_lab.psi_summary()
    _write_rows(out / "psi_eta.csv", rows)
    summaries.append(summary)
    (out / "summary.json").write_text(json.dumps(summaries, indent=2))
    for s in summaries:
        print(f"{s['check']:16s} trials={s['trials']:4d} violations={s['violations']}")
    return 0 if all(s["violations"] == 0 for s in summaries) else 1


def _write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: runner._cell_text(v) for k, v in r.items()})


def cmd_verify(args):
    report = runner.verify(args.suite, fast=args.fast)
    print(json.dumps(report, indent=2, default=runner._json_default))
    return 0 if report["passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="ksns", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one simulation")
    s.add_argument("--config", help="TOML config file (defaults if omitted)")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="parameter sweep; worker count via KSNS_WORKERS")
    s.add_argument("--config")
    s.add_argument("--axis", action="append", required=True, help="key=v1,v2,... (repeatable)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("check-inequalities", help="seeded inequality ensembles")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_check_inequalities)

    s = sub.add_parser("verify", help="run a named verification suite")
    s.add_argument("--suite", required=True, choices=sorted(runner.SUITES))
    s.add_argument("--fast", action="store_true", help="reduced sizes for a quick check")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2
    except KSNSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

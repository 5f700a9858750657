"""Command-line entry points: run a config matrix, fit rates, validate instances."""

import argparse
import json
import sys

from .core import load_instance, validate_instance
from .harness import fit_rate, run_config_file
from .errors import TooFewPoints


def _cmd_run(args):
    rows = run_config_file(args.config, workers=args.workers, out_dir=args.out)
    failed = [r for r in rows if r.error]
    print(f"{len(rows)} rows ({len(failed)} with errors) -> {args.out}")
    for r in failed:
        print(f"  {r.config_id} T={r.T} seed={r.seed}: {r.error}", file=sys.stderr)
    return 0


def _cmd_fit(args):
    import csv

    cells = {}
    with open(args.infile) as fh:
        for rec in csv.DictReader(fh):
            d = rec.get(args.column, "")
            if d:
                cells.setdefault(rec["config_id"], []).append((int(rec["T"]), float(d)))
    out = {}
    for cid, pts in sorted(cells.items()):
        try:
            f = fit_rate(pts)
        except TooFewPoints as exc:
            print(f"{cid}: {exc}")
            continue
        flag = "  [low R^2]" if f.flagged else ""
        print(f"{cid}: slope={f.slope:+.4f}  R^2={f.r2:.4f}  "
              f"T in [{f.horizon_range[0]}, {f.horizon_range[1]}]{flag}")
        out[cid] = {"slope": f.slope, "intercept": f.intercept, "r2": f.r2,
                    "horizon_range": list(f.horizon_range), "flagged": f.flagged}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"schema_version": 1, "fits": out}, fh, indent=1)
    return 0


def _cmd_validate(args):
    instance = load_instance(args.instance)
    report = validate_instance(instance, samples=args.samples, seed=args.seed)
    if report.ok:
        print("instance passes all sampled checks")
        return 0
    for v in report.violations:
        print(f"{v.check}: {v.message}  witness={v.witness}")
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="approachlab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config matrix")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--out", default="out")
    p_run.set_defaults(func=_cmd_run)

    p_fit = sub.add_parser("fit", help="fit rates from a metrics.csv")
    p_fit.add_argument("--in", dest="infile", required=True)
    p_fit.add_argument("--column", default="dist_truth")
    p_fit.add_argument("--out", default=None)
    p_fit.set_defaults(func=_cmd_fit)

    p_val = sub.add_parser("validate", help="validate an instance file")
    p_val.add_argument("--instance", required=True)
    p_val.add_argument("--samples", type=int, default=10_000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

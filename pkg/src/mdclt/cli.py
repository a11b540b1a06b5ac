"""Command line front end: ``mdclt {check,gordin,simulate,experiment,verify}``.

Data files are a pure function of the arguments; the wall-clock timestamp is
written only to ``metadata.json``. Exit codes: 0 success, 1 a bound or
acceptance check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .ergodic import BetaSequence, HBetaParams, search_beta
from .families import FamilyParams, family_h_beta_params, make_scheme
from .gordin import DegenerateChainError, summary
from .inequality_lab import BoundRecord, lemma1_bounds, records_to_csv, run_suite
from .markov_core import ValidationError, center_observables, load_chain
from .montecarlo import default_workers, sample_statistic, write_samples
from .scheme import (DEFAULT_GRID, VARIANTS, ArrayScheme, ConditionReport, evaluate_conditions,
                     trend, variance_lower_bound_check)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _grid(text: str) -> tuple[int, ...]:
    try:
        g = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated integers: {text!r}")
    if not g:
        raise argparse.ArgumentTypeError("grid must be non-empty")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--family", choices=["A", "B", "C"], help="generated array scheme")
    src.add_argument("--input", type=Path, help="chain specification JSON")
    common.add_argument("--gamma", type=float, default=0.5)
    common.add_argument("--period", type=int, default=2)
    common.add_argument("--lam", type=float, default=2.0)
    common.add_argument("--skew", type=float, default=0.0)
    common.add_argument("--grid", type=_grid, default=DEFAULT_GRID,
                        help="comma-separated horizons (families only)")
    common.add_argument("--replicates", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=20261018)
    common.add_argument("--variant", choices=VARIANTS, default="consistent")
    common.add_argument("--beta", default="auto", help="'auto' or an explicit bit string")
    common.add_argument("--m0", type=int, default=None)
    common.add_argument("--c", type=float, default=None, help="window density constant")
    common.add_argument("--convention", choices=["prefix", "inclusive"], default="prefix")
    common.add_argument("--output", type=Path, default=Path("mdclt-out"))
    common.add_argument("--format", choices=["json", "csv", "both"], default="both")

    parser = argparse.ArgumentParser(prog="mdclt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="condition values over the grid")
    sub.add_parser("gordin", parents=[common], help="martingale decomposition diagnostics")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo of the normalized sum")
    p.add_argument("--dump-samples", action="store_true",
                   help="write raw samples as count-prefixed little-endian float64")
    sub.add_parser("experiment", parents=[common], help="conditions plus KS distance per n")
    p = sub.add_parser("verify", parents=[common], help="randomized inequality suites")
    p.add_argument("--instances", type=int, default=1000)
    return parser


class _Run:
    def __init__(self, args):
        self.args = args
        if args.replicates < 1:
            raise ValidationError(f"must be >= 1, got {args.replicates}", "replicates")
        self.family = None
        if args.input is not None:
            chain = load_chain(args.input)
            self.scheme = ArrayScheme(generator=lambda n, c=chain: c, grid=(chain.n,),
                                      name=args.input.stem)
            self.family = None
        else:
            fam = args.family or "A"
            self.family = FamilyParams(fam, gamma=args.gamma, lam=args.lam, period=args.period,
                                       skew=args.skew)
            self.scheme = make_scheme(self.family, args.grid)
            if not self.scheme.grid:
                raise ValidationError("grid must be non-empty", "grid")
        m0, c = args.m0, args.c
        if self.family is not None and self.family.family == "B":
            default = family_h_beta_params(self.family)
        else:
            default = HBetaParams(4, 0.25)
        self.h = HBetaParams(m0 if m0 is not None else default.m0,
                             c if c is not None else default.c)
        self.betas = None
        if args.beta != "auto":
            if args.input is None:
                raise ValidationError("an explicit bit string needs --input (one horizon)",
                                      "beta")
            beta = BetaSequence.from_bitstring(args.beta)
            self.betas = {self.scheme.grid[0]: beta}
        self.out = args.output
        self.out.mkdir(parents=True, exist_ok=True)

    def conditions(self) -> ConditionReport:
        # an explicit --beta overrides; otherwise each n searches for a witness
        return evaluate_conditions(self.scheme, self.betas or (lambda n: None), self.h,
                                   self.args.variant, self.args.convention,
                                   max_workers=default_workers())

    def want(self, kind: str) -> bool:
        return self.args.format in (kind, "both")

    def write(self, name: str, text: str):
        (self.out / name).write_text(text)

    def metadata(self):
        meta = {"command": self.args.command, "argv": sys.argv[1:], "version": __version__,
                "created": datetime.now(timezone.utc).isoformat()}
        self.write("metadata.json", json.dumps(meta, indent=2))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def run_check(run: _Run) -> int:
    report = run.conditions()
    if run.want("json"):
        run.write("conditions.json", report.to_json())
    if run.want("csv"):
        run.write("conditions.csv", report.to_csv())
    for r in report.records:
        print(f"n={r.n:>6}  dobrushin={r.dobrushin_value:.6g}  theorem1={r.theorem1_value:.6g}  "
              f"corollary2={r.corollary2_value:.6g}  h_beta_ok={r.h_beta_ok}")
    return EXIT_OK


GORDIN_COLS = ("n", "var_Sn", "var_Z1", "norm_ratio", "xi_sup", "osc_tail_sup", "a_value",
               "b_value")


def run_gordin(run: _Run) -> int:
    rows = []
    for n in run.scheme.grid:
        chain = center_observables(run.scheme.chain(n))
        try:
            rows.append(summary(chain))
        except DegenerateChainError as exc:
            rows.append({"n": n, "warning": str(exc)})
    trends = {k: trend([r.get(k, math.nan) for r in rows]) for k in GORDIN_COLS[1:]}
    if run.want("json"):
        run.write("gordin.json", json.dumps({"rows": rows, "trends": trends}, indent=2))
    if run.want("csv"):
        run.write("gordin.csv", _csv(GORDIN_COLS, [[r.get(k, math.nan) for k in GORDIN_COLS]
                                                   for r in rows]))
    for r in rows:
        print(f"n={r['n']:>6}  " + ("  ".join(f"{k}={r[k]:.6g}" for k in GORDIN_COLS[3:])
                                    if "warning" not in r else r["warning"]))
    return EXIT_OK


def _chunk(replicates: int) -> int | None:
    w = default_workers()
    if w <= 1:
        return None
    size = -(-replicates // w)
    return size + (-size) % 4


def run_simulate(run: _Run) -> int:
    a = run.args
    results = []
    for n in run.scheme.grid:
        try:
            res = sample_statistic(run.scheme.chain(n), a.replicates, a.seed,
                                   chunk_size=_chunk(a.replicates))
        except DegenerateChainError as exc:
            results.append({"n": n, "warning": str(exc)})
            continue
        results.append(res.to_dict(include_samples=False))
        if a.dump_samples:
            write_samples(run.out / f"samples_n{n}.bin", res.samples)
        print(f"n={n:>6}  ks={res.ks_distance:.6g}  mean={res.mean:.4g}  var={res.variance:.4g}")
    cols = ("n", "replicates", "seed", "ks_distance", "mean", "variance")
    if run.want("json"):
        run.write("simulation.json", json.dumps(results, indent=2))
    if run.want("csv"):
        run.write("simulation.csv", _csv(cols, [[r.get(k, math.nan) for k in cols]
                                               for r in results]))
    return EXIT_OK


EXPERIMENT_COLS = ("n", "alpha_n", "alpha_beta", "sum_var", "var_Sn", "dobrushin_value",
                   "theorem1_value", "corollary2_value", "h_beta_ok", "ks_distance",
                   "replicates", "warning")


def run_experiment(run: _Run) -> int:
    a = run.args
    report = run.conditions()
    rows = []
    for rec in report.records:
        row = {k: getattr(rec, k) for k in EXPERIMENT_COLS if hasattr(rec, k)}
        row.update(replicates=a.replicates, warning="")
        try:
            res = sample_statistic(run.scheme.chain(rec.n), a.replicates, a.seed,
                                   chunk_size=_chunk(a.replicates))
            row["ks_distance"] = res.ks_distance
        except DegenerateChainError as exc:
            row["ks_distance"] = math.nan
            row["warning"] = str(exc)
        rows.append(row)
        print(f"n={rec.n:>6}  ks={row['ks_distance']:.6g}  dobrushin={rec.dobrushin_value:.6g}  "
              f"corollary2={rec.corollary2_value:.6g}")
    trends = dict(report.trends)
    trends["ks_distance"] = trend([r["ks_distance"] for r in rows])
    summary_doc = {"scheme": report.scheme, "variant": report.variant, "seed": a.seed,
                   "replicates": a.replicates, "kappa_convention": report.kappa_convention,
                   "m0": report.m0, "density_c": report.density_c, "rows": rows,
                   "trends": trends, "footnotes": report.footnotes}
    if run.want("json"):
        run.write("experiment.json", json.dumps(summary_doc, indent=2))
    if run.want("csv"):
        run.write("experiment.csv", _csv(EXPERIMENT_COLS, [[r[k] for k in EXPERIMENT_COLS]
                                                          for r in rows]))
    return EXIT_OK


def run_verify(run: _Run) -> int:
    a = run.args
    if a.instances < 0:
        raise ValidationError(f"must be >= 0, got {a.instances}", "instances")
    records = run_suite(a.instances, a.seed)
    if a.input is not None:
        chain = center_observables(run.scheme.chain(run.scheme.grid[0]))
        if chain.n >= 2:
            if run.betas:
                beta = next(iter(run.betas.values()))
            else:
                found = search_beta(chain, run.h, convention=a.convention)
                beta = found[0] if found else BetaSequence.ones(chain.n)
            records += [(-1, r) for r in lemma1_bounds(chain, beta, seed=a.seed)]
            lhs, rhs, _ = variance_lower_bound_check(chain)
            records.append((-1, BoundRecord.lower("variance_lower", (), lhs, rhs)))
    failures = [(i, r) for i, r in records if not r.ok]
    by_lemma: dict[str, dict] = {}
    for _, r in records:
        s = by_lemma.setdefault(r.lemma, {"records": 0, "failures": 0, "min_margin": math.inf})
        s["records"] += 1
        s["failures"] += int(not r.ok)
        s["min_margin"] = min(s["min_margin"], r.margin)
    doc = {"seed": a.seed, "instances": a.instances, "records": len(records),
           "failures": len(failures), "by_lemma": by_lemma}
    if run.want("csv"):
        run.write("bounds.csv", records_to_csv(records))
    if run.want("json"):
        run.write("verify.json", json.dumps(doc, indent=2))
    for name, s in sorted(by_lemma.items()):
        print(f"{name:<16} records={s['records']:<6} failures={s['failures']:<3} "
              f"min_margin={s['min_margin']:.3g}")
    return EXIT_FAIL if failures else EXIT_OK


COMMANDS = {"check": run_check, "gordin": run_gordin, "simulate": run_simulate,
            "experiment": run_experiment, "verify": run_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _Run(args)
        code = COMMANDS[args.command](run)
        run.metadata()
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

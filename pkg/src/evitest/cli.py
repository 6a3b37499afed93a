"""Command-line front end.

Exit codes: 0 the command ran (whatever the decision), 2 parameter error,
3 data or domain error, 4 numerical singularity.
"""

import argparse
import logging
import math
import sys

import numpy as np

from . import __version__
from .dataset import export_csv, ingest_csv
from .dependence import load_omega
from .errors import DomainError, ParameterError, ParseError, SingularityError
from .hill import KChoice
from .maxtest import NullSpec
from .mc import TESTS, ExperimentConfig, compare_tables, load_reference, read_report_csv, run_experiment
from .report import FORMATS, TestRun, render
from .simulate import MODELS, ModelSpec, SeedSpec, draw_alternative, generate
from .sweep import hill_intervals, run_tests, sweep_k

log = logging.getLogger("evitest")

EXIT_OK, EXIT_PARAM, EXIT_DATA, EXIT_SINGULAR = 0, 2, 3, 4


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


def read_gamma0(path, p):
    vals = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok or tok.startswith("#"):
                continue
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(f"gamma0 entry {tok!r} is not a number", row=lineno) from None
            if not (math.isfinite(v) and v > 0):
                raise ParseError(f"gamma0 entry {tok!r} must be a positive real", row=lineno)
            vals.append(v)
    if len(vals) != p:
        raise ParameterError(f"gamma0 file has {len(vals)} entries but the data has p={p} columns")
    return vals


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(args):
    transform = "negate" if args.negate else args.transform
    ds = ingest_csv(args.data, header=False if args.no_header else "auto", transform=transform)
    null = NullSpec.equal() if args.equal else NullSpec.specified(read_gamma0(args.gamma0, ds.p))
    omega = load_omega(args.omega_file, ds.p) if args.omega_file else None
    return ds, null, omega


def cmd_test(args):
    ds, null, omega = _load(args)
    est, reports = run_tests(ds.matrix, KChoice.uniform(args.k, ds.p, ds.n), null, args.tests,
                             args.alpha, args.ridge, omega)
    run = TestRun(list(ds.column_names), args.k, null.kind,
                  None if null.is_equal else list(null.gamma0), est.gamma_hat, est.thresholds,
                  reports, args.ci_level,
                  {"data": args.data, "transform": ds.transform, "n": ds.n, "p": ds.p,
                   "ridge": args.ridge, "omega_file": args.omega_file})
    _write(render(run, args.format), args.out)
    for r in reports:
        log.info("%s: statistic=%.6g p-value=%.4g %s", r.test, r.statistic, r.p_value,
                 "reject" if r.reject else "do not reject")
    return EXIT_OK


def cmd_sweep(args):
    ds, null, omega = _load(args)
    k_max = args.k_max if args.k_max is not None else min(ds.n - 1, max(args.k_min, ds.n // 5))
    res = sweep_k(ds.matrix, args.k_min, k_max, args.step, null, args.tests, args.alpha,
                  args.ridge, omega)
    res.column_names = list(ds.column_names)
    ci_k = args.ci_k if args.ci_k is not None else res.k_grid[0]
    res.hill_ci = hill_intervals(ds.matrix, ci_k, args.ci_level)
    _write(render(res, args.format), args.out)
    return EXIT_OK


def cmd_simulate(args):
    gamma = None
    if args.gamma_file:
        gamma = read_gamma0(args.gamma_file, args.p)
    elif args.gamma is not None:
        gamma = [args.gamma] * args.p
    if args.alternative:
        if args.k is None:
            raise ParameterError("--alternative needs --k")
        ks = KChoice.uniform(args.k, args.p, args.n)
        gamma, alt = draw_alternative(args.p, ks, SeedSpec(args.seed, args.stream), 1)
        log.info("alternative support %s deltas %s", alt.support, alt.deltas)
    spec = ModelSpec(args.model, args.n, args.p, gamma, frechet_exponent=args.frechet_exponent)
    x, diag = generate(spec, SeedSpec(args.seed, args.stream), 0, return_diagnostics=True)
    if diag["saturated"]:
        log.warning("%d values saturated to the largest finite float", diag["saturated"])
    if args.out in (None, "-"):
        export_csv(x, "/dev/stdout")
    else:
        export_csv(x, args.out)
    return EXIT_OK


def cmd_mc(args):
    cfg = ExperimentConfig(
        models=tuple(args.models), tests=tuple(args.tests), n=args.n, p_values=tuple(args.p),
        k_values=tuple(args.k), alpha=args.alpha, replications=args.reps,
        hypothesis=args.hypothesis, master_seed=args.seed, ridge=args.ridge,
        fixed_alternative=args.fixed_alternative, frechet_exponent=args.frechet_exponent)

    def progress(model, p, k):
        log.info("finished model %s p=%d k=%d", model, p, k)

    rep = run_experiment(cfg, threads=args.threads, progress=progress)
    fmt = args.format or "csv"
    if fmt not in ("csv", "json"):
        raise ParameterError("mc reports are csv or json")
    _write(rep.to_csv() if fmt == "csv" else rep.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_compare(args):
    with open(args.report, encoding="utf-8") as fh:
        rep = read_report_csv(fh.read())
    cmp = compare_tables(rep, load_reference(args.reference), args.tol, args.skip_unmatched)
    lines = ["model,test,p,k,hypothesis,observed,reference,deviation,flag"]
    for r in cmp.rows:
        lines.append(f"{r['model']},{r['test']},{r['p']},{r['k']},{r['hypothesis']},"
                     f"{r['observed']:.4f},{r['reference']:.2f},{r['deviation']:.4f},"
                     f"{'FLAG' if r['flag'] else 'ok'}")
    lines.append(f"# max deviation {cmp.max_deviation:.4f}; {cmp.flagged} of {len(cmp.rows)} "
                 f"cells beyond tolerance {cmp.tolerance}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _add_data_args(sp):
    sp.add_argument("data", help="CSV file, one column per dimension")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--gamma0", metavar="FILE", help="H0: one positive index per line")
    g.add_argument("--equal", action="store_true", help="H0*: all indices equal")
    sp.add_argument("--tests", default="max", help="comma list of max, wald, omega (default: max)")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--ridge", type=float, default=0.0,
                    help="added to the tail-dependence diagonal before inversion")
    sp.add_argument("--omega-file", help="precision matrix for the omega test (p rows of p reals)")
    sp.add_argument("--negate", action="store_true", help="multiply all cells by -1 (returns -> losses)")
    sp.add_argument("--transform", choices=("none", "negate", "upper_tail_of_loss"), default="none")
    sp.add_argument("--no-header", action="store_true")
    sp.add_argument("--ci-level", type=float, default=0.95)
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--format", choices=FORMATS, default="json")


def build_parser():
    ap = argparse.ArgumentParser(prog="evitest", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"evitest {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("test", help="test H0 or H0* on a dataset at one k")
    _add_data_args(sp)
    sp.add_argument("--k", type=int, required=True, help="number of upper order statistics")
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("sweep-k", help="p-values over a grid of k")
    _add_data_args(sp)
    sp.add_argument("--k-min", type=int, default=10)
    sp.add_argument("--k-max", type=int)
    sp.add_argument("--step", type=int, default=1)
    sp.add_argument("--ci-k", type=int, help="k for the Hill confidence panel (default: k-min)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="draw one sample from model A-D and write CSV")
    sp.add_argument("--model", choices=MODELS, required=True)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--p", type=int, default=50)
    sp.add_argument("--gamma", type=float, help="common true index (default 1)")
    sp.add_argument("--gamma-file", help="true indices, one per line")
    sp.add_argument("--alternative", action="store_true", help="draw a sparse alternative")
    sp.add_argument("--k", type=int, help="k used to size the alternative deviations")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stream", type=int, default=0)
    sp.add_argument("--frechet-exponent", choices=("inverse", "direct"), default="inverse")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("mc", help="Monte Carlo size/power experiment")
    sp.add_argument("--models", type=_csv_list(str), default=list(MODELS))
    sp.add_argument("--tests", type=_csv_list(str), default=["T"],
                    help=f"comma list from {','.join(TESTS)}")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--p", type=_csv_list(int), default=[50, 80, 100])
    sp.add_argument("--k", type=_csv_list(int), default=[50, 80])
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--hypothesis", choices=("null", "alternative"), default="null")
    sp.add_argument("--seed", type=int, default=20240101)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--ridge", type=float, default=0.0)
    sp.add_argument("--fixed-alternative", action="store_true",
                    help="draw the alternative once instead of per replication")
    sp.add_argument("--frechet-exponent", choices=("inverse", "direct"), default="inverse")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("compare-tables", help="compare an mc CSV report with reference tables")
    sp.add_argument("report")
    sp.add_argument("--reference", help="reference CSV (default: bundled Tables 1-2)")
    sp.add_argument("--tol", type=float, default=0.03)
    sp.add_argument("--skip-unmatched", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_compare)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except SingularityError as exc:
        log.error("%s", exc)
        return EXIT_SINGULAR
    except ParameterError as exc:
        log.error("%s", exc)
        return EXIT_PARAM
    except (ParseError, DomainError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

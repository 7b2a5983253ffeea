"""Command-line entry point: ``ordagree {estimate,compare,bootstrap,simulate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .comparison import compare
from .fileio import ParsedRatings, atomic_write_text, parse_matrix_csv, parse_study_config
from .index import DomainError, RatingMatrix, estimate_agreement
from .inference import METHODS, normal_interval, test_d_leq
from .resampling import (
    SCHEMES,
    BootstrapScheme,
    DegenerateResamplingError,
    bootstrap_distribution,
    bootstrap_t_interval,
    percentile_interval,
    pivotal_interval,
)
from .simulation import export_report, generate_population, run_study

log = logging.getLogger("ordagree")


def _groups(parsed: ParsedRatings) -> list[tuple[str, RatingMatrix]]:
    out = list(parsed.by_group().items())
    out.append(("Total", parsed.matrix))
    return out


def _interval_dict(iv, clip: bool) -> dict:
    if clip:
        iv = iv.clipped()
    return {"method": iv.method, "lower": iv.lower, "upper": iv.upper, "level": iv.level,
            "n_dropped": iv.n_dropped}


def _table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _emit(args, payload: dict, table: str) -> None:
    print(table)
    if args.output:
        atomic_write_text(args.output, json.dumps(payload, indent=2) + "\n")
        print(f"report written to {args.output}")


def _load(args) -> ParsedRatings:
    return parse_matrix_csv(args.input, K=args.k, group_column=args.group_column, transpose=args.transpose)


def _seed(args) -> int:
    seed = args.seed if args.seed is not None else int(np.random.SeedSequence().entropy % 2**63)
    print(f"seed: {seed}")
    return seed


def cmd_estimate(args) -> None:
    parsed = _load(args)
    payload, rows = {"command": "estimate", "K": parsed.matrix.K, "groups": []}, []
    for label, m in _groups(parsed):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            est = estimate_agreement(m)
        iv = normal_interval(est, args.level, clip=args.clip_intervals)
        tests = [test_d_leq(est, d0, args.alpha) for d0 in args.d0]
        payload["groups"].append({
            "group": label, "n_T": est.n_T, "n_R": est.n_R,
            "d_hat": est.d_hat, "d_hat_star": est.d_hat_star, "var_hat": est.var_hat,
            "exceeds_one": est.exceeds_one,
            "warnings": [str(w.message) for w in caught],
            "interval": _interval_dict(iv, False),
            "tests": [{"d0": t.d0, "alpha": t.alpha, "threshold": t.threshold,
                       "statistic": t.statistic, "reject": t.reject} for t in tests],
        })
        rows.append([label, est.n_T, est.n_R, est.d_hat, est.d_hat_star, est.se, iv.lower, iv.upper]
                    + ["reject" if t.reject else "accept" for t in tests])
    headers = ["group", "n_T", "n_R", "d_hat", "d_hat*", "se", "lower", "upper"]
    headers += [f"H0:d<={d0:g}" for d0 in args.d0]
    _emit(args, payload, _table(headers, rows))


def cmd_compare(args) -> None:
    parsed = _load(args)
    payload, rows = {"command": "compare", "K": parsed.matrix.K, "groups": []}, []
    for label, m in _groups(parsed):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = estimate_agreement(m)
            rep = compare(m, group_label=label, ddof=args.ddof)
        payload["groups"].append({
            "group": label, "N": m.n_T, "icc_a1": rep.icc_a1, "r_wg": rep.r_wg_mean,
            "cv_percent": rep.cv_mean_percent, "d_hat": est.d_hat, "d_hat_star": est.d_hat_star,
        })
        rows.append([label, m.n_T, rep.icc_a1, rep.r_wg_mean, rep.cv_mean_percent, est.d_hat, est.d_hat_star])
    _emit(args, payload, _table(["group", "N", "ICC(A,1)", "r_WG", "CV%", "d_hat", "d_hat*"], rows))


def cmd_bootstrap(args) -> None:
    parsed = _load(args)
    m = parsed.matrix
    seed = _seed(args)
    sizes = None
    if args.scheme == "pseudo_population":
        if args.population_targets is None or args.population_raters is None:
            raise DomainError("pseudo_population needs --population-targets and --population-raters")
        sizes = (args.population_targets, args.population_raters)
    est = estimate_agreement(m)
    reps = bootstrap_distribution(m, BootstrapScheme(args.scheme, sizes), args.B, seed=seed)
    methods = args.method or list(METHODS)
    intervals, rows = [], []
    for method in methods:
        if method == "normal":
            iv = normal_interval(est, args.level)
        elif method == "percentile":
            iv = percentile_interval(reps, args.level)
        elif method == "pivotal":
            iv = pivotal_interval(reps, est, args.level)
        else:
            try:
                iv = bootstrap_t_interval(reps, est, args.level)
            except DegenerateResamplingError as exc:
                print(f"bootstrap_t skipped: {exc}", file=sys.stderr)
                continue
        out = iv.clipped() if args.clip_intervals else iv
        intervals.append(_interval_dict(out, False))
        rows.append([method, out.lower, out.upper, out.length])
    payload = {
        "command": "bootstrap", "scheme": args.scheme, "B": args.B, "seed": seed,
        "d_hat": est.d_hat, "d_hat_star": est.d_hat_star, "var_hat": est.var_hat,
        "bootstrap_mean": float(reps.estimates.mean()), "intervals": intervals,
    }
    _emit(args, payload, _table(["method", "lower", "upper", "length"], rows))


def cmd_simulate(args) -> None:
    pop_spec, cfg, workers = parse_study_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, seed=args.seed)
    if args.workers is not None:
        workers = args.workers
    print(f"seed: {cfg.seed}  population seed: {pop_spec.seed}")
    pop = generate_population(pop_spec)
    rep = run_study(pop, cfg, workers=workers)
    rows = [[r["scheme"], r["method"], r["ECP"], r["LE"], r["RE"], r["AL"]] for r in rep.rows()]
    print(f"population d: {rep.population_d:.4f}")
    print(_table(["scheme", "method", "ECP", "LE", "RE", "AL"], rows))
    for scheme, value in rep.bias.items():
        print(f"mean bootstrap d* ({scheme}): {value:.4f}")
    if args.output:
        paths = export_report(rep, args.output, raw=args.raw)
        for kind, path in paths.items():
            print(f"{kind}: {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordagree", description="Ordinal interrater agreement via the Leti index.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="ratings CSV (rows = targets, columns = raters)")
        p.add_argument("--k", type=int, default=None, help="number of scale levels (inferred if omitted)")
        p.add_argument("--group-column", default="group")
        p.add_argument("--transpose", action="store_true", help="rows are raters, columns are targets")
        p.add_argument("--level", type=float, default=0.95)
        p.add_argument("--clip-intervals", action="store_true", help="clip interval endpoints to [0, 1]")
        p.add_argument("--output", type=Path, default=None, help="write a JSON report here")
        return p

    p = data_command("estimate", "point estimate, normal interval and one-sided tests")
    p.add_argument("--d0", type=float, action="append", default=None, help="test H0: d <= d0 (repeatable)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_estimate)

    p = data_command("compare", "ICC(A,1), r_WG, CV%% next to d_hat and d_hat*")
    p.add_argument("--ddof", type=int, default=1, choices=(0, 1), help="variance divisor n - ddof")
    p.set_defaults(func=cmd_compare)

    p = data_command("bootstrap", "bootstrap intervals under one resampling scheme")
    p.add_argument("--scheme", choices=SCHEMES, default="nonparametric")
    p.add_argument("--method", choices=METHODS, action="append", default=None)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--population-targets", type=int, default=None)
    p.add_argument("--population-raters", type=int, default=None)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("simulate", help="coverage study from a key-value config file")
    p.add_argument("config", type=Path)
    p.add_argument("--seed", type=int, default=None, help="overrides the config's study seed")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", type=Path, default=None, help="directory for CSV/JSON reports")
    p.add_argument("--raw", action="store_true", help="also dump per-sample estimates")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "d0", None) is None and args.command == "estimate":
        args.d0 = [0.0]
    try:
        args.func(args)
    except (DomainError, OSError) as exc:
        print(f"ordagree {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 failed
verification or inequality check.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bounds import BoundReport, check_lemma1, check_lemma2, lai_robbins_lower_bound, theorem1_bound, theorem2_bound
from .config import PRESETS, ExperimentConfig, apply_preset, load_config, with_variant
from .errors import BanditError, ConfigError
from .sim import EnsembleResult, run_ensemble, verify_bounds

log = logging.getLogger("corrucl")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_FAILED = 0, 1, 2, 3

REGRET_HEADER = ["t", "mean_cum_regret", "sem", "lai_robbins_lb"]
BOUNDS_HEADER = ["arm", "delta_i", "delta_m_i", "case", "eta_i", "nhat_i", "bound_total"]
VERIFY_HEADER = ["arm", "empirical_n_i", "bound", "satisfied"]


def fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def regret_rows(ens: EnsembleResult, lower: np.ndarray):
    mean, sem = ens.mean_cum_regret, ens.sem
    return [[t + 1, fmt(mean[t]), fmt(sem[t]), fmt(lower[t])] for t in range(ens.horizon)]


def bound_rows(report: BoundReport):
    return [[r.arm, fmt(r.gap), fmt(r.prior_error), r.case, r.eta, fmt(r.nhat), fmt(r.bound)] for r in report.rows]


def compute_bounds(cfg: ExperimentConfig) -> BoundReport:
    inst = cfg.instance()
    prior = cfg.gaussian_prior(inst)
    params = cfg.bound_params()
    variant = cfg.prior.variant
    if variant == "uncorrelated":
        return theorem1_bound(inst, prior, params, cfg.run.T)
    if variant == "correlated":
        return theorem2_bound(inst, prior, params, cfg.policy.nu, cfg.run.T)
    raise ConfigError("prior.variant", "regret bounds need an informative prior (uncorrelated or correlated)")


def _config(args) -> ExperimentConfig:
    return apply_preset(load_config(args.config), args.preset)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    exp = cfg.experiment()
    ens = run_ensemble(exp, workers=args.threads)
    lower = lai_robbins_lower_bound(exp.instance, exp.T)
    _write_csv(args.out, REGRET_HEADER, regret_rows(ens, lower))
    if ens.violations:
        log.warning("%d invariant violations logged; first: %s", len(ens.violations), ens.violations[0])
    if args.plot:
        from .plotting import regret_figure

        t = np.arange(1, exp.T + 1)
        regret_figure(args.plot, t, {cfg.prior.variant: (ens.mean_cum_regret, ens.sem)}, lower)
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = _config(args)
    report = compute_bounds(cfg)
    _write_csv(args.out, BOUNDS_HEADER, bound_rows(report))
    log.info("regret upper bound sum_i gap_i (eta_i + nhat_i) = %s", fmt(report.total))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    report = compute_bounds(cfg)
    # The bounds hold for the policy run with the same a as the bound.
    exp = cfg.experiment(policy_a=cfg.bounds.a)
    ens = run_ensemble(exp, workers=args.threads)
    table = verify_bounds(ens, report)
    rows = [[r.arm, fmt(r.empirical_n), fmt(r.bound), str(r.satisfied).lower()] for r in table.rows]
    _write_csv(args.out, VERIFY_HEADER, rows)
    return EXIT_OK if table.passed else EXIT_FAILED


def cmd_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    reports = [check_lemma1(points=args.points), check_lemma2(args.samples, rng)]
    text = "\n".join(r.summary() for r in reports) + "\n"
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_compare(args) -> int:
    """Run all three prior variants on one scenario; wide CSV plus figure."""
    cfg = _config(args)
    variants = ("uninformative", "uncorrelated", "correlated")
    results = {}
    for v in variants:
        exp = with_variant(cfg, v).experiment()
        results[v] = run_ensemble(exp, workers=args.threads)
        log.info("%s: final mean cumulative regret %s", v, fmt(results[v].mean_cum_regret[-1]))
    inst = cfg.instance()
    lower = lai_robbins_lower_bound(inst, cfg.run.T)
    header = ["t"] + [f"{v}_{k}" for v in variants for k in ("mean", "sem")] + ["lai_robbins_lb"]
    rows = []
    for t in range(cfg.run.T):
        row = [t + 1]
        for v in variants:
            row += [fmt(results[v].mean_cum_regret[t]), fmt(results[v].sem[t])]
        rows.append(row + [fmt(lower[t])])
    _write_csv(args.out, header, rows)
    if args.plot:
        from .plotting import regret_figure

        series = {v: (results[v].mean_cum_regret, results[v].sem) for v in variants}
        regret_figure(args.plot, np.arange(1, cfg.run.T + 1), series, lower, title=args.preset)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrucl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot=True):
        p.add_argument("--config", help="JSON experiment config (defaults apply when omitted)")
        p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
        p.add_argument("--preset", choices=PRESETS, help="override the prior block with a standard scenario")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes for ensembles")
        if plot:
            p.add_argument("--plot", help="write a regret figure (format from extension: .png, .svg, .pdf)")

    common(sub.add_parser("simulate", help="ensemble mean cumulative regret"))
    common(sub.add_parser("bounds", help="evaluate the regret upper bounds"), plot=False)
    common(sub.add_parser("verify", help="compare simulated selection counts with the bounds"), plot=False)
    common(sub.add_parser("compare", help="all three prior variants on one scenario"))
    p = sub.add_parser("check", help="numeric sweeps of the supporting inequalities")
    p.add_argument("--out", default="-")
    p.add_argument("--points", type=int, default=10_000, help="grid points per tail/quantile inequality")
    p.add_argument("--samples", type=int, default=1_000_000, help="random tuples for the difference-of-squares sweep")
    p.add_argument("--seed", type=int, default=0, help="seed for the random sweep")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "check": cmd_check,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        log.error("--threads must be >= 1")
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (BanditError, ValueError) as exc:
        # Bound preconditions and similar parameter problems.
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.exception("runtime error: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``htrl run <command> [options]``."""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import config as cfgmod
from .empirical_process import (IntervalConstraint, multiplier_bound, multiplier_sup_mc,
                                rademacher_majorant, rademacher_sup_mc)
from .estimators import PiecewiseConstantFn, RegressionData
from .noise_models import law_from_config
from .rate_lab import (ExperimentSpec, counterexample_dependent, fit_rate_exponent,
                       fn_en_profile, interval_lse_risk, lasso_experiment, phase_diagram,
                       profile_argmax, resolve_threads, run_risk_curve)
from .rate_lab.harness import RiskCurve
from .rng import make_rng

EXIT_OK, EXIT_CRITERION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def truth_from_config(rec, level_bound=1.0):
    kind = rec.get("kind")
    if kind == "zero":
        return PiecewiseConstantFn.constant(0.0, level_bound)
    if kind == "constant":
        return PiecewiseConstantFn.constant(float(rec["value"]), level_bound)
    if kind == "staircase":
        # increasing steps strictly inside (-level_bound, level_bound)
        steps = int(rec["steps"])
        levels = np.linspace(-level_bound, level_bound, steps + 2)[1:-1]
        return PiecewiseConstantFn(np.linspace(0.0, 1.0, steps + 1), levels, level_bound)
    if kind == "steps":
        return PiecewiseConstantFn(np.array(rec["breakpoints"], dtype=float),
                                   np.array(rec["levels"], dtype=float), level_bound)
    raise ValueError(f"unknown truth kind {kind!r}")


def _criterion(name, target, measured, tolerance, passed):
    return {"name": name, "target": target, "measured": measured, "tolerance": tolerance,
            "pass": bool(passed)}


def _table(name, columns, rows):
    return {"name": name, "columns": list(columns), "rows": [list(r) for r in rows]}


def _curve_table(name, curve):
    return _table(name, ["n", "mean_risk", "stderr", "reps", "excluded"], curve.rows)


def _window(name, measured, lo, hi):
    return _criterion(name, [lo, hi], measured, 0.5 * (hi - lo), lo <= measured <= hi)


# -- commands ---------------------------------------------------------------

def cmd_mep_growth(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    rows = []
    law = law_from_config(ex["noise"])
    for n in ex["n_grid"]:
        a = float(ex["max_len_exponent"])
        c = IntervalConstraint(0.0, min(1.0, n ** -a)) if a > 0 else IntervalConstraint()
        if ex["weights"] == "rademacher":
            mean, se = rademacher_sup_mc(n, c, ex["reps"], rc.seed)
        elif ex["weights"] == "multiplier":
            mean, se = multiplier_sup_mc(law, n, c, ex["reps"], rc.seed)
        else:
            raise ValueError(f"experiment.weights must be 'multiplier' or 'rademacher'")
        rows.append((n, mean, se, ex["reps"], rc.seed, c.min_len, c.max_len))
    curve = RiskCurve(tuple((r[0], r[1], r[2], r[3], 0) for r in rows))
    fit = fit_rate_exponent(curve)
    tables = [_table("mep_growth", ["n", "mean", "stderr", "reps", "seed", "constraint_min",
                                    "constraint_max"], rows)]
    crit = [_window("log_log_slope", fit.slope, cr["slope_min"], cr["slope_max"])]
    return tables, crit, {"fit": fit.to_dict()}


def cmd_lse_rate(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    lb = float(ex["level_bound"])
    spec = ExperimentSpec(ex["estimator"], law_from_config(ex["noise"]), tuple(ex["n_grid"]),
                          int(ex["reps"]), rc.seed, truth_from_config(ex["truth"], lb), lb,
                          int(ex["k"]), ex["min_len"], float(ex["rule_alpha"]),
                          float(ex["rule_p"]))
    curve = run_risk_curve(spec, threads)
    fit = fit_rate_exponent(curve, min_n=ex["min_n"])
    e = fit.exponent
    lo, hi = cr["target"] - cr["below"], cr["target"] + cr["above"]
    ok = e >= lo if cr["one_sided"] else lo <= e <= hi
    crit = [_criterion("rate_exponent", cr["target"], e,
                       cr["below"] if cr["one_sided"] else [cr["below"], cr["above"]], ok)]
    excluded = sum(r[4] for r in curve.rows)
    return [_curve_table("risk_curve", curve)], crit, {"fit": fit.to_dict(),
                                                       "excluded": excluded}


def cmd_phase_diagram(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    template = ExperimentSpec("isotonic", law_from_config({"kind": "gaussian"}),
                              tuple(ex["n_grid"]), int(ex["reps"]), rc.seed,
                              truth_from_config(ex["truth"]))
    cells = phase_diagram(ex["alphas"], [float(p) for p in ex["ps"]], template,
                          cr["tolerance"], ex["min_n"], ex["margin"], threads)
    rows, crit = [], []
    for cell in cells:
        d = cell.to_dict()
        rows.append((cell.alpha, d["p"], cell.estimator or "", cell.regime,
                     cell.e_theory, d["e_measured"], int(cell.two_sided),
                     "" if cell.passed is None else int(cell.passed)))
        if cell.estimator is not None:
            crit.append(_criterion(f"alpha={cell.alpha!r},p={d['p']!r}", cell.e_theory,
                                   cell.e_measured, cr["tolerance"], cell.passed))
    cols = ["alpha", "p", "estimator", "regime", "e_theory", "e_measured", "two_sided", "pass"]
    return [_table("phase_diagram", cols, rows)], crit, {"cells": [c.to_dict() for c in cells]}


def cmd_lasso(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    res = lasso_experiment(int(ex["d"]), int(ex["s"]), ex["n_grid"],
                           law_from_config(ex["design"]), law_from_config(ex["noise"]),
                           float(ex["L"]), float(ex["alpha"]), int(ex["reps"]), rc.seed,
                           threads)
    spread = res.ratio_spread()
    crit = [
        _window("prediction_error_exponent", res.fit.exponent, cr["exponent_min"],
                cr["exponent_max"]),
        _criterion("ratio_spread", cr["max_ratio_spread"], spread, 0.0,
                   spread <= cr["max_ratio_spread"]),
    ]
    tables = [_curve_table("prediction_error", res.curve),
              _table("ratios", ["n", "error_over_slogd_n", "compatibility", "error_over_bound"],
                     res.ratios)]
    excluded = sum(r[4] for r in res.curve.rows)
    return tables, crit, {"fit": res.fit.to_dict(), "excluded": excluded}


def cmd_counterexample(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    grid = ex["n_grid"]
    dep = counterexample_dependent(grid, int(ex["reps"]), rc.seed, float(ex["delta"]),
                                   "dependent", ex["design"])
    ind = counterexample_dependent(grid, int(ex["reps"]), rc.seed + 1, float(ex["delta"]),
                                   "independent", ex["design"])
    crit = [
        _window("dependent_slope", dep.fit.slope, cr["dependent_min"], cr["dependent_max"]),
        _criterion("dependent_slope_above", cr["dependent_above"], dep.fit.slope, 0.0,
                   dep.fit.slope > cr["dependent_above"]),
        _window("independent_slope", ind.fit.slope, cr["independent_min"],
                cr["independent_max"]),
    ]
    tables = [_curve_table("dependent", dep.curve), _curve_table("independent", ind.curve)]
    return tables, crit, {"dependent_fit": dep.fit.to_dict(),
                          "independent_fit": ind.fit.to_dict(), "reference_slope": -0.5}


def cmd_bound_check(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    grid = [int(n) for n in ex["n_grid"]]
    psi, bands = rademacher_majorant(max(grid), reps=int(ex["majorant_reps"]),
                                     seed=rc.seed + 1, inflate=float(ex["inflate"]))
    rows = []
    for rec in ex["laws"]:
        law = law_from_config(rec)
        for n in grid:
            mean, se = multiplier_sup_mc(law, n, reps=int(ex["reps"]), seed=rc.seed)
            bound = multiplier_bound(psi, law, n)
            rows.append((law.kind, _tail_label(law), n, mean, se, bound,
                         int(mean <= bound + 3.0 * se)))
    violations = sum(1 for r in rows if not r[-1])
    crit = [_criterion("violations", cr["max_violations"], violations, 0,
                       violations <= cr["max_violations"])]
    tables = [
        _table("bound_check", ["law", "tail_index", "n", "mc_mean", "mc_stderr",
                               "theorem_bound", "satisfied"], rows),
        _table("majorant", ["k", "value"], psi.knots()),
        _table("rademacher_bands", ["k", "mean", "stderr", "upper"], bands),
    ]
    return tables, crit, {}


def _tail_label(law):
    t = law.tail_index
    return t if math.isfinite(t) else "inf"


def cmd_fn_en(rc, threads):
    ex, cr = rc.experiment, rc.criteria
    law = law_from_config(ex["noise"])
    grid = np.linspace(0.0, 1.0, int(ex["grid_points"]))
    step = float(grid[1] - grid[0])
    rows = []
    for inst in range(int(ex["instances"])):
        rng = make_rng(rc.seed, inst)
        n = int(rng.integers(int(ex["n_min"]), int(ex["n_max"]) + 1))
        min_len = float(ex["min_lens"][inst % len(ex["min_lens"])])
        x = rng.random(n)
        xi = law.draw(rng, n)
        data = RegressionData(x, xi, xi)
        top = profile_argmax(fn_en_profile(data, grid, min_len))
        risk = interval_lse_risk(data, min_len)
        rows.append((inst, n, min_len, top, risk, int(abs(top - risk) <= step + 1e-12)))
    mismatches = sum(1 for r in rows if not r[-1])
    crit = [_criterion("argmax_mismatches", cr["max_mismatches"], mismatches, step,
                       mismatches <= cr["max_mismatches"])]
    cols = ["instance", "n", "min_len", "argmax_F_n", "lse_risk", "match"]
    return [_table("fn_en", cols, rows)], crit, {"grid_step": step}


COMMAND_FUNCS = {
    "mep-growth": cmd_mep_growth,
    "lse-rate": cmd_lse_rate,
    "phase-diagram": cmd_phase_diagram,
    "lasso": cmd_lasso,
    "counterexample": cmd_counterexample,
    "bound-check": cmd_bound_check,
    "fn-en": cmd_fn_en,
}


# -- output ---------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, table):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(table["columns"]) + "\n")
        for row in table["rows"]:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def emit_summary(rc, tables, criteria, extra=None):
    """The JSON summary document as a string (sorted keys, trailing newline)."""
    doc = {
        "command": rc.command,
        "config_echo": rc.echo(),
        "config_hash": rc.content_hash(),
        "seeds": {"master": rc.seed},
        "tables": tables,
        "criteria": criteria,
    }
    if extra:
        doc["results"] = extra
    return json.dumps(_plain(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def run(command, config_path=None, overrides=(), out_dir=".", seed=None, threads=None,
        check=False, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        file_tree = cfgmod.load_file(config_path) if config_path else None
        extra = list(overrides)
        if seed is not None:
            extra.append(f"seed={int(seed)}")
        rc = cfgmod.build_config(command, file_tree, extra)
        nthreads = resolve_threads(threads)
    except (cfgmod.ConfigError, ValueError) as exc:
        print(f"htrl: error: {exc}", file=stderr)
        return EXIT_USAGE
    try:
        tables, criteria, extra_out = COMMAND_FUNCS[command](rc, nthreads)
    except (KeyError, TypeError, ValueError) as exc:
        print(f"htrl: error in config for {command}: {exc!r}", file=stderr)
        return EXIT_USAGE
    os.makedirs(out_dir, exist_ok=True)
    stem = command.replace("-", "_")
    for table in tables:
        write_csv(os.path.join(out_dir, f"{stem}__{table['name']}.csv"), table)
    with open(os.path.join(out_dir, f"{stem}.json"), "w", newline="\n") as fh:
        fh.write(emit_summary(rc, tables, criteria, extra_out))
    for c in criteria:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"[{status}] {command}: {c['name']} measured={_fmt(c['measured'])} "
              f"target={c['target']}", file=stdout)
    if check and not all(c["pass"] for c in criteria):
        return EXIT_CRITERION
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="htrl", description=__doc__)
    sub = parser.add_subparsers(dest="action", required=True)
    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("command", choices=cfgmod.COMMANDS)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--out", metavar="DIR", default=".")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", help="worker count or 'auto' (fallback: $HTRL_THREADS)")
    p.add_argument("--check", action="store_true", help="exit 1 if a criterion fails")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config key (repeatable)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    threads = args.threads
    if threads == "auto":
        threads = os.cpu_count() or 1
    return run(args.command, args.config, args.overrides, args.out, args.seed, threads,
               args.check)


if __name__ == "__main__":
    sys.exit(main())

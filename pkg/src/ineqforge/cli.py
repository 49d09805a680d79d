"""Command-line experiment runner.

::

    ineqforge run --config docs/configs/bsy-1d.json [--out out/] [--workers 4]
    ineqforge constants [--json]
    ineqforge report out/*.json

``run`` writes ``<experiment>.csv`` (columns ``param,value,stderr``) and
``<experiment>.json`` into the output directory.  Both are bitwise
reproducible for a fixed config and seed; the wall time goes to a separate
``<experiment>.timing.json`` so it does not break that.

Exit codes: 0 pass, 1 tolerance failure (or non-convergence), 2 usage error,
3 numeric failure.  ``INEQFORGE_SEED`` overrides the config seed.

Point clouds for the metric suites may be given as ``"cloud_csv"`` (rows
``x1,...,xd,mass``) or ``"distance_matrix"`` (whitespace/comma separated
symmetric matrix, uniform masses) in the config; otherwise seeded random
clouds are generated.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import corpus
from .corpus import ball_volume, builtin, k_constant

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ValueError):
    """Invalid configuration; maps to exit code 2."""


# ----------------------------------------------------------------------------
# configuration

COMMON = {"function": "gaussian", "dim": 1, "p": 2.0, "seed": 0, "rel_tol": 0.02}

DEFAULTS = {
    "bsy-1d": {"gamma": 1.0, "x_cells": 4096, "t_cells": 2048, "t_min": 1e-8,
               "sweep": {"lo": 0.3, "hi": 300.0, "points": 31}, "tolerance": 0.05,
               "two_sided": False, "two_sided_tolerance": 0.03},
    "bsy-2d": {"dim": 2, "gamma": 2.0, "samples": 20_000_000, "t_min": 1e-5, "half_width": 6.0,
               "sweep": {"lo": 1.0, "hi": 100.0, "points": 11}, "tolerance": 0.10, "rel_tol": 0.05},
    "bn-limit": {"x_cells": 2048, "t_cells": 1024, "sweep": {"lo": 1e-4, "hi": 1.0, "points": 21},
                 "tolerance": 0.05},
    "bn-bounds": {"sweep": {"lo": 1e-4, "hi": 1e3, "points": 71}, "tolerance": 0.02},
    "gu-yung": {"x_cells": 2048, "t_cells": 1024, "sweep": {"lo": 1e-4, "hi": 1.0, "points": 21},
                "tolerance": 0.05},
    "bbm": {"s": 0.99, "x_cells": 4096, "t_cells": 2048, "tolerance": 0.10},
    "higher-order": {"gamma": 1.0, "x_cells": 2048, "t_cells": 1024, "tolerance": 0.10},
    "thmph": {"function": "tent", "p": 1.0, "x_cells": 4096, "t_cells": 1024, "tolerance": 0.05},
    "campanato-identity": {"function": "tent", "s": 1.0, "x_cells": 2048, "tolerance": 0.03},
    "campanato-embed": {"s": 0.5, "x_cells": 512, "tolerance": 0.10},
    "log-bsy": {"s": 1.0, "x_cells": 4096, "t_cells": 2048, "tolerance": 0.02},
    "log-weight": {"eta": 2.0, "x_cells": 2048, "t_cells": 1024, "tolerance": 0.10},
    "cs-bsy": {"s": 0.5, "x_cells": 4096, "t_cells": 512, "tolerance": 0.05, "min_quality": 0.999},
    "heat": {"x_cells": 4096, "t_cells": 512, "tolerance": 0.05},
    "ms-weak": {"x_cells": 1024, "t_cells": 512, "tolerance": 0.10},
    "garsia-suite": {"trials": 100, "points": 64, "rho_exponent": 5.0, "seed": 1},
    "cover-suite": {"trials": 200, "points": 48, "p_values": [1.0, 2.0],
                    "sweep": {"lo": 0.1, "hi": 3.0, "points": 4}, "seed": 1},
    "mixed-norm-suite": {"trials": 200, "shape": [16, 16], "seed": 1},
}
REGISTRY = tuple(DEFAULTS)

_INT_KEYS = ("dim", "x_cells", "t_cells", "samples", "trials", "points")


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    return raw


def resolve_config(raw, env=None):
    """Merge defaults, validate and apply ``INEQFORGE_SEED``."""
    env = os.environ if env is None else env
    name = raw.get("experiment")
    if name not in DEFAULTS:
        raise UsageError(f"unknown experiment {name!r}; known: {', '.join(REGISTRY)}")
    cfg = {**COMMON, **DEFAULTS[name], **raw}
    if "INEQFORGE_SEED" in env:
        try:
            cfg["seed"] = int(env["INEQFORGE_SEED"])
        except ValueError as exc:
            raise UsageError("INEQFORGE_SEED must be an integer") from exc
    allowed = set(COMMON) | set(DEFAULTS[name]) | {"experiment", "out", "cloud_csv", "distance_matrix"}
    unknown = set(raw) - allowed
    if unknown:
        raise UsageError(f"unknown config keys for {name}: {sorted(unknown)}")
    for key in _INT_KEYS:
        if key in cfg and (not isinstance(cfg[key], (int, float)) or int(cfg[key]) != cfg[key] or cfg[key] < 1):
            raise UsageError(f"{key} must be a positive integer")
        if key in cfg:
            cfg[key] = int(cfg[key])
    p = cfg["p"]
    if not isinstance(p, (int, float)) or not math.isfinite(p) or p < 1:
        raise UsageError(f"p must satisfy p >= 1 (got {p!r})")
    if name in ("log-bsy", "ms-weak") and p <= 1:
        raise UsageError("this experiment needs p > 1")
    if cfg["function"] not in corpus.available():
        raise UsageError(f"unknown function {cfg['function']!r}; known: {corpus.available()}")
    if "s" in cfg and not 0 < cfg["s"] <= 1:
        raise UsageError("s must lie in (0, 1]")
    if name == "bbm" and not 0.5 < cfg["s"] < 1:
        raise UsageError("bbm needs s in (0.5, 1)")
    if name == "cs-bsy" and not 0 < cfg["s"] < 1:
        raise UsageError("cs-bsy needs s in (0, 1)")
    if "gamma" in cfg and cfg["gamma"] == 0:
        raise UsageError("gamma must be nonzero")
    if name == "log-weight" and cfg["eta"] <= 1:
        raise UsageError("eta must exceed 1")
    sw = cfg.get("sweep")
    if sw is not None:
        if not (0 < sw.get("lo", 0) < sw.get("hi", 0)) or int(sw.get("points", 0)) < 2:
            raise UsageError("sweep needs 0 < lo < hi and points >= 2")
    if name in ("bsy-1d", "thmph", "campanato-identity", "campanato-embed", "log-weight", "cs-bsy",
                "heat", "bn-bounds", "gu-yung", "bn-limit", "bbm", "log-bsy", "ms-weak") and cfg["dim"] != 1:
        raise UsageError(f"{name} is one-dimensional")
    if name == "higher-order" and cfg["dim"] not in (1, 2):
        raise UsageError("higher-order supports dim 1 or 2")
    if name == "bsy-2d" and cfg["dim"] < 2:
        raise UsageError("bsy-2d needs dim >= 2")
    return cfg


def _sweep(cfg):
    sw = cfg["sweep"]
    return np.geomspace(float(sw["lo"]), float(sw["hi"]), int(sw["points"]))


def _rel(measured, target):
    return abs(measured - target) / abs(target) if target else abs(measured)


def _result(measured, target, source, tolerance, rows, converged=True, passed=None, **extra):
    rel = _rel(measured, target)
    if passed is None:
        passed = bool(rel < tolerance)
    return {"measured": float(measured), "target": float(target), "target_source": source,
            "rel_error": float(rel), "tolerance": float(tolerance), "converged": bool(converged),
            "passed": bool(passed and converged), "rows": rows, "extra": extra}


def _curve_rows(curve):
    err = curve.stderr if curve.stderr is not None else [None] * len(curve.params)
    return [(float(a), float(b), None if e is None else float(e)) for a, b, e in zip(curve.params, curve.values, err)]


# ----------------------------------------------------------------------------
# experiments


def _bsy_1d(cfg):
    from .functionals import PairGrid, QuotientSpec, bsy_curve, bsy_targets, extract_limit

    f = builtin(cfg["function"], 1)
    grid = PairGrid(cfg["x_cells"], cfg["t_cells"], cfg["t_min"])
    spec = QuotientSpec("bsy_1d_onesided", p=cfg["p"], gamma=cfg["gamma"])
    curve = bsy_curve(f, spec, _sweep(cfg), grid)
    est = extract_limit(curve, "large_param", cfg["rel_tol"])
    target = bsy_targets(f, spec)
    extra = {"window": list(est.window)}
    ok = True
    if cfg["two_sided"]:
        spec2 = QuotientSpec("bsy_nd", p=cfg["p"], gamma=cfg["gamma"], dim=1)
        est2 = extract_limit(bsy_curve(f, spec2, _sweep(cfg), grid), "large_param", cfg["rel_tol"])
        ratio = est2.value / est.value
        extra.update(two_sided_plateau=est2.value, two_sided_ratio=ratio)
        ok = abs(ratio - 2.0) / 2.0 < cfg["two_sided_tolerance"] and est2.converged
    res = _result(est.value, target, "||f'||_p^p / gamma (quadrature)", cfg["tolerance"],
                  _curve_rows(curve), est.converged, **extra)
    res["passed"] = res["passed"] and ok
    return res


def _bsy_2d(cfg):
    from .functionals import PairGrid, QuotientSpec, bsy_curve, bsy_targets, extract_limit

    f = builtin(cfg["function"], cfg["dim"])
    spec = QuotientSpec("bsy_nd", p=cfg["p"], gamma=cfg["gamma"], dim=cfg["dim"])
    grid = PairGrid(t_min=cfg["t_min"], half_width=cfg["half_width"])
    curve = bsy_curve(f, spec, _sweep(cfg), grid, backend="mc", samples=cfg["samples"], seed=cfg["seed"])
    est = extract_limit(curve, "large_param", cfg["rel_tol"])
    return _result(est.value, bsy_targets(f, spec), "k(p,N)/gamma * ||grad f||_p^p (quadrature)",
                   cfg["tolerance"], _curve_rows(curve), est.converged, window=list(est.window))


def _bn_limit(cfg):
    from .functionals import PairGrid, bn_curve, extract_limit, gradient_lp_power

    f = builtin(cfg["function"], 1)
    curve = bn_curve(f, cfg["p"], 1.0, _sweep(cfg), PairGrid(cfg["x_cells"], cfg["t_cells"]))
    est = extract_limit(curve, "small_param", cfg["rel_tol"])
    target = k_constant(cfg["p"], 1) / cfg["p"] * gradient_lp_power(f, cfg["p"])
    return _result(est.value, target, "k(p,N)/p * ||f'||_p^p (quadrature)", cfg["tolerance"],
                   _curve_rows(curve), est.converged, window=list(est.window))


def _bn_bounds(cfg):
    from .functionals import bn_appendix_bounds

    f = builtin(cfg["function"], 1)
    b = bn_appendix_bounds(f, cfg["p"], _sweep(cfg), rel_tol=cfg["rel_tol"])
    lo, hi, tol = b["lower_bound"], b["upper_bound"], cfg["tolerance"]
    inside = [lo * (1 - tol) <= v <= hi * (1 + tol) for v in (b["sup_value"], b["small_delta_value"])]
    measured = b["small_delta_value"]
    res = _result(measured, lo, "4 kappa_N / p * ||f||_p^p (lower end of the interval)", tol,
                  _curve_rows(b["curve"]), True, passed=all(inside),
                  sup_value=b["sup_value"], upper_bound=hi, lower_bound=lo,
                  large_delta_value=b["large_delta_value"], large_delta_exact=b["large_delta_exact"],
                  sup_inside=inside[0], small_delta_inside=inside[1])
    return res


def _gu_yung(cfg):
    from .functionals import PairGrid, gu_yung_curve, lp_power

    f = builtin(cfg["function"], 1)
    curve, est = gu_yung_curve(f, cfg["p"], _sweep(cfg), PairGrid(cfg["x_cells"], cfg["t_cells"]),
                               rel_tol=cfg["rel_tol"])
    target = 2 * ball_volume(1) * lp_power(f, cfg["p"])
    return _result(est.value, target, "2 kappa_N ||f||_p^p (quadrature)", cfg["tolerance"],
                   _curve_rows(curve), est.converged, window=list(est.window),
                   truncation_sensitivity=curve.meta["truncation_sensitivity"])


def _bbm(cfg):
    from .functionals import PairGrid, bbm_rescaled

    f = builtin(cfg["function"], 1)
    curve, _, target = bbm_rescaled(f, cfg["p"], [cfg["s"]], PairGrid(cfg["x_cells"], cfg["t_cells"]))
    return _result(float(curve.values[0]), target, "k(p,N)/p * ||f'||_p^p (quadrature)",
                   cfg["tolerance"], _curve_rows(curve))


def _engine_result(r, tol, source, **extra):
    rows = _curve_rows(r.curve)
    return _result(r.limit_estimate.value, r.limit_target, source, tol, rows, r.limit_estimate.converged,
                   sup_bound_lhs=r.sup_bound_lhs, sup_bound_rhs=r.sup_bound_rhs, sup_bound_holds=r.holds,
                   window=list(r.limit_estimate.window), **extra)


def _higher_order(cfg):
    from .maximal import higher_order_experiment

    f = builtin(cfg["function"], cfg["dim"])
    r = higher_order_experiment(f, cfg["p"], cfg["gamma"], x_cells=cfg["x_cells"], t_cells=cfg["t_cells"],
                                rel_tol=cfg["rel_tol"])
    stated = r.meta["stated_target"]
    res = _result(r.limit_estimate.value, stated, "||Lap f||_p^p / (2(N+2) gamma) (stated constant)",
                  cfg["tolerance"], _curve_rows(r.curve), r.limit_estimate.converged,
                  derived_target=r.limit_target, derived_rel_error=r.rel_error,
                  sup_bound_holds=r.holds)
    return res


def _thmph(cfg):
    from .maximal import thmph_experiment

    f = builtin(cfg["function"], 1)
    r = thmph_experiment(f, cfg["p"], x_cells=cfg["x_cells"], t_cells=cfg["t_cells"], rel_tol=cfg["rel_tol"])
    return _engine_result(r, cfg["tolerance"], "||f||_p^p (quadrature)",
                          holder_constant=r.meta.get("holder_constant"))


def _campanato_identity(cfg):
    from .maximal import campanato_identity

    f = builtin(cfg["function"], 1)
    r = campanato_identity(f, cfg["s"], cfg["p"], x_cells=cfg["x_cells"], rel_tol=cfg["rel_tol"])
    rows = _curve_rows(r["curve"])
    diff = r["max_pairwise_rel_diff"]
    return _result(diff, 0.0, "pairwise agreement of norm, sup form and limit form", cfg["tolerance"], rows,
                   r["rhs_lim"].converged, passed=diff < cfg["tolerance"], lhs=r["lhs"], rhs_sup=r["rhs_sup"],
                   rhs_lim=r["rhs_lim"].value)


def _campanato_embed(cfg):
    from .maximal import campanato_bsy_embedding

    f = builtin(cfg["function"], 1)
    rows, runs = [], []
    for k in range(3):
        n = cfg["x_cells"] * 2**k
        r = campanato_bsy_embedding(f, cfg["s"], cfg["p"], x_cells=n)
        runs.append(r)
        rows.append((float(n), float(r["ratio_sup"]), None))
    a, b = runs[-2]["ratio_sup"], runs[-1]["ratio_sup"]
    return _result(b, a, "previous refinement (self-convergence)", cfg["tolerance"], rows,
                   bsy_value=runs[-1]["bsy_value"], cc_value=runs[-1]["cc_value"],
                   ratio_sups=[r["ratio_sup"] for r in runs])


def _log_bsy(cfg):
    from .functionals import PairGrid, log_bsy_quasinorm

    f = builtin(cfg["function"], 1)
    r = log_bsy_quasinorm(f, cfg["s"], cfg["p"], grid=PairGrid(cfg["x_cells"], cfg["t_cells"]))
    plateau, lower = r["plateau"].value, r["log_gradient_integral"]
    return _result(plateau, lower, "int log(1 + |f'|)^p (lower bound, quadrature)", cfg["tolerance"],
                   _curve_rows(r["curve"]), passed=plateau >= lower * (1 - cfg["tolerance"]),
                   quasinorm=r["quasinorm"])


def _log_weight(cfg):
    from .maximal import difference_quotient_family, family_engine
    from .measure import LogWeight

    f = builtin(cfg["function"], 1)
    fam = difference_quotient_family(f, LogWeight(cfg["eta"]), x_cells=cfg["x_cells"], t_cells=cfg["t_cells"])
    r = family_engine(fam, cfg["p"], rel_tol=cfg["rel_tol"])
    sup_rel = _rel(r.sup_bound_lhs, r.limit_target)
    res = _engine_result(r, cfg["tolerance"], "||f'||_p^p / (eta - 1) (quadrature)", sup_rel_error=sup_rel)
    res["passed"] = res["passed"] and sup_rel < cfg["tolerance"]
    return res


def _cs_bsy(cfg):
    from .extension import calibrate_mu, verify_cs_bsy

    f = builtin(cfg["function"], 1)
    cal = calibrate_mu(cfg["s"], 1, [f, f.dilated(1.5)], min_quality=0.0)
    r = verify_cs_bsy(f, cfg["s"], cfg["p"], mu=cal, x_cells=cfg["x_cells"], t_cells=cfg["t_cells"],
                      rel_tol=cfg["rel_tol"])
    ok = cal.fit_quality > cfg["min_quality"] and r["holds"]
    res = _result(r["liminf_plateau"], r["lhs_power"], "||(-Lap)^s f||_p^p (spectral)", cfg["tolerance"],
                  _curve_rows(r["engine"].curve), r["engine"].limit_estimate.converged,
                  mu_s=cal.mu_s, mu_closed_form=cal.closed_form, fit_quality=cal.fit_quality,
                  inequality_holds=r["holds"], lhs=r["lhs"], rhs=r["rhs"])
    res["passed"] = res["passed"] and ok
    return res


def _heat(cfg):
    from .extension import heat_experiment

    f = builtin(cfg["function"], 1)
    r = heat_experiment(f, cfg["p"], x_cells=cfg["x_cells"], t_cells=cfg["t_cells"], rel_tol=cfg["rel_tol"])
    return _engine_result(r, cfg["tolerance"], "||f||_p^p (quadrature)")


def _ms_weak(cfg):
    from .functionals import PairGrid, ms_weak_quasinorm

    f = builtin(cfg["function"], 1)
    rows, ratios = [], []
    for k in range(3):
        n = cfg["x_cells"] * 2**k
        _, ratio = ms_weak_quasinorm(f, cfg["p"], grid=PairGrid(n, cfg["t_cells"] * 2**k))
        ratios.append(ratio)
        rows.append((float(n), float(ratio), None))
    return _result(ratios[-1], ratios[-2], "previous refinement (self-convergence)", cfg["tolerance"], rows,
                   ratios=ratios)


def _clouds(cfg, trials, n, rng):
    from .metric import PointCloudSpace, load_distance_matrix, load_point_cloud_csv

    if cfg.get("cloud_csv"):
        yield load_point_cloud_csv(cfg["cloud_csv"])
        return
    if cfg.get("distance_matrix"):
        yield load_distance_matrix(cfg["distance_matrix"])
        return
    for _ in range(trials):
        pts = rng.random((n, 2))
        yield PointCloudSpace.from_points(pts)


def _suite(rows, failures, trials, **extra):
    return {"measured": float(trials - failures), "target": float(trials), "target_source": "exact inequality",
            "rel_error": float(failures / trials) if trials else 0.0, "tolerance": 0.0, "converged": True,
            "passed": failures == 0, "rows": rows, "extra": extra}


def _garsia_suite(cfg):
    from .metric import RadialGauge, garsia_check

    rng = np.random.default_rng(cfg["seed"])
    gauge = RadialGauge.power(cfg["rho_exponent"])
    rows, fails, worst, count = [], 0, 0.0, 0
    for i, space in enumerate(_clouds(cfg, cfg["trials"], cfg["points"], rng)):
        f = rng.normal(size=space.n)
        r = garsia_check(space, f, gauge)
        fails += not r["holds"]
        worst = max(worst, r["max_violation_ratio"])
        rows.append((float(i), float(r["max_violation_ratio"]), None))
        count += 1
    return _suite(rows, fails, count, worst_ratio=worst)


def _cover_suite(cfg):
    from .metric import vitali_carleson_verify

    rng = np.random.default_rng(cfg["seed"])
    lams = _sweep(cfg)
    rows, fails, count = [], 0, 0
    for i, space in enumerate(_clouds(cfg, cfg["trials"], cfg["points"], rng)):
        f = rng.normal(size=space.n)
        worst = 0.0
        for p in cfg["p_values"]:
            for lam in lams:
                _, r = vitali_carleson_verify(space, f, p, lam)
                fails += not r["holds"]
                count += 1
                worst = max(worst, r["measured_mass"] / r["bound"] if r["bound"] > 0 else 0.0)
        rows.append((float(i), float(worst), None))
    return _suite(rows, fails, count)


def _mixed_norm_suite(cfg):
    from .measure import ProductSampleGrid, mixed_norm_check

    rng = np.random.default_rng(cfg["seed"])
    n1, n2 = cfg["shape"]
    rows, fails = [], 0
    for i in range(cfg["trials"]):
        prod = ProductSampleGrid(rng.random(n1), rng.random(n2), rng.standard_cauchy((n1, n2)))
        lhs, rhs, ok = mixed_norm_check(prod, cfg["p"])
        fails += not ok
        rows.append((float(i), float(lhs / rhs) if rhs > 0 else 0.0, None))
    return _suite(rows, fails, cfg["trials"])


RUNNERS = {
    "bsy-1d": _bsy_1d, "bsy-2d": _bsy_2d, "bn-limit": _bn_limit, "bn-bounds": _bn_bounds,
    "gu-yung": _gu_yung, "bbm": _bbm, "higher-order": _higher_order, "thmph": _thmph,
    "campanato-identity": _campanato_identity, "campanato-embed": _campanato_embed, "log-bsy": _log_bsy,
    "log-weight": _log_weight, "cs-bsy": _cs_bsy, "heat": _heat, "ms-weak": _ms_weak,
    "garsia-suite": _garsia_suite, "cover-suite": _cover_suite, "mixed-norm-suite": _mixed_norm_suite,
}
assert set(RUNNERS) == set(REGISTRY)


# ----------------------------------------------------------------------------
# output


def _fmt(v):
    return "" if v is None else repr(float(v))


def write_csv(path, rows):
    lines = ["param,value,stderr"] + [f"{_fmt(a)},{_fmt(b)},{_fmt(c)}" for a, b, c in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def run_experiment(cfg, out_dir):
    """Run a resolved config; returns ``(report, exit_code)`` and writes outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = cfg["experiment"]
    t0 = time.perf_counter()
    with np.errstate(all="ignore"):
        res = RUNNERS[name](cfg)
    wall = time.perf_counter() - t0
    csv_path = out_dir / f"{name}.csv"
    write_csv(csv_path, res.pop("rows"))
    report = {"experiment": name, "config": cfg, **res, "csv": csv_path.name}
    report = _jsonable(report)
    with open(out_dir / f"{name}.json", "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / f"{name}.timing.json", "w", newline="\n") as fh:
        json.dump({"experiment": name, "wall_time_s": wall}, fh)
        fh.write("\n")
    return report, EXIT_PASS if report["passed"] else EXIT_FAIL


def constants_table():
    rows = []
    for N in (1, 2, 3):
        for p in (1, 2, 3):
            rows.append({"p": p, "N": N, "k": k_constant(p, N), "kappa_N": ball_volume(N)})
    return rows


def report_table(paths):
    """Rows ``(experiment, measured, target, rel_error, passed)`` and the aggregate exit code."""
    rows = []
    for path in paths:
        try:
            with open(path) as fh:
                rep = json.load(fh)
            rows.append((rep["experiment"], rep["measured"], rep["target"], rep["rel_error"], bool(rep["passed"])))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise UsageError(f"unreadable report {path}: {exc}") from exc
    code = EXIT_PASS if all(r[4] for r in rows) else EXIT_FAIL
    return rows, code


def _parser():
    ap = argparse.ArgumentParser(prog="ineqforge", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="output directory (default: config 'out' or ./out)")
    r.add_argument("--workers", type=int, default=None, help="cap on BLAS/FFT threads (default: all cores)")
    c = sub.add_parser("constants", help="print k(p,N) and kappa_N")
    c.add_argument("--json", action="store_true")
    rp = sub.add_parser("report", help="summarize report JSON files")
    rp.add_argument("paths", nargs="*")
    return ap


def main(argv=None):
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        if args.command == "constants":
            rows = constants_table()
            if args.json:
                print(json.dumps(rows, indent=2))
            else:
                print(f"{'p':>3} {'N':>3} {'k(p,N)':>16} {'kappa_N':>16}")
                for row in rows:
                    print(f"{row['p']:>3} {row['N']:>3} {row['k']:>16.10f} {row['kappa_N']:>16.10f}")
            return EXIT_PASS
        if args.command == "report":
            rows, code = report_table(args.paths)
            print(f"{'experiment':<20} {'measured':>14} {'target':>14} {'rel_err':>10}  result")
            for name, m, t, e, ok in rows:
                print(f"{name:<20} {m:>14.6g} {t:>14.6g} {e:>10.3g}  {'pass' if ok else 'FAIL'}")
            return code
        if args.workers is not None and args.workers < 1:
            raise UsageError("--workers must be positive")
        cfg = resolve_config(load_config(args.config))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with threadpool_limits(limits=args.workers):
            report, code = run_experiment(cfg, args.out or cfg.get("out") or "out")
    except (ValueError, RuntimeError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure in {cfg['experiment']}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    status = "pass" if code == EXIT_PASS else "FAIL"
    print(f"{report['experiment']}: measured {report['measured']:.6g} target {report['target']:.6g} "
          f"rel_err {report['rel_error']:.3g} [{status}]")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

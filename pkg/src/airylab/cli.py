"""Configuration, study runners, result records, and the command-line interface.

The batch front end reads a JSON configuration, runs one of the studies
(limit of the multiplicative statistic, edge-kernel convergence, norming
constant corrections, or the cross-check battery), and writes the results as
CSV or JSON records.  Output is deterministic: records are sorted by
parameter tuple, floats are printed with 17 significant digits, and the
wall-clock timestamp carried by each record is excluded from the emitted
columns so that a rerun with the same configuration is byte-identical.

CSV column order (stable): study, params, value, aux, verdict, config_hash.
Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error,
3 I/O error, 4 internal numeric failure.
"""

import argparse
import concurrent.futures
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from .equilibrium import Potential, build_equilibrium, szego_q0, q0_limit
from .ensemble import (DeformationQ, build_tables, kernel_trace,
                       log_lstat_det, log_lstat_gamma, norming_ratio,
                       rescaled_edge_kernel)
from .fredholm import fredholm_det_airy, fredholm_det_ft
from .idpii import interp_P, k_infinity, solve_idpii, tw_local_check
from .special import f_beta_quad, f_k_closed


class ConfigError(Exception):
    """Invalid, malformed, or missing configuration (exit code 2)."""


_DEFAULTS = {
    "potential": [2.0, 4.0, 2.0],
    "deformation": [0.0, -1.0],
    "deformation2": [0.0, -1.0, 0.0, -0.1],
    "n_list": [16, 32, 64],
    "s_list": [0.0, 1.0],
    "t_param": 1.0,
    "fredholm_m": 80,
    "fredholm_L": 10.0,
    "idpii_s_min": -2.0,
    "idpii_s_max": 12.0,
    "idpii_h_xi": 0.04,
    "idpii_n_steps": 2800,
    "out_dir": ".",
    "workers": 1,
}


class LabConfig:
    """Validated study configuration; fields mirror the default dictionary."""

    def __init__(self, data):
        unknown = set(data) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        merged = dict(_DEFAULTS)
        merged.update(data)
        for key in ("potential", "deformation", "deformation2", "n_list", "s_list"):
            if not isinstance(merged[key], list) or not merged[key]:
                raise ConfigError(f"'{key}' must be a nonempty list")
        if list(merged["n_list"]) != sorted(merged["n_list"]):
            raise ConfigError("'n_list' must be ascending")
        if not merged["t_param"] > 0:
            raise ConfigError("'t_param' must be positive")
        if merged["workers"] < 1:
            raise ConfigError("'workers' must be at least 1")
        for key, val in merged.items():
            setattr(self, key, val)

    def to_dict(self):
        return {k: getattr(self, k) for k in _DEFAULTS}

    def hash(self):
        """SHA-256 of the canonical JSON form; equal configs hash equally.

        Execution-only keys (output directory, worker count) do not affect
        results and are excluded, so reruns are byte-identical regardless of
        where or how parallel they run.
        """
        d = {k: v for k, v in self.to_dict().items()
             if k not in ("out_dir", "workers")}
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def parse_config(path):
    """Read and validate a JSON configuration file."""
    if not os.path.exists(path):
        raise ConfigError(f"configuration file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    return LabConfig(data)


class ResultRecord:
    """One study result: parameter tuple, value, auxiliaries, verdict.

    The timestamp is carried for interactive inspection but is not part of
    the emitted columns, which keeps output bytes deterministic.
    """

    def __init__(self, study, params, value, aux=None, verdict="pass", config_hash=""):
        self.study = study
        self.params = tuple(params)
        self.value = value
        self.aux = dict(aux or {})
        self.verdict = verdict
        self.config_hash = config_hash
        self.timestamp = time.time()

    def sort_key(self):
        return (self.study,) + tuple(str(p) for p in self.params)


def _fmt(x):
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def _fmt_map(d):
    return ";".join(f"{k}={_fmt(v)}" for k, v in sorted(d.items()))


def emit(records, fmt, path):
    """Write records as CSV (fixed column order) or a JSON array."""
    records = sorted(records, key=lambda r: r.sort_key())
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["study", "params", "value", "aux", "verdict", "config_hash"])
            for r in records:
                writer.writerow([r.study, ";".join(_fmt(p) for p in r.params),
                                 _fmt(r.value), _fmt_map(r.aux), r.verdict, r.config_hash])
    elif fmt == "json":
        payload = [{"study": r.study, "params": [_fmt(p) for p in r.params],
                    "value": _fmt(r.value), "aux": {k: _fmt(v) for k, v in sorted(r.aux.items())},
                    "verdict": r.verdict, "config_hash": r.config_hash}
                   for r in records]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown output format: {fmt}")


def _slope(ns, errs):
    """Least-squares slope of log err against log n."""
    ln, le = np.log(ns), np.log(errs)
    return float(np.polyfit(ln, le, 1)[0])


def _theorem1_point(cfg_dict, n, s):
    cfg = LabConfig(cfg_dict)
    eq = build_equilibrium(Potential(cfg.potential))
    Q = DeformationQ(cfg.deformation)
    grid, t_und, t_def, lsig = build_tables(eq, Q, n, s)
    lg = log_lstat_gamma(t_def, t_und, n)
    ld = log_lstat_det(grid, t_und, n, lsig)
    tgt = float(np.log(fredholm_det_ft(-s * eq.c_v / Q.t, Q.t ** 3 / eq.c_v ** 3,
                                       cfg.fredholm_m, cfg.fredholm_L)))
    return lg, ld, tgt


def _run_points(fn, cfg, points):
    """Map fn over parameter points, optionally with a process pool."""
    workers = int(os.environ.get("AIRYLAB_WORKERS", cfg.workers))
    cfg_dict = cfg.to_dict()
    out = []
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(fn, cfg_dict, *pt) for pt in points]
            for f in futs:
                try:
                    out.append(f.result())
                except Exception as exc:  # crash isolation: record and continue
                    out.append(exc)
        return out
    for pt in points:
        try:
            out.append(fn(cfg_dict, *pt))
        except Exception as exc:
            out.append(exc)
    return out


def run_theorem1(cfg):
    """Per (n, s): both finite-n routes against the limiting log-determinant."""
    h = cfg.hash()
    records = []
    points = [(n, s) for s in cfg.s_list for n in cfg.n_list]
    results = {}
    outputs = _run_points(_theorem1_point, cfg, points)
    for (n, s), out in zip(points, outputs):
        if isinstance(out, Exception):
            records.append(ResultRecord("theorem1", (n, s), float("nan"),
                                        {"error": str(out)}, "failed", h))
            continue
        lg, ld, tgt = out
        err = abs(lg - tgt)
        routes_ok = abs(lg - ld) <= 1e-6 * (1.0 + abs(lg))
        records.append(ResultRecord("theorem1", (n, s), lg,
                                    {"route_det": ld, "target": tgt, "error": err},
                                    "pass" if routes_ok else "fail", h))
        results.setdefault(s, []).append((n, err))
    for s, pairs in results.items():
        ns = [p[0] for p in pairs]
        errs = [p[1] for p in pairs]
        decreasing = all(a > b for a, b in zip(errs, errs[1:]))
        slope = _slope(ns, errs) if len(ns) >= 2 else float("nan")
        records.append(ResultRecord("theorem1-summary", (s,), slope,
                                    {"decreasing": int(decreasing)},
                                    "pass" if decreasing and slope <= -0.3 else "fail", h))
    return records


def run_theorem2(cfg):
    """Sup over a 5x5 grid of the finite-n edge kernel minus its limit."""
    h = cfg.hash()
    eq = build_equilibrium(Potential(cfg.potential))
    Q = DeformationQ(cfg.deformation)
    t_eff = Q.t / eq.c_v
    sol = solve_idpii(t_eff ** -1.5, S_min=cfg.idpii_s_min, S_max=cfg.idpii_s_max,
                      h_xi=cfg.idpii_h_xi, n_steps=cfg.idpii_n_steps)
    s = cfg.s_list[0]
    us = np.linspace(-2.0, 2.0, 5)
    records = []
    errs = []
    for n in cfg.n_list:
        try:
            grid, t_und, t_def, lsig = build_tables(eq, Q, n, s)
            sup = max(abs(rescaled_edge_kernel(eq, t_def, n, u, v)
                          - k_infinity(sol, u, v, s, t_eff))
                      for u in us for v in us)
        except Exception as exc:  # crash isolation: record and continue
            records.append(ResultRecord("theorem2", (n, s), float("nan"),
                                        {"error": str(exc)}, "failed", h))
            continue
        errs.append((n, sup))
        records.append(ResultRecord("theorem2", (n, s), sup, {}, "pass", h))
    if len(errs) >= 2:
        ns = [p[0] for p in errs]
        es = [p[1] for p in errs]
        decreasing = all(a > b for a, b in zip(es, es[1:]))
        slope = _slope(ns, es)
        records.append(ResultRecord("theorem2-summary", (s,), slope,
                                    {"decreasing": int(decreasing)},
                                    "pass" if decreasing and slope <= -0.2 else "fail", h))
    return records


def run_theorem3(cfg):
    """Norming-constant corrections c_n = n^{1/3}(1/2 - rho_n) and Q-universality."""
    h = cfg.hash()
    eq = build_equilibrium(Potential(cfg.potential))
    Q1 = DeformationQ(cfg.deformation)
    Q2 = DeformationQ(cfg.deformation2)
    if abs(Q1.t - Q2.t) > 1e-12:
        raise ConfigError("the two deformations must share t = -Q'(0)")
    t_eff = Q1.t / eq.c_v
    sol = solve_idpii(t_eff ** -1.5, S_min=cfg.idpii_s_min, S_max=cfg.idpii_s_max,
                      h_xi=cfg.idpii_h_xi, n_steps=cfg.idpii_n_steps)
    records = []
    c_by_q = {}
    for label, Q in (("Q1", Q1), ("Q2", Q2)):
        for s in cfg.s_list:
            for n in cfg.n_list:
                try:
                    grid, t_und, t_def, lsig = build_tables(eq, Q, n, s)
                    rho = norming_ratio(eq, t_def, n)
                    c_n = n ** (1.0 / 3.0) * (0.5 - rho)
                except Exception as exc:
                    records.append(ResultRecord("theorem3", (label, n, s), float("nan"),
                                                {"error": str(exc)}, "failed", h))
                    continue
                c_by_q[(label, n, s)] = c_n
                records.append(ResultRecord("theorem3", (label, n, s), rho,
                                            {"c_n": c_n}, "pass", h))
    for n in cfg.n_list:
        for s in cfg.s_list:
            if ("Q1", n, s) in c_by_q and ("Q2", n, s) in c_by_q:
                diff = abs(c_by_q[("Q1", n, s)] - c_by_q[("Q2", n, s)])
                records.append(ResultRecord("theorem3-universality", (n, s), diff, {}, "pass", h))
    # s-differences of c_n against the antiderivative route, offset-free
    if len(cfg.s_list) >= 2:
        scale = (t_eff) ** -1.5
        pred = {}
        for s in cfg.s_list:
            S_t = s * scale
            pred[s] = (eq.c_v ** 0.5 / Q1.t ** 0.5) * (interp_P(sol, S_t) - S_t ** 2 / (4.0 * scale))
        s0 = cfg.s_list[0]
        for s in cfg.s_list[1:]:
            for n in cfg.n_list:
                if ("Q1", n, s) in c_by_q and ("Q1", n, s0) in c_by_q:
                    dc = c_by_q[("Q1", n, s)] - c_by_q[("Q1", n, s0)]
                    dp = pred[s] - pred[s0]
                    records.append(ResultRecord("theorem3-sdiff", (n, s0, s), dc,
                                                {"predicted": dp, "error": abs(dc - dp)},
                                                "pass", h))
    return records


def run_crosschecks(cfg):
    """Trace identity, Szego limit, polylog identities, Fredholm convergence,
    and the local Tracy-Widom-type consistency check."""
    h = cfg.hash()
    records = []
    eq = build_equilibrium(Potential(cfg.potential))
    Q = DeformationQ(cfg.deformation)

    n0 = cfg.n_list[0]
    grid, t_und, t_def, lsig = build_tables(eq, Q, n0, cfg.s_list[0])
    tr = kernel_trace(grid, t_und, n0, grid.log_w_und)
    records.append(ResultRecord("crosscheck-trace", (n0,), tr,
                                {"target": float(n0)},
                                "pass" if abs(tr - n0) <= 1e-8 * n0 else "fail", h))

    q0 = 64 ** (1.0 / 3.0) * szego_q0(eq, Q.poly, 64, 0.0)
    q0_lim = q0_limit(0.0, Q.t, eq.a)
    ratio = q0 / q0_lim
    records.append(ResultRecord("crosscheck-szego", (64,), ratio, {"q0": q0, "limit": q0_lim},
                                "pass" if 0.85 <= ratio <= 1.15 else "fail", h))

    poly_err = max(abs(f_beta_quad(float(k), y) - f_k_closed(k, y))
                   for k in (1, 2, 3) for y in (0.0, 0.5, 2.0, 5.0))
    records.append(ResultRecord("crosscheck-polylog", (), poly_err, {},
                                "pass" if poly_err <= 1e-10 else "fail", h))

    conv = max(abs(fredholm_det_ft(s, T, 40, cfg.fredholm_L)
                   - fredholm_det_ft(s, T, 80, cfg.fredholm_L))
               for s in (-1.0, 0.0, 1.0) for T in (0.125, 1.0, 8.0))
    records.append(ResultRecord("crosscheck-fredholm", (), conv, {},
                                "pass" if conv < 1e-8 else "fail", h))

    sol = solve_idpii(1.0, S_min=cfg.idpii_s_min, S_max=cfg.idpii_s_max,
                      h_xi=cfg.idpii_h_xi, n_steps=cfg.idpii_n_steps)
    spacing = 0.05
    for S in (0.0, 1.0):
        stencil = [float(np.log(fredholm_det_ft(-(S + j * spacing), 1.0,
                                                cfg.fredholm_m, cfg.fredholm_L)))
                   for j in (-2, -1, 0, 1, 2)]
        res = tw_local_check(sol, S, stencil, spacing)
        records.append(ResultRecord("crosscheck-twlocal", (S,), res, {},
                                    "pass" if res <= 2e-3 else "fail", h))
    return records


def _run_fredholm(cfg):
    h = cfg.hash()
    T = cfg.t_param ** -1.5 if cfg.t_param != 1.0 else 1.0
    return [ResultRecord("fredholm", (s, T),
                         fredholm_det_ft(s, T, cfg.fredholm_m, cfg.fredholm_L), {}, "pass", h)
            for s in cfg.s_list]


def _run_idpii_solve(cfg):
    h = cfg.hash()
    sol = solve_idpii(cfg.t_param ** -1.5, S_min=cfg.idpii_s_min, S_max=cfg.idpii_s_max,
                      h_xi=cfg.idpii_h_xi, n_steps=cfg.idpii_n_steps)
    stride = max(1, sol.S_grid.size // 50)
    return [ResultRecord("idpii", (float(S),), float(I),
                         {"P": float(P), "truncated": int(flag)}, "pass", h)
            for S, I, P, flag in zip(sol.S_grid[::stride], sol.I_of_S[::stride],
                                     sol.P_of_S[::stride], sol.truncation_flags[::stride])]


def _run_eqmeasure(cfg):
    h = cfg.hash()
    eq = build_equilibrium(Potential(cfg.potential))
    recs = [ResultRecord("eqmeasure-data", (), eq.a,
                         {"c_v": eq.c_v, "ell": eq.ell, "shift": eq.shift}, "pass", h)]
    for x in np.linspace(-eq.a, 0.0, 21):
        recs.append(ResultRecord("eqmeasure-density", (float(x),),
                                 float(eq.density(x)), {}, "pass", h))
    return recs


_STUDIES = {
    "theorem1": run_theorem1,
    "theorem2": run_theorem2,
    "theorem3": run_theorem3,
    "crosschecks": run_crosschecks,
    "fredholm": _run_fredholm,
    "idpii-solve": _run_idpii_solve,
    "eqmeasure": _run_eqmeasure,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="airylab",
                                     description="Edge-statistics numerical laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _STUDIES:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        p.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config) if args.config else LabConfig({})
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("'--workers' must be at least 1")
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out_dir = args.out
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        records = _STUDIES[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4

    out_path = os.path.join(cfg.out_dir, f"{args.command}.{args.format}")
    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
        emit(records, args.format, out_path)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3

    failed = [r for r in records if r.verdict != "pass"]
    print(f"{len(records)} records written to {out_path}; {len(failed)} failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

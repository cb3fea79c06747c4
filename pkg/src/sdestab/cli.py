"""Experiment harness: config-driven runs, CSV reports, deterministic SVG
plots.

Subcommands: check-lyapunov, lipschitz, exp-moment, identity, blowup,
monotonicity, burgers, report.  Configs are TOML files with [model],
[query], [mc], [output] sections; every key has a default (see DEFAULTS
below and README).  CSV output uses '.' decimals, 17 significant digits and
LF line endings; identical configs produce byte-identical files, regardless
of SDESTAB_THREADS.
"""
from __future__ import annotations

import argparse
import io
import math
import os
import sys

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from .core import BoundCertificate, BoundQuery, INF, McConfig, NoCertificate
from .bounds import exp_moment_bound_rhs_shifted, lyapunov_check, monotonicity_sup
from .burgers import burgers_certificate, embed_coefficients, galerkin_model
from .estimate import (empirical_lipschitz, exp_moment_estimate, lp_norm,
                       n_workers_from_env, verify_certificate)
from .modelzoo import build_model, certificate, default_grid, make_counterexample
from .simulate import (NoiseSource, coupled_ensemble_stats, residual_dt_sweep,
                       rode_blowup)
from .core import squared_distance_pair

CSV_COLUMNS = [
    "experiment", "model", "T", "dt", "n_paths", "seed", "r", "p", "q0", "q1",
    "theta", "x", "y", "empirical", "ci_low", "ci_high", "bound", "margin",
    "verdict",
]

DEFAULTS = {
    "experiment": {"kind": "lipschitz", "slack": 0.0, "which": "", "metric": "",
                   "tol": 1e-9, "levels": 5, "grid_per_dim": 5, "t_grid": [],
                   "blow_threshold": 1e6, "blow_x0": [2.0, 0.0], "mono_p": 2.0,
                   "burgers_modes": [4, 8], "burgers_c": 1.0,
                   "burgers_eta": 0.1, "burgers_lip": 0.0},
    "model": {"name": "lorenz", "params": {}},
    "query": {"T": 0.5, "r": 2.0, "p": 2.0, "q0": INF, "q1": INF,
              "theta": None, "x": None, "y": None},
    "mc": {"n_paths": 1000, "dt": 1e-3, "seed": 12345,
           "scheme": "euler_maruyama", "ci_level": 0.95},
    "output": {"dir": ".", "prefix": ""},
}

# model-appropriate default initial pairs (and L^r exponents) for queries
# that do not pin them in the config
DEFAULT_POINTS = {
    "van_der_pol": ([0.5, 0.5], [0.6, 0.45], 2.0),
    "duffing_vdp": ([0.5, 0.5], [0.6, 0.45], 2.0),
    "lorenz": ([0.5, 0.5, 0.5], [0.6, 0.45, 0.5], 2.0),
    "langevin": ([0.8, 0.2], [0.9, 0.15], 2.0),
    "brownian_dynamics": ([1.2], [1.0], 2.0),
    "sir": ([0.6, 0.3, 0.1], [0.5, 0.35, 0.15], 3.0),
    "psychology": ([0.3, 0.4], [0.35, 0.38], 2.0),
    "brusselator": ([0.5, 0.5], [0.6, 0.45], 3.0),
    "volatility": ([1.2], [0.7], INF),
    "wright_fisher": ([0.3], [0.6], INF),
    "rotation_counterexample": ([0.3, 0.0], [0.35, 0.05], 0.05),
    "gbm": ([1.0], [2.0], 2.0),
    "linear_drift": ([1.0], [2.0], 2.0),
}


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if isinstance(v, (np.ndarray, list, tuple)):
        return ";".join(format(float(u), ".17g") for u in np.atleast_1d(v))
    return str(v)


def write_csv(rows: list, fname: str):
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row.get(c)) for c in CSV_COLUMNS) + "\n")
    with open(fname, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def read_csv(fname: str) -> list:
    rows = []
    with open(fname) as fh:
        header = fh.readline().strip().split(",")
        if header != CSV_COLUMNS:
            raise ValueError(f"{fname}: unexpected CSV header")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(CSV_COLUMNS):
                raise ValueError(f"{fname}:{lineno}: malformed CSV row")
            rows.append(dict(zip(CSV_COLUMNS, parts)))
    return rows


def load_config(path: str | None) -> dict:
    cfg = {k: dict(v) for k, v in DEFAULTS.items()}
    cfg["query"] = dict(DEFAULTS["query"])
    if path:
        with open(path, "rb") as fh:
            user = tomllib.load(fh)
        for section, vals in user.items():
            if section not in cfg:
                raise ValueError(f"unknown config section [{section}]")
            cfg[section].update(vals)
    return cfg


def _query_from(cfg: dict, d: int | None = None) -> BoundQuery:
    q = dict(cfg["query"])
    name = cfg["model"]["name"]
    if q.get("x") is None or q.get("y") is None:
        if name not in DEFAULT_POINTS:
            raise ValueError(f"query needs explicit x, y for model {name!r}")
        dx, dy, dr = DEFAULT_POINTS[name]
        q.setdefault("x", None)
        if q["x"] is None:
            q["x"], q["y"] = dx, dy
            q["r"], q["p"] = dr, dr
    x = np.atleast_1d(np.asarray(q["x"], dtype=float))
    y = np.atleast_1d(np.asarray(q["y"], dtype=float))
    if d is not None and x.size != d:
        raise ValueError(f"query x has dimension {x.size}, model needs {d}")
    def _e(v):
        if v is None or v == "inf":
            return INF
        return float(v)
    return BoundQuery(horizon=float(q["T"]), r=_e(q["r"]), p=_e(q["p"]),
                      q0=_e(q["q0"]), q1=_e(q["q1"]), x=x, y=y,
                      theta=q.get("theta"))


def _mc_from(cfg: dict) -> McConfig:
    m = cfg["mc"]
    return McConfig(n_paths=int(m["n_paths"]), dt=float(m["dt"]),
                    seed=int(m["seed"]), scheme=m["scheme"],
                    ci_level=float(m["ci_level"]))


def _base_row(cfg, query=None, mc=None):
    row = {c: None for c in CSV_COLUMNS}
    row["model"] = cfg["model"]["name"]
    if query is not None:
        row.update(T=query.horizon, r=query.r, p=query.p, q0=query.q0,
                   q1=query.q1, theta=query.theta, x=query.x, y=query.y)
    if mc is not None:
        row.update(dt=mc.dt, n_paths=mc.n_paths, seed=mc.seed)
    return row


def _verdict(flag: bool) -> str:
    return "pass" if flag else "fail"


# ----------------------------------------------------------------------
# experiment kinds
# ----------------------------------------------------------------------

def _run_lipschitz(cfg) -> list:
    t_grid = cfg["experiment"].get("t_grid") or None
    if t_grid:
        rows = []
        for T in t_grid:
            sub = {k: dict(v) for k, v in cfg.items()}
            sub["experiment"] = dict(cfg["experiment"], t_grid=None)
            sub["query"] = dict(cfg["query"], T=float(T))
            rows.extend(_run_lipschitz(sub))
        return rows
    entry = build_model(cfg["model"]["name"], cfg["model"].get("params"))
    query = _query_from(cfg, entry.model.dim_state)
    mc = _mc_from(cfg)
    which = cfg["experiment"].get("which") or None
    cert = certificate(entry, query, which)
    metric_name = cfg["experiment"].get("metric") or ""
    if not metric_name and "transformed" in entry.metrics:
        # these families certify the transformed distance, not the Euclidean one
        metric_name = "transformed"
    metric = entry.metrics.get(metric_name) if metric_name else None
    scheme = mc.scheme
    if entry.model.transform is not None and scheme == "euler_maruyama":
        scheme = ("reflected_transformed"
                  if entry.model.transform.z_hi is not None else "transformed")
        mc = McConfig(mc.n_paths, mc.dt, mc.seed, scheme, mc.ci_level)
    marginal, uniform = empirical_lipschitz(
        entry.model, query.x, query.y, query, mc, NoiseSource(mc.seed),
        metric=metric, n_workers=n_workers_from_env())
    # a model whose headline bound is marginal-in-time carries a separate
    # sup-in-time variant for the uniform row
    cert_uniform = cert
    if which is None and "transformed_sup" in entry.extra_bounds:
        cert_uniform = certificate(entry, query, "transformed_sup")
    rows = []
    for kind, est, crt in (("lipschitz_marginal", marginal, cert),
                           ("lipschitz_uniform", uniform, cert_uniform)):
        row = _base_row(cfg, query, mc)
        row["experiment"] = kind
        row["empirical"] = est.point_estimate
        row["ci_low"], row["ci_high"] = est.ci_low, est.ci_high
        if isinstance(crt, NoCertificate):
            row["bound"] = math.nan
            row["margin"] = math.nan
            row["verdict"] = "no_certificate"
        else:
            v = verify_certificate(est, crt, float(cfg["experiment"]["slack"]))
            row["bound"], row["margin"] = crt.value, v.margin
            row["verdict"] = _verdict(v.passed)
        rows.append(row)
    return rows


def _run_exp_moment(cfg) -> list:
    entry = build_model(cfg["model"]["name"], cfg["model"].get("params"))
    query = _query_from(cfg, entry.model.dim_state)
    mc = _mc_from(cfg)
    if not entry.lyapunov:
        raise ValueError(f"{entry.name} ships no Lyapunov data")
    ld = entry.lyapunov[0]
    # ubar_batch carries the running-integral term whenever the entry has one
    est = exp_moment_estimate(entry.model, ld.field,
                              None, query.x, query.horizon, mc,
                              NoiseSource(mc.seed),
                              U_batch=ld.value_batch,
                              ubar_batch=ld.ubar_batch,
                              n_workers=n_workers_from_env())
    bound = exp_moment_bound_rhs_shifted(ld.field, query.x, query.horizon)
    cert = BoundCertificate(value=bound, theorem="ExpMoment", query=None,
                            constants_used={"alpha": ld.field.alpha,
                                            "beta": ld.field.beta},
                            overflow=math.isinf(bound))
    v = verify_certificate(est, cert, float(cfg["experiment"]["slack"]))
    row = _base_row(cfg, query, mc)
    row["experiment"] = "exp_moment"
    row["empirical"] = est.point_estimate
    row["ci_low"], row["ci_high"] = est.ci_low, est.ci_high
    row["bound"], row["margin"] = bound, v.margin
    row["verdict"] = _verdict(v.passed)
    return [row]


def _run_lyapunov(cfg) -> list:
    entry = build_model(cfg["model"]["name"], cfg["model"].get("params"))
    query = _query_from(cfg, entry.model.dim_state)
    tol = float(cfg["experiment"]["tol"])
    grid = default_grid(entry, int(cfg["experiment"]["grid_per_dim"]))
    t_grid = np.linspace(0.0, query.horizon, 5)
    rows = []
    for i, ld in enumerate(entry.lyapunov):
        rep = lyapunov_check(entry.model, ld.field, ld.ubar, grid, t_grid, tol)
        row = _base_row(cfg, query)
        row["experiment"] = f"lyapunov_check_{i}"
        row["empirical"] = rep.worst_margin
        row["bound"] = tol
        row["margin"] = rep.worst_margin + tol
        row["verdict"] = _verdict(rep.passed)
        rows.append(row)
    return rows


def _run_identity(cfg) -> list:
    from .core import DomainSpec, SdeModel

    name = cfg["model"]["name"]
    if name == "gbm":
        drift = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        diffusion = lambda x: np.asarray(x, dtype=float)[..., None]
        model = SdeModel(1, 1, drift, diffusion, DomainSpec("all_space"), "gbm")
    elif name == "linear_drift":
        c = float(cfg["model"].get("params", {}).get("c", 1.0))
        drift = lambda x: c * np.asarray(x, dtype=float)
        diffusion = lambda x: np.zeros(np.asarray(x, dtype=float).shape + (1,))
        model = SdeModel(1, 1, drift, diffusion, DomainSpec("all_space"), "linear_drift")
    else:
        model = build_model(name, cfg["model"].get("params")).model
    query = _query_from(cfg, model.dim_state)
    mc = _mc_from(cfg)
    V = squared_distance_pair(model.dim_state)
    levels = int(cfg["experiment"]["levels"])
    dts, medians, _ = residual_dt_sweep(model, V, query.x, query.y,
                                        query.horizon, mc.dt, levels,
                                        mc.n_paths, mc.seed)
    rows = []
    for lev in range(levels):
        row = _base_row(cfg, query, mc)
        row["experiment"] = "identity_residual"
        row["dt"] = dts[lev]
        row["empirical"] = medians[lev]
        if lev == 0:
            row["bound"] = math.nan
            row["margin"] = math.nan
            row["verdict"] = "pass"
        else:
            # the median must shrink by a factor >= 1.3 per halving on
            # average, i.e. stay below median_0 / 1.3^level
            bound = medians[0] / 1.3**lev
            row["bound"] = bound
            row["margin"] = bound - medians[lev]
            row["verdict"] = _verdict(medians[lev] <= bound)
        rows.append(row)
    return rows


def _run_blowup(cfg) -> list:
    x0 = np.atleast_1d(np.asarray(cfg["experiment"]["blow_x0"], dtype=float))[:2]
    thr = float(cfg["experiment"]["blow_threshold"])
    mc = _mc_from(cfg)
    result = rode_blowup(x0, mc.dt, thr)
    row = _base_row(cfg)
    row["experiment"] = "blowup"
    row["model"] = "rotation_rode"
    row["dt"] = mc.dt
    row["x"] = x0
    row["empirical"] = result.tau_estimate
    row["bound"] = thr
    row["margin"] = result.final_norm - thr
    row["verdict"] = _verdict(result.blown)
    return [row]


def _run_monotonicity(cfg) -> list:
    name = cfg["model"]["name"]
    p = float(cfg["experiment"]["mono_p"])
    if name == "counterexample":
        if not (0.0 < p < 1.0):
            p = 0.5
        model = make_counterexample(p)
        pts = [np.array([v]) for v in np.linspace(-1.5, 3.5, 41)]
    else:
        entry = build_model(name, cfg["model"].get("params"))
        model = entry.model
        pts = default_grid(entry, int(cfg["experiment"]["grid_per_dim"]))
    der = monotonicity_sup(model, p, "derivative_form", pts)
    diff = monotonicity_sup(model, p, "difference_form", pts)
    tol = 1e-6
    row = _base_row(cfg)
    row["experiment"] = "monotonicity"
    row["model"] = name
    row["p"] = p
    row["empirical"] = der
    row["bound"] = diff
    row["margin"] = diff + tol - der
    row["verdict"] = _verdict(der <= diff + tol)
    return [row]


def _run_burgers(cfg) -> list:
    exp = cfg["experiment"]
    mc = _mc_from(cfg)
    q = cfg["query"]
    if q.get("x") is None:
        q.update(x=[0.1], y=[0.12, -0.05], r=3.0, p=6.0, q0=6.0, q1=INF)
    cfg = dict(cfg, model={"name": "burgers", "params": {}}, query=q)
    query0 = BoundQuery(horizon=float(q["T"]), r=float(q["r"]), p=float(q["p"]),
                        q0=float(q["q0"]),
                        q1=INF if q.get("q1") in (None, "inf", INF) else float(q["q1"]),
                        x=np.atleast_1d(np.asarray(q["x"], dtype=float)),
                        y=np.atleast_1d(np.asarray(q["y"], dtype=float)))
    rows = []
    for n in exp["burgers_modes"]:
        gal = galerkin_model(int(n), float(exp["burgers_c"]),
                            {"eta": float(exp["burgers_eta"]),
                             "lip": float(exp["burgers_lip"])})
        x = embed_coefficients(query0.x, int(n))
        y = embed_coefficients(query0.y, int(n))
        query = BoundQuery(horizon=query0.horizon, r=query0.r, p=query0.p,
                           q0=query0.q0, q1=query0.q1, x=x, y=y)
        cert = burgers_certificate(gal, query)
        noise = NoiseSource(mc.seed)
        st = coupled_ensemble_stats(gal.model, x, y, query.horizon, mc, noise,
                                    n_workers=n_workers_from_env())
        est = lp_norm(st.sup_metric, query.r, mc.ci_level, "sup_lp",
                      {"T": query.horizon, "r": query.r, "x": x, "y": y})
        row = _base_row(cfg, query, mc)
        row["experiment"] = f"burgers_n{n}"
        row["model"] = f"burgers_galerkin_n{n}"
        row["empirical"] = est.point_estimate
        row["ci_low"], row["ci_high"] = est.ci_low, est.ci_high
        if isinstance(cert, NoCertificate):
            row["bound"], row["margin"] = math.nan, math.nan
            row["verdict"] = "no_certificate"
        else:
            v = verify_certificate(est, cert, float(exp["slack"]))
            row["bound"], row["margin"] = cert.value, v.margin
            row["verdict"] = _verdict(v.passed)
        rows.append(row)
    return rows


KIND_RUNNERS = {
    "lipschitz": _run_lipschitz,
    "exp_moment": _run_exp_moment,
    "lyapunov_check": _run_lyapunov,
    "identity_residual": _run_identity,
    "blowup": _run_blowup,
    "monotonicity": _run_monotonicity,
    "burgers": _run_burgers,
}


def run_experiment(cfg: dict) -> tuple:
    """Run one experiment config; returns (rows, all_passed, csv_path)."""
    kind = cfg["experiment"]["kind"]
    if kind not in KIND_RUNNERS:
        raise ValueError(f"unknown experiment kind {kind!r}")
    rows = KIND_RUNNERS[kind](cfg)
    out_dir = cfg["output"]["dir"]
    os.makedirs(out_dir, exist_ok=True)
    prefix = cfg["output"]["prefix"] or kind
    path = os.path.join(out_dir, f"{prefix}.csv")
    write_csv(rows, path)
    ok = all(r["verdict"] == "pass" for r in rows)
    return rows, ok, path


# ----------------------------------------------------------------------
# report + deterministic SVG plots
# ----------------------------------------------------------------------

def _svg_polyline(series: list, width=640, height=400, log_x=False, log_y=False,
                  title="") -> str:
    """Tiny deterministic SVG writer: series = [(label, xs, ys), ...].
    Nonpositive points are dropped on log-scaled axes."""
    pad = 50.0
    if log_x or log_y:
        series = [
            (label,
             [x for x, y in zip(xs, ys)
              if (x > 0 or not log_x) and (y > 0 or not log_y)],
             [y for x, y in zip(xs, ys)
              if (x > 0 or not log_x) and (y > 0 or not log_y)])
            for label, xs, ys in series
        ]
    pts_all = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)]
    if not pts_all:
        return "<svg xmlns='http://www.w3.org/2000/svg'/>\n"

    def tx(v, lo, hi, a, b, logscale):
        if logscale:
            v, lo, hi = math.log10(v), math.log10(lo), math.log10(hi)
        if hi == lo:
            return (a + b) / 2.0
        return a + (v - lo) * (b - a) / (hi - lo)

    xs_all = [p[0] for p in pts_all]
    ys_all = [p[1] for p in pts_all]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    colors = ["#1965b0", "#dc050c", "#4eb265", "#f7a022", "#882e72"]
    out = [f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}'>"]
    out.append(f"<text x='{pad}' y='20' font-size='14'>{title}</text>")
    out.append(f"<rect x='{pad}' y='{pad}' width='{width-2*pad}' "
               f"height='{height-2*pad}' fill='none' stroke='#888'/>")
    for i, (label, xs, ys) in enumerate(series):
        col = colors[i % len(colors)]
        coords = " ".join(
            f"{tx(x, x_lo, x_hi, pad, width - pad, log_x):.6g},"
            f"{tx(y, y_lo, y_hi, height - pad, pad, log_y):.6g}"
            for x, y in zip(xs, ys))
        out.append(f"<polyline fill='none' stroke='{col}' points='{coords}'/>")
        out.append(f"<text x='{pad+6}' y='{pad+16*(i+1)}' font-size='12' "
                   f"fill='{col}'>{label}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(csv_paths: list, out_dir: str = ".", plots: bool = True) -> str:
    """Human-readable summary of one or more experiment CSVs, plus
    deterministic SVG plots (bound vs empirical over T; residual vs dt)."""
    os.makedirs(out_dir, exist_ok=True)
    all_rows = []
    for path in csv_paths:
        all_rows.extend(read_csv(path))
    lines = []
    groups = {}
    for row in all_rows:
        groups.setdefault(row["model"], []).append(row)
    total = passed = 0
    for model in sorted(groups):
        rows = groups[model]
        ok = sum(1 for r in rows if r["verdict"] == "pass")
        lines.append(f"{model}: {ok}/{len(rows)} pass")
        total += len(rows)
        passed += ok

    residual_rows = [r for r in all_rows if r["experiment"] == "identity_residual"
                     and r["empirical"]]
    if residual_rows and plots:
        dts = [float(r["dt"]) for r in residual_rows]
        res = [float(r["empirical"]) for r in residual_rows]
        if len(dts) >= 2:
            slope = np.polyfit(np.log(dts), np.log(res), 1)[0]
            lines.append(f"residual log-log slope: {slope:.3f}")
        svg = _svg_polyline([("median residual", dts, res)],
                            log_x=True, log_y=True,
                            title="identity residual vs dt")
        with open(os.path.join(out_dir, "residual_vs_dt.svg"), "w", newline="\n") as fh:
            fh.write(svg)
    bound_rows = [r for r in all_rows
                  if r["experiment"].startswith(("lipschitz", "exp_moment", "burgers"))
                  and r["bound"] not in ("", "nan") and r["empirical"] and r["T"]]
    if bound_rows and plots:
        ts = [float(r["T"]) for r in bound_rows]
        emp = [float(r["empirical"]) for r in bound_rows]
        bnd = [float(r["bound"]) for r in bound_rows]
        svg = _svg_polyline([("empirical", ts, emp), ("bound", ts, bnd)],
                            log_y=True, title="bound vs empirical")
        with open(os.path.join(out_dir, "bound_vs_empirical.svg"), "w", newline="\n") as fh:
            fh.write(svg)

    lines.append(f"total: {passed}/{total} pass")
    summary = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "summary.txt"), "w", newline="\n") as fh:
        fh.write(summary)
    return summary


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

SUBCOMMANDS = {
    "check-lyapunov": "lyapunov_check",
    "lipschitz": "lipschitz",
    "exp-moment": "exp_moment",
    "identity": "identity_residual",
    "blowup": "blowup",
    "monotonicity": "monotonicity",
    "burgers": "burgers",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdestab",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="TOML config path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--paths", type=int, default=None)
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--slack", type=float, default=None)
        p.add_argument("--model", default=None, help="zoo model name")
    rep = sub.add_parser("report")
    rep.add_argument("csvs", nargs="*", help="experiment CSV files")
    rep.add_argument("--out", default=".")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        summary = emit_report(args.csvs, args.out)
        sys.stdout.write(summary)
        return 0
    cfg = load_config(args.config)
    cfg["experiment"]["kind"] = SUBCOMMANDS[args.command]
    if args.seed is not None:
        cfg["mc"]["seed"] = args.seed
    if args.paths is not None:
        cfg["mc"]["n_paths"] = args.paths
    if args.dt is not None:
        cfg["mc"]["dt"] = args.dt
    if args.out is not None:
        cfg["output"]["dir"] = args.out
    if args.slack is not None:
        cfg["experiment"]["slack"] = args.slack
    if args.model is not None:
        cfg["model"]["name"] = args.model
    try:
        rows, ok, path = run_experiment(cfg)
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"sdestab: {exc}\n")
        return 2
    for row in rows:
        sys.stdout.write(
            f"{row['experiment']}: empirical={_fmt(row['empirical'])} "
            f"bound={_fmt(row['bound'])} verdict={row['verdict']}\n")
    sys.stdout.write(f"wrote {path}\n")
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

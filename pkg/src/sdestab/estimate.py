"""Monte Carlo estimators for L^p norms, uniform-in-time differences and
exponential moments, plus certificate verification.

Monte Carlo only upper-bounds the true L^p norm with confidence; the
verdicts here compare a CI upper edge against a closed-form certificate and
are stated at the configured confidence level, never as proofs.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .core import BoundCertificate, INF, McConfig, PairField, SdeModel
from .simulate import NoiseSource, coupled_ensemble_stats, exp_moment_ensemble

BOOTSTRAP_P_THRESHOLD = 8  # switch to bootstrap CIs for heavy-tailed moments
BOOTSTRAP_RESAMPLES = 200


def n_workers_from_env() -> int:
    try:
        return max(1, int(os.environ.get("SDESTAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class McEstimate:
    point_estimate: float
    ci_low: float
    ci_high: float
    n_effective: int
    estimator_kind: str  # lp | sup_lp | exp_moment | max
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.ci_low <= self.point_estimate <= self.ci_high):
            raise ValueError("CI must bracket the point estimate")


def _moment_ci(powered: np.ndarray, level: float):
    n = powered.size
    m = float(powered.mean())
    if n < 2:
        return m, m, m
    z = stats.norm.ppf(0.5 + level / 2.0)
    half = z * float(powered.std(ddof=1)) / math.sqrt(n)
    return m, m - half, m + half


def _bootstrap_ci(samples: np.ndarray, p: float, level: float, seed: int = 0):
    rng = np.random.default_rng(seed)
    n = samples.size
    vals = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        take = samples[rng.integers(0, n, n)]
        vals[b] = float(np.mean(take**p)) ** (1.0 / p)
    lo = float(np.percentile(vals, 100 * (0.5 - level / 2.0)))
    hi = float(np.percentile(vals, 100 * (0.5 + level / 2.0)))
    return lo, hi


def lp_norm(samples, p: float, ci_level: float = 0.95, kind: str = "lp",
            meta: Optional[dict] = None) -> McEstimate:
    """Empirical L^p norm of nonnegative samples with a confidence interval.

    p < inf: (mean of s^p)^{1/p}, CI by normal approximation on the p-th
    moment transformed through the monotone root; bootstrap fallback for
    p >= 8 (heavy tails).  p = inf: the max, CI collapsed onto it.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    if np.any(samples < 0):
        raise ValueError("samples must be nonnegative")
    meta = dict(meta or {})
    if p == INF:
        m = float(samples.max())
        return McEstimate(m, m, m, samples.size, "max", {}, meta)
    if not p > 0:
        raise ValueError("p must be positive")
    point = float(np.mean(samples**p)) ** (1.0 / p)
    flags = {}
    if samples.size < 2:
        lo = hi = point
    elif p >= BOOTSTRAP_P_THRESHOLD:
        lo, hi = _bootstrap_ci(samples, p, ci_level)
        lo, hi = min(lo, point), max(hi, point)
        flags["bootstrap"] = True
    else:
        _, m_lo, m_hi = _moment_ci(samples**p, ci_level)
        lo = max(0.0, m_lo) ** (1.0 / p)
        hi = m_hi ** (1.0 / p) if m_hi > 0 else point
        lo, hi = min(lo, point), max(hi, point)
    return McEstimate(point, lo, hi, samples.size, kind, flags, meta)


def empirical_lipschitz(
    model: SdeModel,
    x,
    y,
    query,
    cfg: McConfig,
    noise: Optional[NoiseSource] = None,
    distance: Optional[PairField] = None,
    metric: Optional[Callable] = None,
    n_workers: Optional[int] = None,
):
    """Coupled-pair estimates of the marginal and uniform L^r differences.

    ``distance`` (a PairField) or ``metric`` (a batch callable) replaces the
    Euclidean norm; marginal is the L^r norm of the distance at the stopped
    terminal state, uniform the L^r norm of its running sup.  If more than
    half of the pairs exit the domain before T the estimates are flagged
    unreliable.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.array_equal(x, y):
        meta = {"T": query.horizon, "r": query.r, "x": x, "y": y}
        zero = McEstimate(0.0, 0.0, 0.0, cfg.n_paths, "lp", {"coupled_zero": True}, meta)
        zsup = McEstimate(0.0, 0.0, 0.0, cfg.n_paths, "sup_lp", {"coupled_zero": True}, meta)
        return zero, zsup
    if noise is None:
        noise = NoiseSource(cfg.seed)
    if metric is None and distance is not None:
        def metric(X, Y, _v=distance.value):
            try:
                out = np.asarray(_v(X, Y), dtype=float)
                if out.shape == (X.shape[0],):
                    return out
            except Exception:
                pass
            return np.array([float(np.asarray(_v(xi, yi)).reshape(-1)[0])
                             for xi, yi in zip(X, Y)])
    cfg.require_ci()
    workers = n_workers_from_env() if n_workers is None else n_workers
    st = coupled_ensemble_stats(model, x, y, query.horizon, cfg, noise,
                                metric=metric, n_workers=workers)
    flags = {"exit_fraction": st.exit_fraction}
    if st.exit_fraction > 0.5:
        flags["unreliable"] = True
    meta = {"T": query.horizon, "r": query.r, "x": x, "y": y}
    marginal = lp_norm(st.final_metric, query.r, cfg.ci_level, "lp", meta)
    uniform = lp_norm(st.sup_metric, query.r, cfg.ci_level, "sup_lp", meta)
    marginal = McEstimate(marginal.point_estimate, marginal.ci_low, marginal.ci_high,
                          marginal.n_effective, marginal.estimator_kind,
                          {**marginal.flags, **flags}, meta)
    uniform = McEstimate(uniform.point_estimate, uniform.ci_low, uniform.ci_high,
                         uniform.n_effective, uniform.estimator_kind,
                         {**uniform.flags, **flags}, meta)
    return marginal, uniform


def exp_moment_estimate(
    model: SdeModel,
    fld,
    ubar: Optional[Callable],
    x,
    T: float,
    cfg: McConfig,
    noise: Optional[NoiseSource] = None,
    U_batch: Optional[Callable] = None,
    ubar_batch: Optional[Callable] = None,
    n_workers: Optional[int] = None,
) -> McEstimate:
    """Estimate E[exp(e^{-alpha T} U(X_T) + sum_k e^{-alpha t_k} Ubar dt)]
    over stopped paths.  Per-path overflow contributes +inf and flags the
    estimate."""
    if noise is None:
        noise = NoiseSource(cfg.seed)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if U_batch is None:
        U_batch = lambda X: np.array([fld.value(row) for row in X])
    if ubar_batch is None and ubar is not None:
        ubar_batch = lambda X: np.array([ubar(row) for row in X])
    workers = n_workers_from_env() if n_workers is None else n_workers
    st = exp_moment_ensemble(model, U_batch, fld.alpha, ubar_batch, x, T, cfg,
                             noise, n_workers=workers)
    flags = {"exit_fraction": st.exit_fraction}
    vals = st.values.copy()
    if st.overflowed.any():
        flags["overflow"] = True
        vals[st.overflowed] = math.inf
    meta = {"T": T, "r": 1.0, "x": x, "y": x}
    if not np.all(np.isfinite(vals)):
        m = math.inf
        return McEstimate(m, m, m, vals.size, "exp_moment", flags, meta)
    m, lo, hi = _moment_ci(vals, cfg.ci_level)
    lo = max(0.0, min(lo, m))
    return McEstimate(m, lo, max(hi, m), vals.size, "exp_moment", flags, meta)


@dataclass(frozen=True)
class Verdict:
    passed: bool
    margin: float
    empirical: float
    bound: float
    note: str = ""


def verify_certificate(empirical: McEstimate, cert: BoundCertificate,
                       slack: float = 0.0) -> Verdict:
    """Pass iff the empirical CI-high (point value for kind max) stays below
    cert.value * (1 + slack).  Mismatched (T, r, x, y) metadata is an error."""
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    if cert.query is not None and empirical.meta:
        q = cert.query
        meta = empirical.meta
        same = (
            math.isclose(meta.get("T", q.horizon), q.horizon)
            and (meta.get("r", q.r) == q.r)
            and np.allclose(meta.get("x", q.x), q.x)
            and np.allclose(meta.get("y", q.y), q.y)
        )
        if not same:
            raise ValueError("certificate and estimate metadata disagree (T, r, x, y)")
    upper = empirical.point_estimate if empirical.estimator_kind == "max" else empirical.ci_high
    threshold = cert.value * (1.0 + slack)
    passed = upper <= threshold
    margin = cert.value - upper
    return Verdict(passed, margin, upper, cert.value)

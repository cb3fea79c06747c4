"""Theoretical right-hand sides of the stability estimates and grid checks
of the Lyapunov-type inequalities that feed them.

Sups over continua are approximated by deterministic grids plus one local
refinement pass around the grid argmax; reports state the scanned box and
never claim global validity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import BoundCertificate, BoundQuery, INF, ScalarField, SdeModel, inv
from .operators import apply_operators

GRID_POINTS_PER_DIM = 1000  # default resolution of 1-d scans


def time_integral(beta: float, alpha: float, T: float, weight: str = "flat") -> float:
    """Exact value of  int_0^T beta * w(s) * exp(-alpha s) ds.

    weight "flat" means w = 1 (the i = 1 term of the marginal bound),
    "linear" means w(s) = 1 - s/T (the i = 0 term).  A series expansion is
    used for |alpha| T < 1e-8 to avoid cancellation.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    x = alpha * T
    if abs(x) < 1e-8:
        if weight == "flat":
            return beta * T * (1.0 - x / 2.0 + x * x / 6.0)
        if weight == "linear":
            return beta * T * (0.5 - x / 6.0 + x * x / 24.0)
        raise ValueError(f"unknown weight {weight!r}")
    em = math.exp(-x)
    if weight == "flat":
        return beta * (1.0 - em) / alpha
    if weight == "linear":
        return beta * ((1.0 - em) / alpha - (1.0 - (1.0 + x) * em) / (alpha * alpha * T))
    raise ValueError(f"unknown weight {weight!r}")


@dataclass(frozen=True)
class LyapunovCheckReport:
    grid_size: int
    worst_margin: float
    violating_points: tuple
    tol: float
    box_note: str = ""

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tol


def lyapunov_check(
    model: SdeModel,
    fld: ScalarField,
    ubar: Optional[Callable],
    grid: Sequence,
    t_grid: Sequence[float] = (0.0,),
    tol: float = 1e-9,
) -> LyapunovCheckReport:
    """Check  G U(x) + e^{-alpha t} |sigma^* grad U(x)|^2 / 2 + Ubar(t, x)
    <= alpha U(x) + beta  on the grid; report the worst margin (RHS - LHS).

    ``ubar`` is a callable (t, x) -> R or None (treated as 0).  A non-finite
    evaluation at a grid point is a hard failure naming the point.
    """
    alpha, beta = fld.alpha, fld.beta
    worst = math.inf
    violators = []
    n = 0
    for pt in grid:
        x = np.atleast_1d(np.asarray(pt, dtype=float))
        if not model.domain.contains(x):
            raise ValueError(f"grid point {x} outside the domain")
        ops = apply_operators(model, fld, x)
        noise_sq = float(ops.noise_row @ ops.noise_row)
        u_val = float(fld.value(x))
        for t in t_grid:
            n += 1
            ub = float(ubar(t, x)) if ubar is not None else 0.0
            lhs = ops.gen + math.exp(-alpha * t) * noise_sq / 2.0 + ub
            rhs = alpha * u_val + beta
            if not (math.isfinite(lhs) and math.isfinite(rhs)):
                raise ValueError(f"non-finite Lyapunov evaluation at t={t}, x={x}")
            margin = rhs - lhs
            if margin < worst:
                worst = margin
            if margin < -tol:
                violators.append((t, x.copy(), margin))
    return LyapunovCheckReport(n, worst, tuple(violators), tol)


def exp_moment_bound_rhs(fld: ScalarField, x) -> float:
    """exp(U(x)): certified bound for E[exp(e^{-alpha tau} U(X_tau)
    + int_0^tau e^{-alpha s} Ubar ds)] when the Lyapunov inequality holds
    with beta = 0.  Overflow returns +inf (flag via math.isinf)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = float(fld.value(x))
    try:
        return math.exp(u)
    except OverflowError:
        return math.inf


def exp_moment_bound_rhs_shifted(fld: ScalarField, x, T: float) -> float:
    """Shifted form exp(U(x) + int_0^T beta e^{-alpha s} ds) absorbing a
    nonzero beta in the Lyapunov inequality (beta must be >= 0 so that the
    integral bound is monotone in the stopping time)."""
    if fld.beta < 0:
        raise ValueError("shifted bound requires beta >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    expo = float(fld.value(x)) + time_integral(fld.beta, fld.alpha, T, "flat")
    try:
        return math.exp(expo)
    except OverflowError:
        return math.inf


def martingale_sup_bound(p: float, q: float, integral_bound: float) -> float:
    """Doob bound for the running sup of a stochastic exponential:

        (1 - 1/p)^{-1} exp( [1/(1/p - 1/q) - 1] I_q / 2 )

    where I_q certifies int_0^T ||A_s||^2 ds in L^q.  Needs p in (1, inf],
    q in [p, inf]; integral_bound >= 0.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    if q < p:
        raise ValueError("q must lie in [p, inf]")
    if integral_bound < 0:
        raise ValueError("integral_bound must be nonnegative")
    prefactor = 1.0 / (1.0 - inv(p))
    gap = inv(p) - inv(q)
    if gap == 0.0:
        # q = p forces a vanishing integral; the bound degenerates to 1
        if integral_bound > 0:
            raise ValueError("q = p requires integral_bound = 0")
        return 1.0
    return prefactor * math.exp(0.5 * (1.0 / gap - 1.0) * integral_bound)


def martingale_sup_bound_2p(p: float, integral_bound: float) -> float:
    """Convenience q = 2p form: (1 - 1/p)^{-1} exp((p - 1/2) I)."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    if p == INF:
        return martingale_sup_bound(p, INF, integral_bound)
    return martingale_sup_bound(p, 2.0 * p, integral_bound)


def _safe_exp(expo: float):
    try:
        v = math.exp(expo)
        return v, False
    except OverflowError:
        return math.inf, True


def thm_uv_bound(
    V_at_xy: float,
    c: float,
    t: float,
    U0_x: float,
    U0_y: float,
    U1_x: float,
    U1_y: float,
    beta0: float,
    beta1: float,
    q0: float,
    q1: float,
    alpha0: float = 0.0,
    alpha1: float = 0.0,
    query: Optional[BoundQuery] = None,
    exact_time_integral: bool = False,
) -> BoundCertificate:
    """Marginal-in-time bound on the L^r norm of V(X^x_t, X^y_t):

        V(x,y) exp( c t + sum_i [2 beta_i t + U_i(x) + U_i(y)] / (2 q_i) )

    With ``exact_time_integral``, the beta terms use the closed form
    int_0^t beta_i (1 - s/t)^{1-i} e^{-alpha_i s} ds / q_i instead of
    beta_i t / q_i.
    """
    if V_at_xy < 0:
        raise ValueError("V(x, y) must be nonnegative")
    if exact_time_integral:
        b0 = time_integral(beta0, alpha0, t, "linear") * inv(q0)
        b1 = time_integral(beta1, alpha1, t, "flat") * inv(q1)
    else:
        b0 = beta0 * t * inv(q0)
        b1 = beta1 * t * inv(q1)
    expo = c * t + b0 + (U0_x + U0_y) * inv(q0) / 2.0 + b1 + (U1_x + U1_y) * inv(q1) / 2.0
    factor, overflow = _safe_exp(expo)
    return BoundCertificate(
        value=V_at_xy * factor,
        theorem="ThmUV",
        query=query,
        constants_used={
            "c": c, "t": t, "beta0": beta0, "beta1": beta1,
            "alpha0": alpha0, "alpha1": alpha1, "q0": q0, "q1": q1,
            "U0_x": U0_x, "U0_y": U0_y, "U1_x": U1_x, "U1_y": U1_y,
            "V_at_xy": V_at_xy, "exact_time_integral": exact_time_integral,
        },
        overflow=overflow,
    )


@dataclass(frozen=True)
class UniformTerm:
    """One (i, j, l) exponential-moment contribution of the uniform bound.

    ``weight_j`` selects the time weight (1 - s/T)^{1-j}: j = 0 gives the
    T-averaged route, j = 1 the plain route.
    """

    beta: float
    alpha: float
    q: float
    U_x: float
    U_y: float
    weight_j: int = 1


def uniform_bound(
    V_at_xy: float,
    theta: float,
    p: float,
    T: float,
    c0: float,
    c1: float,
    terms: Sequence[UniformTerm] = (),
    query: Optional[BoundQuery] = None,
) -> BoundCertificate:
    """Uniform-in-time counterpart:

        V(x,y) / (1 - theta/p)^{1/theta} * exp( (c0 + c1) T
            + sum_terms [ int_0^T beta (1-s/T)^{1-j} e^{-alpha s} ds / q
                          + (U(x) + U(y)) / (2 q) ] )

    c0, c1 enter as constants (already time-averaged by the caller when they
    are genuinely time-dependent).  Rejects theta >= p.
    """
    if not (0 < theta < p):
        raise ValueError("theta must lie in (0, p)")
    if V_at_xy < 0:
        raise ValueError("V(x, y) must be nonnegative")
    prefactor = (1.0 - theta * inv(p)) ** (-1.0 / theta)
    expo = (c0 + c1) * T
    for tm in terms:
        w = "linear" if tm.weight_j == 0 else "flat"
        expo += time_integral(tm.beta, tm.alpha, T, w) * inv(tm.q)
        expo += (tm.U_x + tm.U_y) * inv(tm.q) / 2.0
    factor, overflow = _safe_exp(expo)
    return BoundCertificate(
        value=V_at_xy * prefactor * factor,
        theorem="ThmUV2",
        query=query,
        constants_used={
            "theta": theta, "p": p, "T": T, "c0": c0, "c1": c1,
            "prefactor": prefactor, "n_terms": len(terms),
            "V_at_xy": V_at_xy,
        },
        overflow=overflow,
    )


def uniform_bound_query(query: BoundQuery, constants: dict) -> BoundCertificate:
    """Query-first entry point to ``uniform_bound``: theta and the martingale
    exponent come from the query, everything else from ``constants``
    ({"V_at_xy", "c0", "c1", "terms": [UniformTerm, ...]})."""
    if query.theta is None:
        raise ValueError("uniform bounds need query.theta in (0, p)")
    return uniform_bound(
        V_at_xy=constants.get("V_at_xy", 1.0),
        theta=query.theta,
        p=query.p,
        T=query.horizon,
        c0=constants.get("c0", 0.0),
        c1=constants.get("c1", 0.0),
        terms=constants.get("terms", ()),
        query=query,
    )


def cor_uv3_bound(
    c0: float,
    c1: float,
    beta: float,
    c: float,
    eps: float,
    r: float,
    T: float,
    x,
    y,
    query: Optional[BoundQuery] = None,
) -> BoundCertificate:
    """Quadratic-growth convenience bound on the sup of ||X^x - X^y|| / ||x - y||:

        (1 - 1/r)^{-1/2} exp( (c0 + c1) T
            + [beta T + c (1 + ||x||^2)^eps + c (1 + ||y||^2)^eps] / (2 r) )
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    expo = (c0 + c1) * T + (
        beta * T
        + c * (1.0 + float(x @ x)) ** eps
        + c * (1.0 + float(y @ y)) ** eps
    ) * inv(r) / 2.0
    factor, overflow = _safe_exp(expo)
    return BoundCertificate(
        value=(1.0 - inv(r)) ** -0.5 * factor,
        theorem="CorUV3",
        query=query,
        constants_used={"c0": c0, "c1": c1, "beta": beta, "c": c, "eps": eps,
                        "r": r, "T": T},
        overflow=overflow,
    )


def _dir_diff_sigma(model: SdeModel, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """sigma'(x) v as a (d, m) matrix, from diffusion_jac or differences."""
    if model.diffusion_jac is not None:
        J = np.asarray(model.diffusion_jac(x), dtype=float)  # (d, m, d)
        return np.einsum("imk,k->im", J, v)
    h = 1e-7 * (1.0 + float(np.linalg.norm(x)))
    return (
        np.asarray(model.diffusion(x + h * v), float)
        - np.asarray(model.diffusion(x - h * v), float)
    ) / (2 * h)


def _dir_diff_mu(model: SdeModel, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    if model.drift_jac is not None:
        return np.asarray(model.drift_jac(x), dtype=float) @ v
    h = 1e-7 * (1.0 + float(np.linalg.norm(x)))
    return (
        np.asarray(model.drift(x + h * v), float)
        - np.asarray(model.drift(x - h * v), float)
    ) / (2 * h)


def monotonicity_quotient(model: SdeModel, p: float, x, y) -> float:
    """Difference-form expression at a pair (x, y):

        <x-y, mu(x)-mu(y)>/||x-y||^2 + ||sigma(x)-sigma(y)||_HS^2/(2||x-y||^2)
        + (p/2 - 1) ||(sigma(x)-sigma(y))^T (x-y)||^2 / ||x-y||^4
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x - y
    n2 = float(d @ d)
    if n2 == 0.0:
        raise ValueError("x and y must differ")
    dmu = np.asarray(model.drift(x), float) - np.asarray(model.drift(y), float)
    dsig = np.asarray(model.diffusion(x), float) - np.asarray(model.diffusion(y), float)
    proj = dsig.T @ d
    return (
        float(d @ dmu) / n2
        + 0.5 * float(np.sum(dsig * dsig)) / n2
        + (p / 2.0 - 1.0) * float(proj @ proj) / n2**2
    )


def monotonicity_derivative(model: SdeModel, p: float, x, v) -> float:
    """Derivative-form expression at (x, v):

        <v, mu'(x) v>/||v||^2 + ||sigma'(x) v||_HS^2/(2 ||v||^2)
        + (p/2 - 1) ||(sigma'(x) v)^T v||^2 / ||v||^4
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    n2 = float(v @ v)
    if n2 == 0.0:
        raise ValueError("direction must be nonzero")
    muv = _dir_diff_mu(model, x, v)
    sv = _dir_diff_sigma(model, x, v)
    proj = sv.T @ v
    return (
        float(v @ muv) / n2
        + 0.5 * float(np.sum(sv * sv)) / n2
        + (p / 2.0 - 1.0) * float(proj @ proj) / n2**2
    )


def _grid_directions(pts):
    dirs = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = pts[i] - pts[j]
            n = float(np.linalg.norm(d))
            if n > 0:
                dirs.append(d / n)
    if not dirs:
        dirs = [np.eye(pts[0].size)[k] for k in range(pts[0].size)]
    return dirs


def monotonicity_sup(
    model: SdeModel,
    p: float,
    mode: str,
    grid: Sequence,
    directions: Optional[Sequence] = None,
    near_h: float = 1e-8,
) -> float:
    """Sup of the monotonicity expression over a grid.

    mode "derivative_form": sup over grid points x and unit directions v
    (``directions``, or the normalized differences of all grid pairs).
    mode "difference_form": sup over all distinct grid pairs plus the
    matched near pairs (x, x + h v) along the same directions, so that the
    grid difference sup dominates the grid derivative sup up to O(h).  The
    grid must lie inside a convex subset of the domain; the value certifies
    only the scanned set.
    """
    pts = [np.atleast_1d(np.asarray(g, dtype=float)) for g in grid]
    if len(pts) == 0:
        raise ValueError("empty grid")
    if mode == "difference_form":
        dirs = ([np.atleast_1d(np.asarray(v, dtype=float)) for v in directions]
                if directions is not None else _grid_directions(pts))
        best = -math.inf
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.array_equal(pts[i], pts[j]):
                    continue
                best = max(best, monotonicity_quotient(model, p, pts[i], pts[j]))
        for x in pts:
            h = near_h * (1.0 + float(np.linalg.norm(x)))
            for v in dirs:
                xn = x + h * v
                if model.domain.contains(xn):
                    best = max(best, monotonicity_quotient(model, p, x, xn))
        if not math.isfinite(best):
            raise ValueError("difference form needs at least two distinct points")
        return best
    if mode == "derivative_form":
        dirs = ([np.atleast_1d(np.asarray(v, dtype=float)) for v in directions]
                if directions is not None else _grid_directions(pts))
        best = -math.inf
        for x in pts:
            for v in dirs:
                best = max(best, monotonicity_derivative(model, p, x, v))
        return best
    raise ValueError(f"unknown mode {mode!r}")


def grid_sup(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    n: int = GRID_POINTS_PER_DIM,
    log: bool = False,
    refine: int = 2,
) -> float:
    """Sup of a scalar function on [lo, hi] by grid scan plus local
    refinement around the argmax (``refine`` extra passes)."""
    if not hi > lo:
        raise ValueError("need hi > lo")
    if log and lo <= 0:
        raise ValueError("log grid needs lo > 0")
    xs = np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)
    vals = np.array([f(float(x)) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite value in grid_sup scan")
    best = float(vals.max())
    for _ in range(refine):
        k = int(vals.argmax())
        a = xs[max(0, k - 1)]
        b = xs[min(len(xs) - 1, k + 1)]
        if b <= a:
            break
        xs = np.linspace(a, b, n)
        vals = np.array([f(float(x)) for x in xs])
        best = max(best, float(vals.max()))
    return best


def minmax_theta(
    branches: Sequence[Callable[[float], float]],
    r_range: tuple = (1e-6, 1e6),
    n_grid: int = GRID_POINTS_PER_DIM,
    tol: float = 1e-8,
) -> tuple:
    """Minimize max_i branch_i(r) over r in r_range: coarse log-grid scan
    followed by golden-section refinement.  Returns (argmin, value)."""
    lo, hi = r_range
    if not (0 < lo < hi):
        raise ValueError("r_range must satisfy 0 < lo < hi")

    def obj(r: float) -> float:
        vals = [b(r) for b in branches]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite branch value at r={r}")
        return max(vals)

    rs = np.geomspace(lo, hi, n_grid)
    vals = np.array([obj(float(r)) for r in rs])
    k = int(vals.argmin())
    a = float(rs[max(0, k - 1)])
    b = float(rs[min(len(rs) - 1, k + 1)])
    # golden-section on [a, b]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = obj(c), obj(d)
    while (b - a) > tol * max(1.0, abs(a)) and (b - a) > 1e-15:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = obj(d)
    r_star = 0.5 * (a + b)
    v_star = obj(r_star)
    if vals[k] < v_star:
        r_star, v_star = float(rs[k]), float(vals[k])
    return r_star, v_star


def moment_bound_lyapunov(sup_ratio: float, U_at_x: float, t: float) -> float:
    """Certified E[U(X_t)] <= U(x) exp(t sup(G U / U))."""
    if not math.isfinite(sup_ratio):
        raise ValueError("sup_ratio must be finite")
    return U_at_x * math.exp(t * sup_ratio)

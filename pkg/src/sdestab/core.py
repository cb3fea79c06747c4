"""Core domain types: SDE models, scalar/pair fields, bound queries, configs.

All types are frozen dataclasses; field evaluators are expected to be pure
functions so instances can be shared freely across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

INF = math.inf

# Safety margin for strict inequalities defining open domains.
DEFAULT_DOMAIN_MARGIN = 1e-12

DOMAIN_KINDS = (
    "all_space",
    "positive_orthant",
    "open_box",
    "unit_interval_interior",
    "simplex_like",
)


def inv(e: float) -> float:
    """Reciprocal with the convention 1/inf = 0 (and 1/0 = inf)."""
    if e == INF:
        return 0.0
    if e == 0.0:
        return INF
    return 1.0 / e


@dataclass(frozen=True)
class DomainSpec:
    """State space O of a model, an open (or closed-orthant) subset of R^d.

    ``kind`` selects a built-in membership rule; ``membership`` may override
    it with an arbitrary predicate.  Open sets are tested with strict
    inequalities shrunk by ``margin`` so that simulated states that sit
    epsilon-close to the boundary still evaluate.
    """

    kind: str
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None
    margin: float = DEFAULT_DOMAIN_MARGIN
    membership: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if self.membership is not None:
            return bool(self.membership(x))
        return bool(np.all(self._mask(x[None, :])))

    def contains_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (N, d) array of states."""
        X = np.asarray(X, dtype=float)
        if self.membership is not None:
            return np.array([self.membership(row) for row in X], dtype=bool)
        return self._mask(X)

    # states beyond this magnitude are treated as having left the domain:
    # polynomial coefficients (and squared norms) must stay representable,
    # so membership would otherwise admit points where mu/sigma overflow
    STATE_CAP = 1e100

    def _mask(self, X: np.ndarray) -> np.ndarray:
        m = self.margin
        with np.errstate(invalid="ignore"):
            base = np.all(np.isfinite(X) & (np.abs(X) < self.STATE_CAP), axis=1)
        if self.kind == "all_space":
            return base
        if self.kind == "positive_orthant":
            return base & np.all(X > m, axis=1)
        if self.kind == "simplex_like":
            # closed nonnegative orthant (SIR, Brusselator)
            return base & np.all(X >= -m, axis=1)
        if self.kind == "unit_interval_interior":
            return base & np.all((X > m) & (X < 1.0 - m), axis=1)
        if self.kind == "open_box":
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            return base & np.all((X > lo + m) & (X < hi - m), axis=1)
        raise AssertionError(self.kind)


@dataclass(frozen=True)
class SdeModel:
    """The pair (mu, sigma) on a domain O, with dimensions d and m.

    ``drift`` maps x in O to R^d and ``diffusion`` maps x to R^{d x m}.  Both
    should accept a batch (N, d) and return (N, d) / (N, d, m); the
    integrator falls back to a row loop if they do not.  ``drift_jac`` /
    ``diffusion_jac`` optionally supply first derivatives (used by the
    global-monotonicity scans): drift_jac(x) is (d, d), diffusion_jac(x) is
    (d, m, d) with entry [i, j, k] = d sigma_ij / d x_k.  ``transform``
    optionally names a coordinate change for positive/bounded domains (see
    simulate.Transform).
    """

    dim_state: int
    dim_noise: int
    drift: Callable
    diffusion: Callable
    domain: DomainSpec
    name: str = ""
    drift_jac: Optional[Callable] = None
    diffusion_jac: Optional[Callable] = None
    transform: Optional[object] = None

    def __post_init__(self):
        if self.dim_state < 1 or self.dim_noise < 1:
            raise ValueError("dimensions must be positive")


@dataclass(frozen=True)
class ScalarField:
    """A Lyapunov candidate U with caller-supplied derivatives.

    ``alpha`` and ``beta`` are the constants of the exponential-moment
    inequality  G U + e^{-alpha t} |sigma^* grad U|^2 / 2 + Ubar <= alpha U + beta.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    alpha: float = 0.0
    beta: float = 0.0
    name: str = ""


@dataclass(frozen=True)
class PairField:
    """A distance-like function V on O^2 with first and second partials.

    dx, dy are (d,) gradients in the first/second slot; dxx, dyy are (d, d)
    Hessians; dxy is the (d, d) mixed block with dxy[j, k] = d^2 V / dx_j dy_k.
    ``zero_set_note`` records whether V^{-1}(0) subset (Gbar V)^{-1}([0, inf))
    is asserted by the constructor (needed for the pathwise identity).
    """

    value: Callable
    dx: Callable
    dy: Callable
    dxx: Callable
    dxy: Callable
    dyy: Callable
    zero_set_note: str = ""
    nonnegative: bool = True
    name: str = ""


@dataclass(frozen=True)
class BoundQuery:
    """Exponents, horizon and initial points of a stability estimate.

    The Hoelder split 1/r = 1/p + 1/q0 + 1/q1 must hold exactly (inf is a
    legal exponent, with 1/inf = 0).  theta/rho_aux only constrain uniform
    (sup-inside) bounds.
    """

    horizon: float
    r: float
    p: float
    q0: float
    q1: float
    x: np.ndarray
    y: np.ndarray
    theta: Optional[float] = None
    rho_aux: Optional[float] = None

    HOLDER_TOL = 1e-12

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        for name in ("r", "p", "q0", "q1"):
            e = getattr(self, name)
            if not (e > 0):
                raise ValueError(f"exponent {name} must lie in (0, inf]")
        gap = abs(inv(self.r) - (inv(self.p) + inv(self.q0) + inv(self.q1)))
        if not gap <= self.HOLDER_TOL:
            raise ValueError(
                f"Hoelder identity violated: |1/r - 1/p - 1/q0 - 1/q1| = {gap:.3e}"
            )
        if self.theta is not None and not (0 < self.theta < self.p):
            raise ValueError("theta must lie in (0, p)")
        if self.rho_aux is not None and not (self.rho_aux >= self.p):
            raise ValueError("rho_aux must lie in [p, inf]")
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)))


@dataclass(frozen=True)
class BoundCertificate:
    """A theoretical bound value plus the constants that produced it."""

    value: float
    theorem: str
    query: Optional[BoundQuery] = None
    constants_used: dict = field(default_factory=dict)
    overflow: bool = False

    def __post_init__(self):
        if not (self.value >= 0.0) or math.isnan(self.value):
            raise ValueError("certificate value must be finite and nonnegative (or +inf with overflow flag)")
        if math.isinf(self.value) and not self.overflow:
            raise ValueError("infinite certificate must carry the overflow flag")


@dataclass(frozen=True)
class NoCertificate:
    """Explicit absence of a certificate for an infeasible query."""

    reason: str
    theorem: str = ""


SCHEMES = ("euler_maruyama", "transformed", "reflected_transformed")


@dataclass(frozen=True)
class McConfig:
    n_paths: int
    dt: float
    seed: int
    scheme: str = "euler_maruyama"
    ci_level: float = 0.95

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not (0.0 < self.ci_level < 1.0):
            raise ValueError("ci_level must lie in (0, 1)")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")

    def n_steps(self, horizon: float) -> int:
        """Step count; dt must divide the horizon up to rounding noise."""
        n = int(round(horizon / self.dt))
        if n < 1 or abs(n * self.dt - horizon) > 4 * max(
            np.spacing(horizon), n * np.spacing(self.dt)
        ):
            raise ValueError(f"dt={self.dt} does not divide horizon={horizon}")
        return n

    def require_ci(self):
        if self.n_paths < 2:
            raise ValueError("confidence interval requires n_paths >= 2")


@dataclass(frozen=True)
class ValidationRow:
    point: np.ndarray
    in_domain: bool
    drift_finite: bool
    diffusion_finite: bool
    shape_ok: bool

    @property
    def passed(self) -> bool:
        return self.in_domain and self.drift_finite and self.diffusion_finite and self.shape_ok


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple
    passed: bool
    failures: tuple


def validate_model(model: SdeModel, probe_points: Sequence) -> ValidationReport:
    """Probe a model: domain membership, finite drift/diffusion, shapes.

    Non-finite evaluations are reported, not raised.  An empty probe list is
    rejected.
    """
    if len(probe_points) == 0:
        raise ValueError("probe_points must be nonempty")
    rows = []
    for pt in probe_points:
        x = np.atleast_1d(np.asarray(pt, dtype=float))
        in_dom = model.domain.contains(x) and x.shape == (model.dim_state,)
        drift_ok = diff_ok = shape_ok = False
        if in_dom:
            try:
                mu = np.asarray(model.drift(x), dtype=float)
                sig = np.asarray(model.diffusion(x), dtype=float)
                drift_ok = bool(np.all(np.isfinite(mu)))
                diff_ok = bool(np.all(np.isfinite(sig)))
                shape_ok = mu.shape == (model.dim_state,) and sig.shape == (
                    model.dim_state,
                    model.dim_noise,
                )
            except (FloatingPointError, ValueError, ZeroDivisionError):
                pass
        rows.append(ValidationRow(x, in_dom, drift_ok, diff_ok, shape_ok))
    failures = tuple(r for r in rows if not r.passed)
    return ValidationReport(tuple(rows), len(failures) == 0, failures)


def _central_gradient(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _central_hessian(f, x, h):
    x = np.asarray(x, dtype=float)
    d = x.size
    H = np.empty((d, d))
    fx = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        H[i, i] = (f(x + ei) - 2 * fx + f(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h**2)
    return H


def fd_consistency(fld, points, h: float = 1e-5) -> float:
    """Max relative gap between analytic derivatives and central differences.

    Works for ScalarField (gradient and Hessian against differences of
    ``value``) and PairField (all five partial blocks).  Relative error is
    |analytic - fd| / (1 + |analytic|), maximized over components and points.
    Raises ValueError on non-finite evaluations.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    pts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    worst = 0.0

    def accum(analytic, approx):
        nonlocal worst
        analytic = np.asarray(analytic, dtype=float)
        approx = np.asarray(approx, dtype=float)
        if not (np.all(np.isfinite(analytic)) and np.all(np.isfinite(approx))):
            raise ValueError("non-finite evaluation in fd_consistency")
        err = np.abs(analytic - approx) / (1.0 + np.abs(analytic))
        worst = max(worst, float(err.max()) if err.size else 0.0)

    if isinstance(fld, ScalarField):
        for x in pts:
            accum(fld.gradient(x), _central_gradient(fld.value, x, h))
            accum(fld.hessian(x), _central_hessian(fld.value, x, h))
    elif isinstance(fld, PairField):
        if len(pts) % 2:
            raise ValueError("PairField consistency needs an even list: x1, y1, x2, y2, ...")
        for x, y in zip(pts[0::2], pts[1::2]):
            accum(fld.dx(x, y), _central_gradient(lambda u: fld.value(u, y), x, h))
            accum(fld.dy(x, y), _central_gradient(lambda v: fld.value(x, v), y, h))
            accum(fld.dxx(x, y), _central_hessian(lambda u: fld.value(u, y), x, h))
            accum(fld.dyy(x, y), _central_hessian(lambda v: fld.value(x, v), y, h))
            # mixed block: central differences in x of dV/dy
            d = x.size
            M = np.empty((d, d))
            for j in range(d):
                e = np.zeros(d)
                e[j] = h
                M[j, :] = (
                    _central_gradient(lambda v: fld.value(x + e, v), y, h)
                    - _central_gradient(lambda v: fld.value(x - e, v), y, h)
                ) / (2 * h)
            accum(fld.dxy(x, y), M)
    else:
        raise TypeError("fd_consistency expects a ScalarField or PairField")
    return worst


def hessian_symmetry_gap(fld: ScalarField, points) -> float:
    """Max relative asymmetry of the Hessian over the given points."""
    worst = 0.0
    for p in points:
        H = np.asarray(fld.hessian(np.atleast_1d(np.asarray(p, dtype=float))))
        scale = 1.0 + np.abs(H).max()
        worst = max(worst, float(np.abs(H - H.T).max()) / scale)
    return worst


def quadratic_field(rho: float, d: int, alpha: float = 0.0, beta: float = 0.0,
                    name: str = "") -> ScalarField:
    """U(x) = rho ||x||^2 with exact derivatives."""
    return ScalarField(
        value=lambda x: rho * float(np.dot(x, x)),
        gradient=lambda x: 2.0 * rho * np.asarray(x, dtype=float),
        hessian=lambda x: 2.0 * rho * np.eye(d),
        alpha=alpha,
        beta=beta,
        name=name or f"quadratic(rho={rho})",
    )


def squared_distance_pair(d: int) -> PairField:
    """V(x, y) = ||x - y||^2 with exact partials (batch-aware on the leading
    axis, like the model coefficient functions)."""
    eye = np.eye(d)

    def value(x, y):
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return np.sum(diff * diff, axis=-1)

    return PairField(
        value=value,
        dx=lambda x, y: 2.0 * (np.asarray(x) - np.asarray(y)),
        dy=lambda x, y: -2.0 * (np.asarray(x) - np.asarray(y)),
        dxx=lambda x, y: 2.0 * eye,
        dxy=lambda x, y: -2.0 * eye,
        dyy=lambda x, y: 2.0 * eye,
        zero_set_note="V=0 iff x=y, where GbarV=0: zero-set condition holds",
        name="squared_distance",
    )

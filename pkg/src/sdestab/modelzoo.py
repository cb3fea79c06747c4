"""Constructors for the example models with their Lyapunov data, certified
constants and closed-form bound formulas.

Each bound formula is transcribed once, parameterized by its free constants
(rho, theta, exponent splits, ...); ``certificate`` minimizes over a small
deterministic grid of those constants, since the estimates hold for every
admissible choice.  Sups over unbounded sets are grid certificates: the
scanned box is recorded in ``constants_used`` and no global claim is made
beyond it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .core import (
    BoundCertificate,
    BoundQuery,
    DomainSpec,
    INF,
    NoCertificate,
    PairField,
    ScalarField,
    SdeModel,
    inv,
    quadratic_field,
)
from .bounds import grid_sup, minmax_theta, time_integral
from .operators import PhiMap, pair_field_from_phi
from .simulate import Transform

ZOO_NAMES = (
    "van_der_pol",
    "duffing_vdp",
    "lorenz",
    "langevin",
    "brownian_dynamics",
    "sir",
    "psychology",
    "brusselator",
    "volatility",
    "wright_fisher",
    "rotation_counterexample",
)

RHO_GRID = np.array([0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0])


@dataclass(frozen=True)
class LyapunovData:
    field: ScalarField
    ubar: Optional[Callable] = None  # (t, x) -> float
    value_batch: Optional[Callable] = None  # (N, d) -> (N,)
    ubar_batch: Optional[Callable] = None  # (N, d) -> (N,)


@dataclass(frozen=True)
class ZooEntry:
    name: str
    params: dict
    model: SdeModel
    lyapunov: tuple
    distance: Optional[PairField]
    bound_fn: Callable  # query -> BoundCertificate | NoCertificate
    feasibility: Callable  # (params, query) -> (bool, reason)
    extra_bounds: dict = dc_field(default_factory=dict)
    metrics: dict = dc_field(default_factory=dict)  # name -> batch metric(X, Y)
    default_box: tuple = ()
    notes: str = ""


def _leading(fn_rows):
    """Lift a row function (d,) -> out to accept (N, d) batches."""

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return fn_rows(x[None, :])[0]
        return fn_rows(x)

    return wrapped


def _euclid_metric(X, Y):
    return np.linalg.norm(X - Y, axis=1)


def _cert(value, theorem, query, constants):
    overflow = math.isinf(value)
    return BoundCertificate(value=value, theorem=theorem, query=query,
                            constants_used=constants, overflow=overflow)


def _exp(expo: float) -> float:
    try:
        return math.exp(expo)
    except OverflowError:
        return math.inf


# ----------------------------------------------------------------------
# van der Pol
# ----------------------------------------------------------------------

def vdp_vartheta(rho: float, params: dict) -> float:
    d1 = abs(params["delta"] - 1.0)
    e0, e1, g = params["eta0"], params["eta1"], params["gamma"]
    branches = [lambda r: d1 / r + e1, lambda r: r * d1 + 2.0 * g + 4.0 * e0 * rho]
    _, val = minmax_theta(branches)
    return val


def _build_van_der_pol(params):
    al, g, de = params["alpha"], params["gamma"], params["delta"]
    noise = params["noise"]
    if noise == "additive":
        e0, e1, lip_g = params["eta0"], 0.0, 0.0
        sig_fn = lambda x1: np.full_like(x1, math.sqrt(e0))
        sig_d1 = lambda x1: 0.0
    elif noise == "linear":
        cg = math.sqrt(params["eta1"])
        e0, e1, lip_g = 0.0, params["eta1"], cg
        sig_fn = lambda x1: cg * x1
        sig_d1 = lambda x1: cg
    else:
        raise ValueError("van_der_pol noise must be 'additive' or 'linear'")
    params = dict(params, eta0=e0, eta1=e1, lip_g=lip_g)

    def drift(X):
        x1, x2 = X[:, 0], X[:, 1]
        return np.stack([x2, (g - al * x1**2) * x2 - de * x1], axis=1)

    def diffusion(X):
        out = np.zeros((X.shape[0], 2, 1))
        out[:, 1, 0] = sig_fn(X[:, 0])
        return out

    def drift_jac(x):
        x1, x2 = x
        return np.array([[0.0, 1.0], [-2 * al * x1 * x2 - de, g - al * x1**2]])

    def diffusion_jac(x):
        J = np.zeros((2, 1, 2))
        J[1, 0, 0] = sig_d1(x[0])
        return J

    model = SdeModel(2, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "van_der_pol",
                     drift_jac, diffusion_jac)

    rho_star = 1.0 if e1 == 0.0 else al / (2.0 * e1)
    theta_star = vdp_vartheta(rho_star, params)
    U = quadratic_field(rho_star, 2, alpha=theta_star, beta=rho_star * e0,
                        name="vdp_U")
    cu = 2.0 * rho_star * (al - rho_star * e1)
    ubar = lambda t, x: cu * (x[0] * x[1]) ** 2
    lyap = LyapunovData(U, ubar,
                        value_batch=lambda X: rho_star * np.sum(X * X, axis=1),
                        ubar_batch=lambda X: cu * (X[:, 0] * X[:, 1]) ** 2)

    def rho_candidates():
        hi = al / e1 if e1 > 0 else 40.0
        return [r for r in RHO_GRID * hi / 20.0 if 0 < r < hi] or [hi / 2.0]

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(van_der_pol)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        base = (g + math.sqrt(g * g + (de - 1.0) ** 2)) * T / 2.0
        dist = float(np.linalg.norm(x - y))
        best, best_c = math.inf, {}
        for rho in rho_candidates():
            th = vdp_vartheta(rho, params)
            eI = time_integral(1.0, -th, T, "flat")  # int_0^T e^{theta s} ds
            if noise == "additive":
                expo = base + r * al**2 * eI / (8.0 * rho * (al - rho * e1)) \
                    + (0.5 + rho * float(x @ x) + rho * float(y @ y)) / (2.0 * r)
                val = dist * _exp(expo)
                consts = {"rho": rho, "vartheta": th, "form": "additive"}
            else:
                val, consts = math.inf, {}
                for theta in (1.0, 2.0):
                    for pf in (4.0 * r, 8.0 * r, INF):
                        if theta >= pf:
                            continue
                        qf = 1.0 / (inv(r) - inv(pf)) if inv(r) > inv(pf) else INF
                        if qf == INF:
                            continue
                        pre = (1.0 - theta * inv(pf)) ** (-1.0 / theta)
                        expo = base \
                            + (pf + max(2.0, 4.0 - theta)) * T * lip_g**2 / 8.0 \
                            + qf * al**2 * eI / (8.0 * rho * (al - rho * e1)) \
                            + (0.5 + rho * float(x @ x) + rho * float(y @ y)) / (2.0 * qf)
                        cand = pre * dist * _exp(expo)
                        if cand < val:
                            val = cand
                            consts = {"rho": rho, "vartheta": th, "theta": theta,
                                      "p": pf, "q": qf, "form": "general"}
            if val < best:
                best, best_c = val, consts
        return _cert(best, "ModelSpecific(van_der_pol)", query, best_c)

    def feasibility(pp, query):
        if query.r == INF or not math.isfinite(query.r):
            return False, "needs a finite L^r exponent"
        if pp["eta1"] > 0 and pp["alpha"] <= 0:
            return False, "needs alpha > 0 when the noise grows linearly"
        return True, ""

    return ZooEntry("van_der_pol", params, model, (lyap,), None, bound_fn,
                    feasibility, default_box=((-2.0, 2.0), (-2.0, 2.0)))


# ----------------------------------------------------------------------
# Duffing-van der Pol
# ----------------------------------------------------------------------

def _build_duffing(params):
    a1, a2, a3 = params["alpha1"], params["alpha2"], params["alpha3"]
    if not (a2 > 0 and a3 > 0):
        raise ValueError("duffing_vdp needs alpha2 > 0 and alpha3 > 0")
    noise = params["noise"]
    if noise == "additive":
        e0, e1, lip_g = params["eta0"], 0.0, 0.0
        sig_fn = lambda x1: np.full_like(x1, math.sqrt(e0))
        sig_d1 = lambda x1: 0.0
    elif noise == "linear":
        cg = math.sqrt(params["eta1"])
        e0, e1, lip_g = 0.0, params["eta1"], cg
        sig_fn = lambda x1: cg * x1
        sig_d1 = lambda x1: cg
    else:
        raise ValueError("duffing_vdp noise must be 'additive' or 'linear'")
    params = dict(params, eta0=e0, eta1=e1, lip_g=lip_g)

    def drift(X):
        x1, x2 = X[:, 0], X[:, 1]
        return np.stack([x2, a2 * x2 - a1 * x1 - a3 * x1**2 * x2 - x1**3], axis=1)

    def diffusion(X):
        out = np.zeros((X.shape[0], 2, 1))
        out[:, 1, 0] = sig_fn(X[:, 0])
        return out

    def drift_jac(x):
        x1, x2 = x
        return np.array([
            [0.0, 1.0],
            [-a1 - 2 * a3 * x1 * x2 - 3 * x1**2, a2 - a3 * x1**2],
        ])

    def diffusion_jac(x):
        J = np.zeros((2, 1, 2))
        J[1, 0, 0] = sig_d1(x[0])
        return J

    model = SdeModel(2, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "duffing_vdp",
                     drift_jac, diffusion_jac)

    rho_star = 1.0 if e1 == 0.0 else a3 / (2.0 * e1)
    aL = 2.0 * (rho_star * e0 + a2)
    bL = rho_star * e0 + rho_star * max(0.0, e1 - 2 * a1 * (rho_star * e0 + a2)) ** 2 / (4 * (rho_star * e0 + a2))

    def u_val(x):
        return rho_star * (x[0] ** 4 / 2.0 + a1 * x[0] ** 2 + x[1] ** 2)

    U = ScalarField(
        value=u_val,
        gradient=lambda x: rho_star * np.array([2 * x[0] ** 3 + 2 * a1 * x[0], 2 * x[1]]),
        hessian=lambda x: rho_star * np.array([[6 * x[0] ** 2 + 2 * a1, 0.0], [0.0, 2.0]]),
        alpha=aL,
        beta=bL,
        name="duffing_U",
    )
    cu = 2.0 * rho_star * (a3 - rho_star * e1)
    lyap = LyapunovData(
        U,
        lambda t, x: cu * (x[0] * x[1]) ** 2,
        value_batch=lambda X: rho_star * (X[:, 0] ** 4 / 2 + a1 * X[:, 0] ** 2 + X[:, 1] ** 2),
        ubar_batch=lambda X: cu * (X[:, 0] * X[:, 1]) ** 2,
    )

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(duffing_vdp)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        ustar = ((x[0] ** 4 + y[0] ** 4) / 4.0
                 + a1 * (x[0] ** 2 + y[0] ** 2) / 2.0
                 + (x[1] ** 2 + y[1] ** 2) / 2.0)
        rho_hi = a3 / e1 if e1 > 0 else 40.0
        rhos = [rr for rr in RHO_GRID * rho_hi / 20.0 if 0 < rr < rho_hi] or [rho_hi / 2.0]
        ps = [INF] if noise == "additive" else [4.0 * r, 8.0 * r, INF]
        best, best_c = math.inf, {}
        for pf in ps:
            rest = inv(r) - inv(pf)
            if rest <= 0 or (pf != INF and pf <= 2):
                continue
            pre = 1.0 if pf == INF else 1.0 / math.sqrt(1.0 - 2.0 / pf)
            for split in (0.5, 0.3, 0.7):
                q0 = 1.0 / (rest * split)
                q1 = 1.0 / (rest * (1.0 - split))
                for r0 in rhos:
                    for r1 in rhos:
                        g0 = 2.0 * T * (r0 * e0 + a2)
                        g1 = 2.0 * T * (r1 * e0 + a2)
                        expo = (
                            1.0 / (2 * q0) + 1.0 / (2 * q1)
                            + a2 * T + (a1 + 1.0) * T / 2.0
                            + (0.0 if pf == INF else (pf + 2.0) * T * lip_g**2 / 8.0)
                            + e1**2 * T / (8 * q0 * (r0 * e0 + a2))
                            + 2.0 * e1**2 * T / (8 * q1 * (r1 * e0 + a2))
                            + q0 * T**2 * _exp(g0) / r0
                            + q1 * a3**2 * _exp(g1) / (8 * r1 * (a3 - r1 * e1))
                            + (r0 / q0 + r1 / q1) * ustar
                        )
                        val = pre * dist * _exp(expo)
                        if val < best:
                            best = val
                            best_c = {"p": pf, "q0": q0, "q1": q1,
                                      "rho0": r0, "rho1": r1}
        return _cert(best, "ModelSpecific(duffing_vdp)", query, best_c)

    def feasibility(pp, query):
        if not math.isfinite(query.r):
            return False, "needs a finite L^r exponent"
        return True, ""

    return ZooEntry("duffing_vdp", params, model, (lyap,), None, bound_fn,
                    feasibility, default_box=((-2.0, 2.0), (-2.0, 2.0)))


# ----------------------------------------------------------------------
# Lorenz
# ----------------------------------------------------------------------

def lorenz_vartheta(params) -> float:
    a1, a2 = params["alpha1"], params["alpha2"]
    branches = [lambda r: (a1 + a2) ** 2 / r - 2.0 * a1,
                lambda r: r - 1.0,
                lambda r: 0.0]
    _, val = minmax_theta(branches)
    return val


def _build_lorenz(params):
    a1, a2, a3, beta = (params["alpha1"], params["alpha2"], params["alpha3"],
                        params["beta"])
    A = np.array([[-a1, a1, 0.0], [a2, -1.0, 0.0], [0.0, 0.0, -a3]])

    def drift(X):
        out = X @ A.T
        out[:, 1] -= X[:, 0] * X[:, 2]
        out[:, 2] += X[:, 0] * X[:, 1]
        return out

    def diffusion(X):
        return np.broadcast_to(math.sqrt(beta) * np.eye(3), (X.shape[0], 3, 3)).copy()

    def drift_jac(x):
        return A + np.array([
            [0.0, 0.0, 0.0],
            [-x[2], 0.0, -x[0]],
            [x[1], x[0], 0.0],
        ])

    model = SdeModel(3, 3, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "lorenz",
                     drift_jac, lambda x: np.zeros((3, 3, 3)))
    vt = lorenz_vartheta(params)
    lam_max = float(np.linalg.eigvalsh(A + A.T).max())

    rho_star = params.get("rho", 0.05)
    U = quadratic_field(rho_star, 3, alpha=2.0 * rho_star * beta + vt,
                        beta=3.0 * rho_star * beta, name="lorenz_U")
    lyap = LyapunovData(U, None,
                        value_batch=lambda X: rho_star * np.sum(X * X, axis=1))

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(lorenz)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        best, best_c = math.inf, {}
        for rho in RHO_GRID:
            expo = (lam_max * T / 2.0
                    + r * T**2 * _exp((2 * rho * beta + vt) * T) / (32.0 * rho)
                    + (3.0 + rho * float(x @ x) + rho * float(y @ y)) / (2.0 * r))
            val = dist * _exp(expo)
            if val < best:
                best, best_c = val, {"rho": rho, "vartheta": vt,
                                     "lambda_max": lam_max}
        return _cert(best, "ModelSpecific(lorenz)", query, best_c)

    def feasibility(pp, query):
        if not math.isfinite(query.r):
            return False, "needs a finite L^r exponent"
        return True, ""

    def exp_moment_cert(x, rho=None):
        rho = rho_star if rho is None else rho
        return _exp(1.5 + rho * float(np.dot(x, x)))

    entry = ZooEntry("lorenz", params, model, (lyap,), None, bound_fn,
                     feasibility,
                     extra_bounds={"exp_moment": exp_moment_cert},
                     default_box=((-2.0, 2.0),) * 3)
    return entry


# ----------------------------------------------------------------------
# double-well potential (shared by the two Langevin-type models)
# ----------------------------------------------------------------------

def doublewell_value(U):  # U is (N, m)
    s = np.sum(U * U, axis=1)
    return (s - 1.0) ** 2 / 4.0


def doublewell_grad(U):
    s = np.sum(U * U, axis=1, keepdims=True)
    return (s - 1.0) * U


def doublewell_hess(u):  # single point (m,)
    s = float(u @ u)
    return (s - 1.0) * np.eye(u.size) + 2.0 * np.outer(u, u)


def _build_langevin(params):
    g, eps, m = params["gamma"], params["eps"], int(params["m"])
    d = 2 * m

    def drift(X):
        pos, vel = X[:, :m], X[:, m:]
        return np.concatenate([vel, -doublewell_grad(pos) - g * vel], axis=1)

    def diffusion(X):
        out = np.zeros((X.shape[0], d, m))
        out[:, m:, :] = math.sqrt(eps) * np.eye(m)
        return out

    def drift_jac(x):
        J = np.zeros((d, d))
        J[:m, m:] = np.eye(m)
        J[m:, :m] = -doublewell_hess(x[:m])
        J[m:, m:] = -g * np.eye(m)
        return J

    model = SdeModel(d, m, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "langevin",
                     drift_jac, lambda x: np.zeros((d, m, d)))

    rho_star = min(1.0, 2.0 * g / eps)

    def u0_val(x):
        pos, vel = x[:m], x[m:]
        return rho_star * (float(doublewell_value(pos[None, :])[0]) + float(vel @ vel) / 2.0)

    U0 = ScalarField(
        value=u0_val,
        gradient=lambda x: rho_star * np.concatenate(
            [doublewell_grad(x[None, :m])[0], x[m:]]),
        hessian=lambda x: rho_star * np.block(
            [[doublewell_hess(x[:m]), np.zeros((m, m))],
             [np.zeros((m, m)), np.eye(m)]]),
        alpha=0.0,
        beta=rho_star * eps * m / 2.0,
        name="langevin_U0",
    )
    cu = rho_star * (g - rho_star * eps / 2.0)
    lyap = LyapunovData(
        U0,
        lambda t, x: cu * float(x[m:] @ x[m:]),
        value_batch=lambda X: rho_star * (doublewell_value(X[:, :m])
                                          + np.sum(X[:, m:] ** 2, axis=1) / 2.0),
        ubar_batch=lambda X: cu * np.sum(X[:, m:] ** 2, axis=1),
    )

    box = params.get("scan_box", 3.0)
    scan = np.linspace(-box, box, 61)

    def lip_constant(rho, r, T):
        # grid certificate for the potential's Lyapunov-weighted Lipschitz
        # quotient |grad U(u) - grad U(v)| / (2 |u - v|) (positions, m = 1)
        best = -math.inf
        for i, u in enumerate(scan):
            for v in scan[i + 1:]:
                quot = abs((u**3 - u) - (v**3 - v)) / (2.0 * abs(u - v))
                pen = rho * ((u * u - 1.0) ** 2 / 4.0 + (v * v - 1.0) ** 2 / 4.0) / (2.0 * r * T)
                best = max(best, quot - pen)
        return max(best, 0.0)

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(langevin)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        best, best_c = math.inf, {}
        for rho in [rr for rr in RHO_GRID if rr <= 2.0 * g / eps]:
            c = lip_constant(rho, r, T)
            u0x = rho * ((float(x[:m] @ x[:m]) - 1.0) ** 2 / 4.0 + float(x[m:] @ x[m:]) / 2.0)
            u0y = rho * ((float(y[:m] @ y[:m]) - 1.0) ** 2 / 4.0 + float(y[m:] @ y[m:]) / 2.0)
            expo = (c + 0.5 + rho * eps * m / (4.0 * r)) * T + (u0x + u0y) / (2.0 * r)
            val = dist * _exp(expo)
            if val < best:
                best, best_c = val, {"rho": rho, "c": c, "scan_box": box}
        return _cert(best, "ModelSpecific(langevin)", query, best_c)

    def feasibility(pp, query):
        if not math.isfinite(query.r):
            return False, "needs a finite L^r exponent"
        if int(pp["m"]) != 1:
            return False, "certificate grid scan is implemented for m = 1"
        return True, ""

    return ZooEntry("langevin", params, model, (lyap,), None, bound_fn,
                    feasibility, default_box=((-2.0, 2.0),) * d)


def _build_brownian_dynamics(params):
    eps, d = params["eps"], int(params["d"])
    e0, e1, e2 = params["eta0"], params["eta1"], params["eta2"]
    if not (0.0 <= e2 <= 2.0 / eps):
        raise ValueError("eta2 must lie in [0, 2/eps]")

    def drift(X):
        return -doublewell_grad(X)

    def diffusion(X):
        return np.broadcast_to(math.sqrt(eps) * np.eye(d), (X.shape[0], d, d)).copy()

    model = SdeModel(d, d, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "brownian_dynamics",
                     lambda x: -doublewell_hess(x),
                     lambda x: np.zeros((d, d, d)))

    # Laplacian condition Delta U <= eta0 + 2 eta1 U + eta2 |grad U|^2,
    # verified on a coarse grid at build time.
    ss = np.linspace(0.0, 25.0, 400)  # s = |u|^2
    lhs = (d + 2.0) * ss - d
    rhs = e0 + 2.0 * e1 * (ss - 1.0) ** 2 / 4.0 + e2 * (ss - 1.0) ** 2 * ss
    if np.any(lhs > rhs + 1e-9):
        raise ValueError("eta0/eta1/eta2 do not dominate the Laplacian of the double well")

    rho_star = min(1.0, 2.0 / eps - e2)
    U1 = ScalarField(
        value=lambda x: rho_star * float(doublewell_value(x[None, :])[0]),
        gradient=lambda x: rho_star * doublewell_grad(x[None, :])[0],
        hessian=lambda x: rho_star * doublewell_hess(x),
        alpha=eps * e1,
        beta=eps * rho_star * e0 / 2.0,
        name="brownian_U1",
    )
    cu = rho_star * (1.0 - eps * (e2 + rho_star) / 2.0)
    lyap = LyapunovData(
        U1,
        lambda t, x: cu * float(doublewell_grad(x[None, :])[0] @ doublewell_grad(x[None, :])[0]),
        value_batch=lambda X: rho_star * doublewell_value(X),
        ubar_batch=lambda X: cu * np.sum(doublewell_grad(X) ** 2, axis=1),
    )

    box = params.get("scan_box", 3.0)
    scan = np.linspace(-box, box, 61)

    def c_constant(rho0, rho1, q0, q1, T):
        w = math.exp(-eps * e1 * T)
        best = -math.inf
        for i, u in enumerate(scan):
            for v in scan[i + 1:]:
                quot = -((u - v) * ((u**3 - u) - (v**3 - v))) / (u - v) ** 2
                pen0 = rho0 * ((u * u - 1) ** 2 + (v * v - 1) ** 2) / 4.0 / (2 * q0 * T) * w
                pen1 = (rho1 * (1 - eps * (e2 + rho1) / 2.0)
                        * ((u**3 - u) ** 2 + (v**3 - v) ** 2) / (2 * q1) * w)
                best = max(best, quot - pen0 - pen1)
        return best

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(brownian_dynamics)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        ux = float(doublewell_value(x[None, :])[0])
        uy = float(doublewell_value(y[None, :])[0])
        rho_hi = 2.0 / eps - e2
        best, best_c = math.inf, {}
        for rho0 in (0.0, min(1.0, rho_hi), min(2.0, rho_hi)):
            for rho1 in (0.0, min(0.5, rho_hi)):
                for split in (0.5, 0.25, 0.75):
                    q0 = 1.0 / (inv(r) * split)
                    q1 = 1.0 / (inv(r) * (1.0 - split))
                    c = c_constant(rho0, rho1, q0, q1, T)
                    expo = (c * T
                            + (rho0 / q0 + rho1 / q1) * eps * e0 * T / 2.0
                            + rho0 * (ux + uy) / (2 * q0)
                            + rho1 * (ux + uy) / (2 * q1))
                    val = dist * _exp(expo)
                    if val < best:
                        best, best_c = val, {"rho0": rho0, "rho1": rho1,
                                             "q0": q0, "q1": q1, "c": c,
                                             "scan_box": box}
        return _cert(best, "ModelSpecific(brownian_dynamics)", query, best_c)

    def feasibility(pp, query):
        if not math.isfinite(query.r):
            return False, "needs a finite L^r exponent"
        if int(pp["d"]) != 1:
            return False, "certificate grid scan is implemented for d = 1"
        return True, ""

    return ZooEntry("brownian_dynamics", params, model, (lyap,), None, bound_fn,
                    feasibility, default_box=((-2.0, 2.0),) * d)


# ----------------------------------------------------------------------
# SIR
# ----------------------------------------------------------------------

def _build_sir(params):
    al, be, ga, de = params["alpha"], params["beta"], params["gamma"], params["delta"]
    if min(al, be, ga, de) <= 0:
        raise ValueError("sir parameters must be positive")

    def drift(X):
        x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
        return np.stack([
            -al * x1 * x2 - de * x1 + de,
            al * x1 * x2 - (ga + de) * x2,
            ga * x2 - de * x3,
        ], axis=1)

    def diffusion(X):
        out = np.zeros((X.shape[0], 3, 1))
        out[:, 0, 0] = -be * X[:, 0] * X[:, 1]
        out[:, 1, 0] = be * X[:, 0] * X[:, 1]
        return out

    def drift_jac(x):
        return np.array([
            [-al * x[1] - de, -al * x[0], 0.0],
            [al * x[1], al * x[0] - (ga + de), 0.0],
            [0.0, ga, -de],
        ])

    def diffusion_jac(x):
        J = np.zeros((3, 1, 3))
        J[0, 0, 0] = -be * x[1]
        J[0, 0, 1] = -be * x[0]
        J[1, 0, 0] = be * x[1]
        J[1, 0, 1] = be * x[0]
        return J

    model = SdeModel(3, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("simplex_like"), "sir", drift_jac, diffusion_jac)

    rho_star = params.get("rho", 1.0)
    U_lin = ScalarField(
        value=lambda x: rho_star * (x[0] + x[1] - 1.0),
        gradient=lambda x: rho_star * np.array([1.0, 1.0, 0.0]),
        hessian=lambda x: np.zeros((3, 3)),
        alpha=-de,
        beta=0.0,
        name="sir_U_linear",
    )
    U_sq = ScalarField(
        value=lambda x: rho_star * (x[0] + x[1] - 1.0) ** 2,
        gradient=lambda x: 2 * rho_star * (x[0] + x[1] - 1.0) * np.array([1.0, 1.0, 0.0]),
        hessian=lambda x: 2 * rho_star * np.array(
            [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]),
        alpha=-2.0 * de,
        beta=rho_star * ga / 2.0,
        name="sir_U_squared",
    )
    lyap = (
        LyapunovData(U_lin, None,
                     value_batch=lambda X: rho_star * (X[:, 0] + X[:, 1] - 1.0)),
        LyapunovData(U_sq, None,
                     value_batch=lambda X: rho_star * (X[:, 0] + X[:, 1] - 1.0) ** 2),
    )

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(sir)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        sx, sy = x[0] + x[1], y[0] + y[1]
        best, best_c = math.inf, {}
        for theta in np.linspace(2.0, r - 1e-6, 8):
            pre = (1.0 - theta / r) ** (-1.0 / theta)
            expo = (be**2 * T * (r - theta) + ga * T
                    + 0.75 * al * T * (2 * de * T + sx + sy)
                    + be**2 * T * (r - 1.0) / 2.0
                    * (ga * T + (sx - 1.0) ** 2 + (sy - 1.0) ** 2))
            val = pre * dist * _exp(expo)
            if val < best:
                best, best_c = val, {"theta": float(theta)}
        return _cert(best, "ModelSpecific(sir)", query, best_c)

    def feasibility(pp, query):
        if not (2.0 < query.r < INF):
            return False, "needs r in (2, inf)"
        if np.any(query.x < 0) or np.any(query.y < 0):
            return False, "initial points must lie in the nonnegative orthant"
        return True, ""

    return ZooEntry("sir", params, model, lyap, None, bound_fn, feasibility,
                    default_box=((0.0, 1.5),) * 3)


# ----------------------------------------------------------------------
# experimental psychology model
# ----------------------------------------------------------------------

def _build_psychology(params):
    al, de, be = params["alpha"], params["delta"], params["beta"]
    if not (al > 0 and de > 0):
        raise ValueError("psychology needs alpha > 0 and delta > 0")

    def drift(X):
        x1, x2 = X[:, 0], X[:, 1]
        w = de + 4.0 * al * x1
        return np.stack([x2**2 * w - be**2 * x1 / 2.0,
                         -x1 * x2 * w - be**2 * x2 / 2.0], axis=1)

    def diffusion(X):
        out = np.empty((X.shape[0], 2, 1))
        out[:, 0, 0] = -be * X[:, 1]
        out[:, 1, 0] = be * X[:, 0]
        return out

    def drift_jac(x):
        x1, x2 = x
        return np.array([
            [4 * al * x2**2 - be**2 / 2.0, 2 * x2 * (de + 4 * al * x1)],
            [-x2 * (de + 8 * al * x1), -x1 * (de + 4 * al * x1) - be**2 / 2.0],
        ])

    def diffusion_jac(x):
        J = np.zeros((2, 1, 2))
        J[0, 0, 1] = -be
        J[1, 0, 0] = be
        return J

    model = SdeModel(2, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "psychology", drift_jac, diffusion_jac)

    U = quadratic_field(1.0, 2, alpha=0.0, beta=0.0, name="psychology_U")
    lyap = LyapunovData(U, None, value_batch=lambda X: np.sum(X * X, axis=1))

    def bound_fn(query: BoundQuery):
        T = query.horizon
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        n2 = float(x @ x) + float(y @ y)
        best, best_c = math.inf, {}
        for eps in np.geomspace(1e-3, 10.0, 40):
            expo = (de**2 * T / (32.0 * eps)
                    + de**2 * T / (4.0 * (2 * al + eps))
                    + (2 * al + eps) * T * n2)
            val = dist * _exp(expo)
            if val < best:
                best, best_c = val, {"eps": float(eps)}
        return _cert(best, "ModelSpecific(psychology)", query, best_c)

    def feasibility(pp, query):
        return True, ""  # holds for every r in (0, inf]

    return ZooEntry("psychology", params, model, (lyap,), None, bound_fn,
                    feasibility, default_box=((-1.5, 1.5),) * 2)


# ----------------------------------------------------------------------
# Brusselator
# ----------------------------------------------------------------------

def _build_brusselator(params):
    al, de, amp = params["alpha"], params["delta"], params["sigma_amp"]
    if not (al > 0 and de > 0):
        raise ValueError("brusselator needs alpha > 0 and delta > 0")
    lip_sigma = math.sqrt(2.0) * amp  # sup |grad s| = amp for the bump below

    def bump(X):
        return amp * (1.0 - np.exp(-X[:, 0])) * (1.0 - np.exp(-X[:, 1]))

    def drift(X):
        x1, x2 = X[:, 0], X[:, 1]
        return np.stack([de - (al + 1.0) * x1 + x2 * x1**2,
                         al * x1 - x2 * x1**2], axis=1)

    def diffusion(X):
        s = bump(X)
        out = np.empty((X.shape[0], 2, 1))
        out[:, 0, 0] = s
        out[:, 1, 0] = -s
        return out

    def drift_jac(x):
        x1, x2 = x
        return np.array([
            [-(al + 1.0) + 2 * x1 * x2, x1**2],
            [al - 2 * x1 * x2, -(x1**2)],
        ])

    def diffusion_jac(x):
        ds1 = amp * math.exp(-x[0]) * (1.0 - math.exp(-x[1]))
        ds2 = amp * (1.0 - math.exp(-x[0])) * math.exp(-x[1])
        J = np.zeros((2, 1, 2))
        J[0, 0, 0], J[0, 0, 1] = ds1, ds2
        J[1, 0, 0], J[1, 0, 1] = -ds1, -ds2
        return J

    model = SdeModel(2, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("simplex_like"), "brusselator",
                     drift_jac, diffusion_jac)

    # sum-coordinate noise cancels: eta = sup |sigma(y)^T (1,1)| = 0
    eta = 0.0
    eps_c = 1.0
    U = ScalarField(
        value=lambda x: (x[0] + x[1]) ** 2,
        gradient=lambda x: 2.0 * (x[0] + x[1]) * np.array([1.0, 1.0]),
        hessian=lambda x: 2.0 * np.ones((2, 2)),
        alpha=2.0 * (eta**2 + eps_c),
        beta=eta**2 + de**2 / (2.0 * eps_c),
        name="brusselator_U",
    )
    lyap = LyapunovData(U, None,
                        value_batch=lambda X: (X[:, 0] + X[:, 1]) ** 2)

    def bound_fn(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(brusselator)")
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        dist = float(np.linalg.norm(x - y))
        best, best_c = math.inf, {}
        for pf in (2.0 * r, 3.0 * r, 6.0 * r):
            qf = 1.0 / (inv(r) - inv(pf))
            if not (pf > 2 and qf > 2):
                continue
            for rho in (5.0, 10.0, 20.0, 50.0):
                for eps in (0.02, 0.05, 0.1, 0.3):
                    if _exp(2.0 * rho * T * (eta**2 + eps)) > rho / (2.0 * qf * T):
                        continue
                    expo = ((pf - 1.0) * T * lip_sigma**2 / 2.0
                            + (de**2 * T / eps + 1.0
                               + rho * (x[0] + x[1]) ** 2
                               + rho * (y[0] + y[1]) ** 2) / (2.0 * qf))
                    val = dist / math.sqrt(1.0 - 2.0 / pf) * _exp(expo)
                    if val < best:
                        best, best_c = val, {"p": pf, "q": qf, "rho": rho,
                                             "eps": eps, "eta": eta}
        if not math.isfinite(best):
            return NoCertificate(
                "no (p, q, rho, eps) in the search grid satisfies "
                "exp(2 rho T (eta^2 + eps)) <= rho / (2 q T)",
                "ModelSpecific(brusselator)")
        return _cert(best, "ModelSpecific(brusselator)", query, best_c)

    def feasibility(pp, query):
        if not (2.0 < query.r < INF):
            return False, "needs r in (2, inf)"
        if np.any(query.x < 0) or np.any(query.y < 0):
            return False, "initial points must lie in the nonnegative orthant"
        return True, ""

    return ZooEntry(
        "brusselator", params, model, (lyap,), None, bound_fn, feasibility,
        default_box=((0.0, 2.0),) * 2,
        notes=("noise vanishes on the boundary axes and has eta = "
               "sup |sigma^T (1,1)| = 0; the general admissible class is any "
               "globally Lipschitz sigma with those two properties"),
    )


# ----------------------------------------------------------------------
# volatility family (CIR, Ait-Sahalia, 3/2-model, CEV)
# ----------------------------------------------------------------------

def _vol_sup_integrand(params):
    a, b, c = params["a"], params["b"], params["c"]
    ka, de, ga, al, be = (params["kappa"], params["delta"], params["gamma"],
                          params["alpha"], params["beta"])

    def f(u: float) -> float:
        val = (1.0 - b) * ga
        val -= de * b / u
        val -= al * (a - b) * u ** (a - 1.0)
        val -= ka * (b + c) / u ** (c + 1.0)
        val += b * (1.0 - b) * be**2 * u ** (2.0 * b - 2.0) / 2.0
        return val

    return f


def volatility_exponent_sup(params, lo=1e-6, hi=1e6) -> float:
    """Grid certificate for the transformed-distance exponent sup (the
    integrand of the local-Lipschitz estimate), over a stated log box."""
    return grid_sup(_vol_sup_integrand(params), lo, hi, log=True)


def volatility_global_threshold(params) -> float:
    """Largest p with a finite global-Lipschitz certificate (inf if all p)."""
    a, b, al, be = params["a"], params["b"], params["alpha"], params["beta"]
    if 1.0 <= b < (a + 1.0) / 2.0 and al > 0:
        return INF
    if b == (a + 1.0) / 2.0 and al > 0:
        return 1.0 + 8.0 * al * a / (be**2 * (a + 1.0) ** 2)
    return 1.0


def _build_volatility(params):
    a, b, c = params["a"], params["b"], params["c"]
    ka, de, ga, al, be = (params["kappa"], params["delta"], params["gamma"],
                          params["alpha"], params["beta"])
    if not (a > 1 and b >= 0.5 and be > 0 and c >= 0 and ka >= 0 and al >= 0):
        raise ValueError("volatility parameter constraints violated")

    def mu_scalar(u):
        out = de + ga * u - al * u**a
        if ka > 0:
            out = out + ka * u ** (-c)
        return out

    def drift(X):
        return mu_scalar(X[:, 0])[:, None]

    def diffusion(X):
        return (be * X[:, 0] ** b)[:, None, None]

    def drift_jac(x):
        u = x[0]
        d = ga - al * a * u ** (a - 1.0)
        if ka > 0:
            d -= ka * c * u ** (-c - 1.0)
        return np.array([[d]])

    def diffusion_jac(x):
        return np.array([[[be * b * x[0] ** (b - 1.0)]]])

    transform = None
    if b != 1.0:
        ex = 1.0 / (1.0 - b)

        def drift_z(Z):
            U = Z**ex
            return (1.0 - b) * (Z ** (-b * ex) * mu_scalar(U) - (b / 2.0) * be**2 / Z)

        transform = Transform(
            to_z=lambda u: u ** (1.0 - b),
            from_z=lambda z: z**ex,
            drift_z=drift_z,
            diffusion_z=(1.0 - b) * be,
            z_lo=1e-8,
        )

    model = SdeModel(1, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("positive_orthant"), "volatility",
                     drift_jac, diffusion_jac, transform)

    lyap = ()
    if ka == 0.0:
        # log-Lyapunov: U = ln(1 + u), valid since mu(u)/(1+u) <= delta + max(gamma, 0)
        U = ScalarField(
            value=lambda x: math.log1p(x[0]),
            gradient=lambda x: np.array([1.0 / (1.0 + x[0])]),
            hessian=lambda x: np.array([[-1.0 / (1.0 + x[0]) ** 2]]),
            alpha=0.0,
            beta=de + max(ga, 0.0),
            name="volatility_logU",
        )
        lyap = (LyapunovData(U, None, value_batch=lambda X: np.log1p(X[:, 0])),)

    phi = PhiMap.power(1.0 - b) if b != 1.0 else PhiMap.identity(1)
    distance = pair_field_from_phi(phi, 2.0, 1, name="volatility_V")

    def transformed_metric(X, Y):
        return np.abs(X[:, 0] ** (1.0 - b) - Y[:, 0] ** (1.0 - b))

    def bound_fn(query: BoundQuery):
        # transformed-distance marginal sup-norm estimate
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(volatility)")
        S = volatility_exponent_sup(params)
        t = query.horizon
        x, y = float(query.x[0]), float(query.y[0])
        v0 = abs(x ** (1.0 - b) - y ** (1.0 - b))
        return _cert(v0 * _exp(t * S), "ModelSpecific(volatility)", query,
                     {"exponent_sup": S, "scan_box": (1e-6, 1e6),
                      "quantity": "|X^{1-b} - Y^{1-b}| at t, L^inf"})

    def bound_fn_sup(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(volatility)")
        S = max(0.0, volatility_exponent_sup(params))
        x, y = float(query.x[0]), float(query.y[0])
        v0 = abs(x ** (1.0 - b) - y ** (1.0 - b))
        return _cert(v0 * _exp(query.horizon * S), "ModelSpecific(volatility)",
                     query, {"exponent_sup": S, "scan_box": (1e-6, 1e6),
                             "quantity": "sup_t |X^{1-b} - Y^{1-b}|, L^inf"})

    def global_lipschitz(query: BoundQuery):
        p = query.r
        pmax = volatility_global_threshold(params)
        if p > pmax:
            return NoCertificate(
                f"global certificate is finite only for p <= {pmax}",
                "ModelSpecific(volatility-global)")
        us = np.geomspace(1e-4, 1e4, 220)

        def pair_expr(u, v):
            out = -al * (u**a - v**a) / (u - v)
            if ka > 0:
                out += ka * (u ** (-c) - v ** (-c)) / (u - v)
            out += be**2 * (p - 1.0) / 2.0 * ((u**b - v**b) / (u - v)) ** 2
            return out

        best = -math.inf
        for i in range(len(us)):
            for j in range(i + 1, len(us)):
                best = max(best, pair_expr(us[i], us[j]))
        if ka == 0.0 and b >= 1.0:
            best = max(best, 0.0)  # the sup is approached as u, v -> 0
        x, y = float(query.x[0]), float(query.y[0])
        val = abs(x - y) * _exp(query.horizon * (ga + best))
        return _cert(val, "ModelSpecific(volatility-global)", query,
                     {"p": p, "p_max": pmax, "pair_sup": best,
                      "scan_box": (1e-4, 1e4)})

    def moment_sup_ratio(p: float, eta_c: float = 1.0) -> float:
        def ratio_fn(u):
            num = p * (ka * u ** (p - 1.0 - c) + de * u ** (p - 1.0)
                       + ga * u**p - al * u ** (p + a - 1.0)
                       + 0.5 * (p - 1.0) * be**2 * u ** (p + 2.0 * b - 2.0))
            return num / (eta_c + u**p)

        return grid_sup(ratio_fn, 1e-6, 1e6, log=True)

    def feasibility(pp, query):
        acc = feller_boundary("volatility", pp)
        if not acc["zero_inaccessible"]:
            return False, "boundary 0 is accessible: " + acc["reason"]
        return True, ""

    return ZooEntry(
        "volatility", params, model, lyap, distance, bound_fn, feasibility,
        extra_bounds={"transformed_sup": bound_fn_sup,
                      "global_lipschitz": global_lipschitz,
                      "moment_sup_ratio": moment_sup_ratio},
        metrics={"transformed": transformed_metric, "euclid": _euclid_metric},
        default_box=((0.05, 4.0),),
    )


# ----------------------------------------------------------------------
# Wright-Fisher
# ----------------------------------------------------------------------

def _build_wright_fisher(params):
    s, r0, r1, be = params["s"], params["rho0"], params["rho1"], params["beta"]
    if be <= 0 or r0 < 0 or r1 < 0:
        raise ValueError("wright_fisher needs beta > 0 and nonnegative mutation rates")

    def drift(X):
        u = X[:, 0]
        return (r0 * (1.0 - u) - r1 * u + s * u * (1.0 - u))[:, None]

    def diffusion(X):
        u = X[:, 0]
        return np.sqrt(be * u * (1.0 - u))[:, None, None]

    def drift_jac(x):
        return np.array([[-r0 - r1 + s * (1.0 - 2.0 * x[0])]])

    def diffusion_jac(x):
        u = x[0]
        return np.array([[[math.sqrt(be) * (1.0 - 2.0 * u) / (2.0 * math.sqrt(u * (1.0 - u)))]]])

    def f_z(Z):
        return ((r0 - be / 4.0) / np.tan(Z)
                - (r1 - be / 4.0) * np.tan(Z)
                + s / 2.0 * np.sin(2.0 * Z))

    eps_z = 1e-6
    transform = Transform(
        to_z=lambda u: np.arcsin(np.sqrt(u)),
        from_z=lambda z: np.sin(z) ** 2,
        drift_z=f_z,
        diffusion_z=math.sqrt(be) / 2.0,
        z_lo=eps_z,
        z_hi=math.pi / 2.0 - eps_z,
    )
    model = SdeModel(1, 1, _leading(drift), _leading(diffusion),
                     DomainSpec("unit_interval_interior"), "wright_fisher",
                     drift_jac, diffusion_jac, transform)

    U = ScalarField(
        value=lambda x: float(x[0]),
        gradient=lambda x: np.array([1.0]),
        hessian=lambda x: np.zeros((1, 1)),
        alpha=0.0,
        beta=r0 + abs(s) / 4.0 + be / 8.0,
        name="wf_U",
    )
    lyap = (LyapunovData(U, None, value_batch=lambda X: X[:, 0]),)
    distance = pair_field_from_phi(PhiMap.arcsin_sqrt(), 2.0, 1, name="wf_V")

    def transformed_metric(X, Y):
        return np.abs(np.arcsin(np.sqrt(X[:, 0])) - np.arcsin(np.sqrt(Y[:, 0])))

    def bound_fn(query: BoundQuery):
        # sup-in-time L^inf estimate for the arcsin-sqrt distance
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(wright_fisher)")
        x, y = float(query.x[0]), float(query.y[0])
        v0 = abs(math.asin(math.sqrt(x)) - math.asin(math.sqrt(y)))
        return _cert(v0 * _exp(query.horizon * abs(s) / 2.0),
                     "ModelSpecific(wright_fisher)", query,
                     {"quantity": "sup_t |arcsin sqrt X - arcsin sqrt Y|, L^inf"})

    def final_sup(query: BoundQuery):
        ok, why = feasibility(params, query)
        if not ok:
            return NoCertificate(why, "ModelSpecific(wright_fisher)")
        x, y = float(query.x[0]), float(query.y[0])
        pre = max(1.0 / math.sqrt(4.0 * z * (1.0 - z)) for z in (x, y))
        return _cert(abs(x - y) * pre * _exp(query.horizon * abs(s) / 2.0),
                     "ModelSpecific(wright_fisher)", query,
                     {"prefactor": pre,
                      "quantity": "sup_t |X - Y|, L^inf"})

    def feasibility(pp, query):
        if pp["rho0"] < pp["beta"] / 2.0 or pp["rho1"] < pp["beta"] / 2.0:
            return False, "needs rho0, rho1 >= beta / 2"
        return True, ""

    return ZooEntry(
        "wright_fisher", params, model, lyap, distance, bound_fn, feasibility,
        extra_bounds={"final_sup": final_sup},
        metrics={"transformed": transformed_metric, "euclid": _euclid_metric},
        default_box=((0.02, 0.98),),
    )


# ----------------------------------------------------------------------
# rotation counterexample (additive-noise RODE blow-up drift)
# ----------------------------------------------------------------------

def _build_rotation(params):
    R = np.array([[0.0, 1.0], [-1.0, 0.0]])

    def drift(X):
        n2 = np.sum(X * X, axis=1, keepdims=True)
        return n2 * (X @ R.T)

    def diffusion(X):
        return np.broadcast_to(np.eye(2), (X.shape[0], 2, 2)).copy()

    def drift_jac(x):
        return 2.0 * np.outer(R @ x, x) + float(x @ x) * R

    model = SdeModel(2, 2, _leading(drift), _leading(diffusion),
                     DomainSpec("all_space"), "rotation_counterexample",
                     drift_jac, lambda x: np.zeros((2, 2, 2)))
    rho = params.get("rho", 1.0)
    U = ScalarField(
        value=lambda x: 1.0 + rho * float(x @ x),
        gradient=lambda x: 2.0 * rho * np.asarray(x, dtype=float),
        hessian=lambda x: 2.0 * rho * np.eye(2),
        alpha=2.0 * rho,
        beta=0.0,
        name="rotation_U",
    )
    lyap = (LyapunovData(U, None,
                         value_batch=lambda X: 1.0 + rho * np.sum(X * X, axis=1)),)

    def bound_fn(query: BoundQuery):
        T, r = query.horizon, query.r
        x, y = query.x, query.y
        best, best_c = math.inf, {}
        for rr in RHO_GRID:
            if not r < rr * math.exp(-2.0 * rr * T) / (2.0 * T):
                continue
            expo = (2.0 + rr * float(x @ x) + rr * float(y @ y)) / (2.0 * r)
            val = float(np.linalg.norm(x - y)) * _exp(expo)
            if val < best:
                best, best_c = val, {"rho": rr}
        if not math.isfinite(best):
            return NoCertificate(
                f"needs r < rho e^(-2 rho T) / (2T) for some rho; none in grid at T={T}",
                "ModelSpecific(rotation)")
        return _cert(best, "ModelSpecific(rotation)", query, best_c)

    def feasibility(pp, query):
        return True, ""

    return ZooEntry("rotation_counterexample", params, model, lyap, None,
                    bound_fn, feasibility, default_box=((-2.0, 2.0),) * 2)


# ----------------------------------------------------------------------
# registry
# ----------------------------------------------------------------------

DEFAULT_PARAMS = {
    "van_der_pol": {"alpha": 1.0, "gamma": 0.5, "delta": 1.0, "eta0": 0.25,
                    "eta1": 0.0, "noise": "additive"},
    "duffing_vdp": {"alpha1": 1.0, "alpha2": 0.5, "alpha3": 1.0, "eta0": 0.25,
                    "eta1": 0.0, "noise": "additive"},
    "lorenz": {"alpha1": 1.0, "alpha2": 1.0, "alpha3": 1.0, "beta": 0.2},
    "langevin": {"gamma": 1.0, "eps": 0.5, "m": 1},
    "brownian_dynamics": {"eps": 0.5, "d": 1, "eta0": 6.5, "eta1": 1.0,
                          "eta2": 0.0},
    "sir": {"alpha": 0.5, "beta": 0.3, "gamma": 0.5, "delta": 0.5},
    "psychology": {"alpha": 1.0, "delta": 1.0, "beta": 0.5},
    "brusselator": {"alpha": 1.0, "delta": 0.5, "sigma_amp": 0.1},
    "volatility": {"a": 2.0, "b": 0.5, "c": 1.0, "kappa": 0.0, "delta": 0.3,
                   "gamma": -1.0, "alpha": 0.0, "beta": 0.5},
    "wright_fisher": {"s": 1.0, "rho0": 0.3, "rho1": 0.3, "beta": 0.4},
    "rotation_counterexample": {"rho": 1.0},
}

_BUILDERS = {
    "van_der_pol": _build_van_der_pol,
    "duffing_vdp": _build_duffing,
    "lorenz": _build_lorenz,
    "langevin": _build_langevin,
    "brownian_dynamics": _build_brownian_dynamics,
    "sir": _build_sir,
    "psychology": _build_psychology,
    "brusselator": _build_brusselator,
    "volatility": _build_volatility,
    "wright_fisher": _build_wright_fisher,
    "rotation_counterexample": _build_rotation,
}


def build_model(name: str, params: Optional[dict] = None) -> ZooEntry:
    """Fully wired zoo entry for ``name``; missing params take defaults,
    infeasible params are rejected with the violated condition named."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown model {name!r}; known: {ZOO_NAMES}")
    merged = dict(DEFAULT_PARAMS[name])
    merged.update(params or {})
    return _BUILDERS[name](merged)


def certificate(entry: ZooEntry, query: BoundQuery, which: Optional[str] = None):
    """Evaluate the entry's closed-form bound (or a named extra bound);
    infeasible queries yield a NoCertificate, never a number."""
    ok, why = entry.feasibility(entry.params, query)
    if not ok:
        return NoCertificate(why, f"ModelSpecific({entry.name})")
    fn = entry.bound_fn if which is None else entry.extra_bounds[which]
    return fn(query)


def feller_boundary(name: str, params: dict) -> dict:
    """Boundary accessibility for the two scalar families on (0, inf)/(0, 1)."""
    if name == "volatility":
        b, ka, de, be = params["b"], params["kappa"], params["delta"], params["beta"]
        inacc = (
            ka > 0
            or (b == 0.5 and 2.0 * de >= be**2)
            or (b > 0.5 and de > 0)
            or (b >= 1.0 and de >= 0)
        )
        reason = ("kappa > 0" if ka > 0 else
                  f"b={b}, delta={de}, beta^2={be**2}")
        return {"zero_inaccessible": bool(inacc), "reason": reason}
    if name == "wright_fisher":
        r0, r1, be = params["rho0"], params["rho1"], params["beta"]
        return {
            "zero_inaccessible": bool(2.0 * r0 >= be),
            "one_inaccessible": bool(2.0 * r1 >= be),
            "reason": f"2 rho0={2*r0}, 2 rho1={2*r1} vs beta={be}",
        }
    raise ValueError("feller_boundary supports 'volatility' and 'wright_fisher'")


def make_counterexample(p: float) -> SdeModel:
    """The C^1 drift/diffusion pair for which the derivative-form
    monotonicity sup (= 0) is strictly below the difference form (= 1 at the
    pair (-1, 3)) when p < 1."""
    if not (0.0 < p < 1.0):
        raise ValueError("the counterexample needs p in (0, 1)")
    amp = math.sqrt(6.0 / (1.0 - p))

    def mu_rows(X):
        u = X[:, 0]
        out = np.where(u < -1.0, 0.0,
                       np.where(u > 1.0, 4.0, -u**3 + 3.0 * u + 2.0))
        return out[:, None]

    def g_rows(u):
        out = np.zeros_like(u)
        mid = (u >= -1.0) & (u <= 1.0)
        out[mid] = amp * np.sqrt(np.maximum(0.0, 1.0 - u[mid] ** 2))
        right = (u > 1.0) & (u <= 3.0)
        out[right] = -amp * np.sqrt(np.maximum(0.0, 1.0 - (u[right] - 2.0) ** 2))
        return out

    def sigma_scalar(u: float) -> float:
        # integral of g from -inf to u (semicircle areas)
        def semicircle_area(t):  # int_{-1}^{t} sqrt(1 - s^2) ds for t in [-1, 1]
            t = min(max(t, -1.0), 1.0)
            return 0.5 * (t * math.sqrt(1.0 - t * t) + math.asin(t)) + math.pi / 4.0

        if u <= -1.0:
            return 0.0
        if u <= 1.0:
            return amp * semicircle_area(u)
        if u <= 3.0:
            return amp * (semicircle_area(1.0) - semicircle_area(u - 2.0) + semicircle_area(-1.0))
        return 0.0

    def sig_rows(X):
        return np.array([[ [sigma_scalar(float(u))] ] for u in X[:, 0]])

    def mu_jac(x):
        u = x[0]
        return np.array([[0.0 if abs(u) > 1.0 else -3.0 * (u * u - 1.0)]])

    def sig_jac(x):
        return np.array([[[float(g_rows(np.array([x[0]]))[0])]]])

    return SdeModel(1, 1, _leading(mu_rows), _leading(sig_rows),
                    DomainSpec("all_space"), "monotonicity_counterexample",
                    mu_jac, sig_jac)


def default_grid(entry: ZooEntry, per_dim: int = 7) -> list:
    """Deterministic grid over the entry's default box (cartesian product)."""
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in entry.default_box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    keep = entry.model.domain.contains_batch(pts)
    return [pts[i] for i in range(pts.shape[0]) if keep[i]]

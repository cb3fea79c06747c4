"""Generator, noise operator, their two-point extensions, and the
closed-form ratios for distances of the form ||Phi(x) - Phi(y)||^p.

Conventions: 0/0 = 0 throughout; a denominator counts as zero when its
magnitude is below 1e-300.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import PairField, ScalarField, SdeModel

ZERO_DENOM = 1e-300


class OperatorEvaluationError(ArithmeticError):
    """A non-finite value appeared; ``term`` names the offending piece."""

    def __init__(self, term: str, point):
        self.term = term
        self.point = point
        super().__init__(f"non-finite {term} at {point}")


@dataclass(frozen=True)
class OperatorValues:
    gen: Optional[float] = None
    noise_row: Optional[np.ndarray] = None
    extgen: Optional[float] = None
    extnoise_row: Optional[np.ndarray] = None
    ratio_gen: Optional[float] = None
    ratio_noise_sq: Optional[float] = None


def _finite(val, term, point):
    arr = np.asarray(val, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise OperatorEvaluationError(term, point)
    return arr


def ratio(numer: float, denom: float) -> float:
    """numer / denom with the 0/0 = 0 convention."""
    if abs(denom) < ZERO_DENOM:
        return 0.0 if abs(numer) < ZERO_DENOM else np.sign(numer) * np.inf
    return numer / denom


def apply_operators(model: SdeModel, fld: ScalarField, x) -> OperatorValues:
    """Generator and noise operator of U at x:

        gen       = grad U . mu + tr(sigma sigma^T Hess U) / 2
        noise_row = (grad U)^T sigma          (a 1 x m row)
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = _finite(model.drift(x), "drift", x)
    sig = _finite(model.diffusion(x), "diffusion", x)
    g = _finite(fld.gradient(x), "gradient", x)
    H = _finite(fld.hessian(x), "hessian", x)
    gen = float(g @ mu + 0.5 * np.einsum("ik,jk,ij->", sig, sig, H))
    noise_row = g @ sig
    _finite(gen, "generator value", x)
    return OperatorValues(gen=gen, noise_row=noise_row)


def apply_extended(model: SdeModel, V: PairField, x, y) -> OperatorValues:
    """Extended generator / noise operator of V at (x, y), plus ratios.

    extgen sums the drift terms in each slot and the three second-order
    noise contractions (xx, xy, yy); extnoise_row = Vx sigma(x) + Vy sigma(y).
    Ratios use the 0/0 = 0 convention at the level of V.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mux = _finite(model.drift(x), "drift(x)", x)
    muy = _finite(model.drift(y), "drift(y)", y)
    sx = _finite(model.diffusion(x), "diffusion(x)", x)
    sy = _finite(model.diffusion(y), "diffusion(y)", y)
    vx = _finite(V.dx(x, y), "dV/dx", (x, y))
    vy = _finite(V.dy(x, y), "dV/dy", (x, y))
    vxx = _finite(V.dxx(x, y), "d2V/dx2", (x, y))
    vxy = _finite(V.dxy(x, y), "d2V/dxdy", (x, y))
    vyy = _finite(V.dyy(x, y), "d2V/dy2", (x, y))

    extgen = float(vx @ mux + vy @ muy)
    extgen += 0.5 * float(np.einsum("ik,jk,ij->", sx, sx, vxx))
    extgen += float(np.einsum("ik,jk,ij->", sx, sy, vxy))
    extgen += 0.5 * float(np.einsum("ik,jk,ij->", sy, sy, vyy))
    extnoise = vx @ sx + vy @ sy
    _finite(extgen, "extended generator value", (x, y))

    v = float(V.value(x, y))
    rg = ratio(extgen, v)
    rn = ratio(float(extnoise @ extnoise), v * v)
    return OperatorValues(
        extgen=extgen, extnoise_row=extnoise, ratio_gen=rg, ratio_noise_sq=rn
    )


@dataclass(frozen=True)
class PhiMap:
    """A C^2 map Phi: O -> R^k with Jacobian (k, d) and Hessian (k, d, d)."""

    value: Callable
    jac: Callable
    hess: Callable
    k: int

    @staticmethod
    def identity(d: int) -> "PhiMap":
        eye = np.eye(d)
        zero = np.zeros((d, d, d))
        return PhiMap(
            value=lambda x: np.asarray(x, dtype=float),
            jac=lambda x: eye,
            hess=lambda x: zero,
            k=d,
        )

    @staticmethod
    def power(q: float) -> "PhiMap":
        """Phi(x) = x^q on (0, inf), one-dimensional."""

        def u_of(x):
            arr = np.asarray(x, dtype=float).reshape(-1)
            if arr.size != 1:
                raise ValueError("scalar map expects a single point")
            return arr[0]

        return PhiMap(
            value=lambda x: np.array([u_of(x) ** q]),
            jac=lambda x: np.array([[q * u_of(x) ** (q - 1.0)]]),
            hess=lambda x: np.array([[[q * (q - 1.0) * u_of(x) ** (q - 2.0)]]]),
            k=1,
        )

    @staticmethod
    def arcsin_sqrt() -> "PhiMap":
        """Phi(x) = arcsin(sqrt(x)) on (0, 1), one-dimensional."""

        def u_of(x):
            arr = np.asarray(x, dtype=float).reshape(-1)
            if arr.size != 1:
                raise ValueError("scalar map expects a single point")
            return arr[0]

        def val(x):
            return np.array([np.arcsin(np.sqrt(u_of(x)))])

        def jac(x):
            u = u_of(x)
            return np.array([[0.5 / np.sqrt(u * (1.0 - u))]])

        def hess(x):
            u = u_of(x)
            return np.array([[[(2.0 * u - 1.0) / (4.0 * (u * (1.0 - u)) ** 1.5)]]])

        return PhiMap(value=val, jac=jac, hess=hess, k=1)


def power_norm_ratios(model: SdeModel, phi: PhiMap, p: float, x, y):
    """Closed-form (ratio_gen, ratio_noise_sq) for V = ||Phi(x) - Phi(y)||^p.

    Requires p >= 2 and Phi(x) != Phi(y); the caller handles coincident
    images through the 0/0 convention at the V level.
    """
    if p < 2:
        raise ValueError("power_norm_ratios needs p >= 2")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    D = np.asarray(phi.value(x), dtype=float) - np.asarray(phi.value(y), dtype=float)
    nD2 = float(D @ D)
    if nD2 < ZERO_DENOM:
        raise ValueError("Phi(x) = Phi(y): ratio undefined")
    Jx, Jy = np.asarray(phi.jac(x), float), np.asarray(phi.jac(y), float)
    Hx, Hy = np.asarray(phi.hess(x), float), np.asarray(phi.hess(y), float)
    mux, muy = np.asarray(model.drift(x), float), np.asarray(model.drift(y), float)
    sx, sy = np.asarray(model.diffusion(x), float), np.asarray(model.diffusion(y), float)

    # columns sigma_i mapped through the Jacobians: (k, m)
    JSx, JSy = Jx @ sx, Jy @ sy
    diff_cols = JSx - JSy
    # noise ratio: p^2 sum_i <D, J sigma_i(x) - J sigma_i(y)>^2 / ||D||^4
    proj = D @ diff_cols
    ratio_noise_sq = p * p * float(proj @ proj) / nD2**2

    drift_term = p * float(D @ (Jx @ mux - Jy @ muy)) / nD2
    # sum_i <D, Phi''(x)(sigma_i, sigma_i) - Phi''(y)(sigma_i, sigma_i)>
    hess_x = np.einsum("abc,bi,ci->a", Hx, sx, sx)
    hess_y = np.einsum("abc,bi,ci->a", Hy, sy, sy)
    hess_term = p * float(D @ (hess_x - hess_y)) / (2.0 * nD2)
    hs_term = p * float(np.sum(diff_cols * diff_cols)) / (2.0 * nD2)
    correction = (p - 2.0) / (2.0 * p) * ratio_noise_sq
    ratio_gen = drift_term + hess_term + hs_term + correction
    return ratio_gen, ratio_noise_sq


def pair_field_from_phi(phi: PhiMap, p: float, d: int, name: str = "") -> PairField:
    """Build the PairField V(x, y) = ||Phi(x) - Phi(y)||^p (p >= 2) with
    analytic partials, for use with apply_extended and path statistics."""
    if p < 2:
        raise ValueError("p >= 2 required")

    def parts(x, y):
        D = np.asarray(phi.value(x), float) - np.asarray(phi.value(y), float)
        return D, float(D @ D)

    def value(x, y):
        _, n2 = parts(x, y)
        return n2 ** (p / 2.0)

    def dx(x, y):
        D, n2 = parts(x, y)
        if n2 == 0.0:
            return np.zeros(d)
        return p * n2 ** (p / 2.0 - 1.0) * (np.asarray(phi.jac(x), float).T @ D)

    def dy(x, y):
        D, n2 = parts(x, y)
        if n2 == 0.0:
            return np.zeros(d)
        return -p * n2 ** (p / 2.0 - 1.0) * (np.asarray(phi.jac(y), float).T @ D)

    def _second(x, y, slot):
        # generic second partials via the chain rule on F(D) = ||D||^p
        D, n2 = parts(x, y)
        if n2 == 0.0:
            return np.zeros((d, d))
        Jx = np.asarray(phi.jac(x), float)
        Jy = np.asarray(phi.jac(y), float)
        n_pm2 = n2 ** (p / 2.0 - 1.0)
        n_pm4 = n2 ** (p / 2.0 - 2.0)
        if slot == "xx":
            A = Jx.T @ Jx * n_pm2 * p
            b = Jx.T @ D
            A += p * (p - 2.0) * n_pm4 * np.outer(b, b)
            Hx = np.asarray(phi.hess(x), float)
            A += p * n_pm2 * np.einsum("a,abc->bc", D, Hx)
            return A
        if slot == "yy":
            A = Jy.T @ Jy * n_pm2 * p
            b = Jy.T @ D
            A += p * (p - 2.0) * n_pm4 * np.outer(b, b)
            Hy = np.asarray(phi.hess(y), float)
            A -= p * n_pm2 * np.einsum("a,abc->bc", D, Hy)
            return A
        # mixed block d^2 V / dx_j dy_k
        A = -p * n_pm2 * (Jx.T @ Jy)
        A -= p * (p - 2.0) * n_pm4 * np.outer(Jx.T @ D, Jy.T @ D)
        return A

    return PairField(
        value=value,
        dx=dx,
        dy=dy,
        dxx=lambda x, y: _second(x, y, "xx"),
        dxy=lambda x, y: _second(x, y, "xy"),
        dyy=lambda x, y: _second(x, y, "yy"),
        zero_set_note="V=0 iff Phi(x)=Phi(y); GbarV vanishes there",
        name=name or f"phi_power(p={p})",
    )

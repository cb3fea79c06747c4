"""Spectral Galerkin discretization of the stochastic Burgers equation on
(0, 1) with Dirichlet conditions, and its dimension-uniform stability bound.

States are sine coefficients: v = sum_k a_k e_k with e_k(y) = sqrt(2) sin(k pi y).
The advection term F(v) = -(c/2) (v^2)' is evaluated pseudo-spectrally on a
padded grid (the product of two degree-n sine polynomials is a cosine
polynomial of degree 2n, so the padded quadrature is exact and alias-free);
an O(n^2) convolution of the same coefficients serves as the independent
cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.special import zeta

from .core import BoundCertificate, BoundQuery, DomainSpec, INF, NoCertificate, SdeModel, inv


def sine_eigenvalues(n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    return (k * math.pi) ** 2


def advection_coefficients(A: np.ndarray, c: float) -> np.ndarray:
    """P_n F on a batch of coefficient rows, via padded DST/DCT quadrature.

    <F(v), e_j> = (c/2) j pi sqrt(2) int_0^1 v^2 cos(j pi y) dy.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    N, n = A.shape
    M = 3 * n // 2 + 2  # padded grid: exact for the quadratic nonlinearity
    pad = np.zeros((N, M - 1))
    pad[:, :n] = A
    v_phys = sfft.dst(pad, type=1, axis=1) / math.sqrt(2.0)
    w = v_phys**2
    w_full = np.zeros((N, M + 1))
    w_full[:, 1:M] = w
    cosc = sfft.dct(w_full, type=1, axis=1) / (2.0 * M)  # c_m = int w cos(m pi y) dy
    j = np.arange(1, n + 1, dtype=float)
    return (c / 2.0) * j * math.pi * math.sqrt(2.0) * cosc[:, 1 : n + 1]


def advection_convolution(a: np.ndarray, c: float) -> np.ndarray:
    """O(n^2) exact convolution form of the same projection (test oracle)."""
    a = np.asarray(a, dtype=float)
    n = a.size
    out = np.zeros(n)
    for jj in range(1, n + 1):
        acc = 0.0
        for k in range(1, n + 1):
            for l in range(1, n + 1):
                if abs(k - l) == jj:
                    acc += 0.5 * a[k - 1] * a[l - 1]
                if k + l == jj:
                    acc -= 0.5 * a[k - 1] * a[l - 1]
        out[jj - 1] = (c / 2.0) * jj * math.pi * math.sqrt(2.0) * acc
    return out


@dataclass(frozen=True)
class GalerkinModel:
    n_modes: int
    eigvals: np.ndarray
    c: float
    noise_bound: float  # eta = sup ||B||_HS^2 over the full (undiscretized) noise
    lip_noise: float  # varsigma
    noise_weights: np.ndarray  # first n diagonal weights
    model: SdeModel


def galerkin_model(n: int, c: float, noise_spec: dict) -> GalerkinModel:
    """Assemble the n-mode Galerkin SDE: da = (-Lambda a + P_n F(a)) dt + B dW.

    ``noise_spec`` describes diagonal additive noise: {"eta": total squared
    HS norm, "decay": polynomial mode decay, "lip": varsigma}.  The cubic
    energy identity <a, P_n F(a)> = 0 is probed at build time; a
    discretization violating it beyond 1e-8 is rejected.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    eta = float(noise_spec.get("eta", 0.1))
    decay = float(noise_spec.get("decay", 2.0))
    lip = float(noise_spec.get("lip", 0.0))
    if eta <= 0:
        raise ValueError("noise_spec eta must be positive")
    k = np.arange(1, n + 1, dtype=float)
    weights = math.sqrt(eta / zeta(2.0 * decay)) * k ** (-decay)
    lam = sine_eigenvalues(n)

    def drift(A):
        A2 = np.atleast_2d(A)
        out = -A2 * lam + advection_coefficients(A2, c)
        return out if np.asarray(A).ndim > 1 else out[0]

    def diffusion(A):
        A2 = np.atleast_2d(A)
        base = np.diag(weights)
        out = np.broadcast_to(base, (A2.shape[0], n, n)).copy()
        return out if np.asarray(A).ndim > 1 else out[0]

    model = SdeModel(n, n, drift, diffusion, DomainSpec("all_space"),
                     f"burgers_galerkin_n{n}")

    rng = np.random.default_rng(12345)
    probes = rng.standard_normal((8, n))
    favls = advection_coefficients(probes, c)
    worst = float(np.abs(np.einsum("ni,ni->n", probes, favls)).max())
    if worst > 1e-8:
        raise ValueError(
            f"n={n} aliases the cubic energy identity: <v, P_nF(v)> up to {worst:.2e}")

    return GalerkinModel(n, lam, c, eta, lip, weights, model)


def energy_neutrality(gal: GalerkinModel, A: np.ndarray) -> float:
    """Max |<a, P_n F(a)>| over the given batch of coefficient rows."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    F = advection_coefficients(A, gal.c)
    return float(np.abs(np.einsum("ni,ni->n", A, F)).max())


def poincare_gap(a: np.ndarray) -> float:
    """pi^2 sum a_k^2 - sum (k pi)^2 a_k^2 (<= 0 is the coefficient form of
    ||v|| <= ||v'|| / pi)."""
    a = np.asarray(a, dtype=float)
    lam = sine_eigenvalues(a.size)
    return math.pi**2 * float(a @ a) - float(lam @ (a * a))


def burgers_certificate(gal: GalerkinModel, query: BoundQuery):
    """Dimension-uniform bound on the L^r norm of sup_t ||X^x_t - X^y_t||:

        ||x - y|| / sqrt(1 - 2/p) * exp( c^2 eta q T kappa(16 pi / (c^2 eta q)) / (8 pi)
            + (p - 1) T varsigma^2 / 2 + pi T / (2 q)
            + pi (||x||^2 + ||y||^2) / (4 eta q) )

    with kappa(r) = 1/r (the Agmon-inequality choice), r in (2, inf), and
    p = query.p, q = query.q0 in (r, inf) with 1/p + 1/q = 1/r.
    """
    r, p, q, T = query.r, query.p, query.q0, query.horizon
    if not (2.0 < r < INF):
        return NoCertificate("needs r in (2, inf)", "ModelSpecific(burgers)")
    if not (r < p < INF and r < q < INF):
        return NoCertificate("needs p, q in (r, inf)", "ModelSpecific(burgers)")
    if abs(inv(p) + inv(q) - inv(r)) > 1e-12:
        return NoCertificate("needs 1/p + 1/q = 1/r", "ModelSpecific(burgers)")
    eta, lip, c = gal.noise_bound, gal.lip_noise, gal.c
    x = np.asarray(query.x, dtype=float)
    y = np.asarray(query.y, dtype=float)
    dist = float(np.linalg.norm(x - y))
    kappa_arg = 16.0 * math.pi / (c**2 * eta * q) if c != 0.0 else INF
    kappa = 0.0 if kappa_arg == INF else 1.0 / kappa_arg
    expo = (
        c**2 * eta * q * T * kappa / (8.0 * math.pi)
        + (p - 1.0) * T * lip**2 / 2.0
        + math.pi * T / (2.0 * q)
        + math.pi * (float(x @ x) + float(y @ y)) / (4.0 * eta * q)
    )
    value = dist / math.sqrt(1.0 - 2.0 / p) * math.exp(expo)
    return BoundCertificate(
        value=value,
        theorem="ModelSpecific(burgers)",
        query=query,
        constants_used={"eta": eta, "varsigma": lip, "c": c, "p": p, "q": q,
                        "kappa": kappa, "n_independent": True},
    )


def embed_coefficients(coeffs, n: int) -> np.ndarray:
    """Pad or truncate a coefficient vector to n modes (embedding of the
    same L^2 element across Galerkin levels)."""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    out = np.zeros(n)
    k = min(n, coeffs.size)
    out[:k] = coeffs[:k]
    return out

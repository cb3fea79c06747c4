"""Small hand-built models shared across the test modules."""
import numpy as np

from sdestab.core import DomainSpec, ScalarField, SdeModel


def const_diffusion(value, d=1, m=1):
    base = np.full((d, m), float(value))

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return base.copy()
        return np.broadcast_to(base, (x.shape[0], d, m)).copy()

    return diffusion


def scalar_diffusion(fn):
    """1-d multiplicative diffusion from a vectorized scalar function."""

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return np.array([[float(fn(x[0]))]])
        return fn(x[:, 0]).reshape(-1, 1, 1)

    return diffusion


def ou_model(rate=1.0, noise=1.0):
    return SdeModel(
        1, 1,
        lambda x: -rate * np.asarray(x, dtype=float),
        const_diffusion(noise),
        DomainSpec("all_space"), "ou",
        drift_jac=lambda x: np.array([[-rate]]),
        diffusion_jac=lambda x: np.zeros((1, 1, 1)),
    )


def linear_model(a=1.0, b=1.0):
    """dX = a X dt + b dW (additive noise)."""
    return SdeModel(
        1, 1,
        lambda x: a * np.asarray(x, dtype=float),
        const_diffusion(b),
        DomainSpec("all_space"), "linear",
        drift_jac=lambda x: np.array([[a]]),
        diffusion_jac=lambda x: np.zeros((1, 1, 1)),
    )


def gbm_model(mu=0.0, sigma=1.0):
    """dX = mu X dt + sigma X dW."""
    return SdeModel(
        1, 1,
        lambda x: mu * np.asarray(x, dtype=float),
        scalar_diffusion(lambda u: sigma * u),
        DomainSpec("all_space"), "gbm",
        drift_jac=lambda x: np.array([[mu]]),
        diffusion_jac=lambda x: np.array([[[sigma]]]),
    )


def zero_model(d=1, m=1):
    def drift(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return SdeModel(d, m, drift, const_diffusion(0.0, d, m),
                    DomainSpec("all_space"), "zero")


def fd_scalar_field(value, d, h=1e-5, alpha=0.0, beta=0.0):
    """ScalarField whose derivatives come from central differences of
    ``value`` only (an oracle independent of any analytic gradient)."""

    def gradient(x):
        x = np.asarray(x, dtype=float)
        g = np.empty(d)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            g[i] = (value(x + e) - value(x - e)) / (2 * h)
        return g

    def hessian(x):
        x = np.asarray(x, dtype=float)
        H = np.empty((d, d))
        f0 = value(x)
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h
            H[i, i] = (value(x + ei) - 2 * f0 + value(x - ei)) / h**2
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = h
                H[i, j] = H[j, i] = (
                    value(x + ei + ej) - value(x + ei - ej)
                    - value(x - ei + ej) + value(x - ei - ej)
                ) / (4 * h**2)
        return H

    return ScalarField(value=value, gradient=gradient, hessian=hessian,
                       alpha=alpha, beta=beta, name="fd_oracle")

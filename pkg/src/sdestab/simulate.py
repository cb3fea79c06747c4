"""Time stepping of SDE paths and coupled pairs with shared Brownian
increments, the pathwise log-identity residual, and the rotating-drift
blow-up demonstration.

Increments come from a counter-based generator keyed by (seed, path_index),
so path k's noise is bitwise reproducible regardless of how paths are
batched or threaded.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.random import Generator, Philox

from .core import McConfig, PairField, SdeModel


@dataclass(frozen=True)
class NoiseSource:
    """Deterministic Gaussian increment stream, N(0, dt I_m) per step.

    Increments for (seed, path_index, step k) are identical across runs,
    chunkings and thread counts: each path owns a Philox stream keyed by
    (seed, path_index) and step k is the k-th draw.
    """

    seed: int

    def increments(self, path_index: int, n_steps: int, m: int, dt: float) -> np.ndarray:
        rng = Generator(Philox(key=np.array([self.seed, path_index], dtype=np.uint64)))
        return rng.standard_normal((n_steps, m)) * math.sqrt(dt)

    def increments_block(self, path_indices, n_steps: int, m: int, dt: float) -> np.ndarray:
        """(len(paths), n_steps, m) block, one keyed stream per path."""
        out = np.empty((len(path_indices), n_steps, m))
        for row, idx in enumerate(path_indices):
            out[row] = self.increments(int(idx), n_steps, m, dt)
        return out


@dataclass(frozen=True)
class Transform:
    """Coordinate change rendering a scalar diffusion's noise constant.

    The transformed state z = to_z(x) follows dz = drift_z(z) dt
    + diffusion_z dW.  ``z_lo``/``z_hi`` bound the transformed state:
    scheme "transformed" floors at z_lo, "reflected_transformed" reflects
    into [z_lo, z_hi].
    """

    to_z: Callable
    from_z: Callable
    drift_z: Callable
    diffusion_z: float
    z_lo: Optional[float] = None
    z_hi: Optional[float] = None


@dataclass
class Path:
    times: np.ndarray
    states: np.ndarray  # (n_steps + 1, d); frozen at the stopped state after exit
    exit_step: Optional[int]  # first step index whose proposed state left O
    increments: np.ndarray  # (n_steps, m)

    @property
    def stopped(self) -> bool:
        return self.exit_step is not None


@dataclass
class PathPair:
    times: np.ndarray
    x_path: np.ndarray
    y_path: np.ndarray
    increments: np.ndarray
    shared_increments: bool
    exit_step: Optional[int]


def _eval_drift(model: SdeModel, X: np.ndarray) -> np.ndarray:
    """Drift on an (N, d) batch, falling back to a row loop."""
    try:
        out = np.asarray(model.drift(X), dtype=float)
        if out.shape == X.shape:
            return out
    except Exception:
        pass
    return np.stack([np.asarray(model.drift(row), dtype=float) for row in X])


def _eval_diffusion(model: SdeModel, X: np.ndarray) -> np.ndarray:
    """Diffusion on an (N, d) batch -> (N, d, m)."""
    want = (X.shape[0], model.dim_state, model.dim_noise)
    try:
        out = np.asarray(model.diffusion(X), dtype=float)
        if out.shape == want:
            return out
    except Exception:
        pass
    return np.stack([np.asarray(model.diffusion(row), dtype=float) for row in X])


def _step_batch(model: SdeModel, X: np.ndarray, dW: np.ndarray, dt: float,
                scheme: str) -> np.ndarray:
    """One scheme step on the active batch (states (N, d), dW (N, m))."""
    if scheme == "euler_maruyama":
        mu = _eval_drift(model, X)
        sig = _eval_diffusion(model, X)
        return X + mu * dt + np.einsum("nim,nm->ni", sig, dW)
    tr: Transform = model.transform
    if tr is None:
        raise ValueError(f"scheme {scheme!r} needs a model transform")
    Z = tr.to_z(X[:, 0])
    Z = Z + tr.drift_z(Z) * dt + tr.diffusion_z * dW[:, 0]
    if scheme == "transformed":
        if tr.z_lo is not None:
            Z = np.maximum(Z, tr.z_lo)
    elif scheme == "reflected_transformed":
        lo, hi = tr.z_lo, tr.z_hi
        if lo is None or hi is None:
            raise ValueError("reflected_transformed needs both z bounds")
        span = hi - lo
        Z = np.abs((Z - lo) % (2.0 * span) - span) + lo  # fold into [lo, hi]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return tr.from_z(Z)[:, None]


def integrate(model: SdeModel, x0, T: float, cfg: McConfig, noise: NoiseSource,
              path_index: int = 0) -> Path:
    """Single-path Euler-Maruyama (or transformed-coordinate) integration.

    Domain exit is a stopping time: the path is frozen at the last in-domain
    state and flagged, never raised.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not model.domain.contains(x0):
        raise ValueError("x0 outside the domain")
    n = cfg.n_steps(T)
    dW = noise.increments(path_index, n, model.dim_noise, cfg.dt)
    states = np.empty((n + 1, model.dim_state))
    states[0] = x0
    X = x0[None, :].copy()
    exit_step = None
    for k in range(n):
        if exit_step is None:
            X_new = _step_batch(model, X, dW[k][None, :], cfg.dt, cfg.scheme)
            if model.domain.contains_batch(X_new)[0]:
                X = X_new
            else:
                exit_step = k + 1
        states[k + 1] = X[0]
    times = np.linspace(0.0, n * cfg.dt, n + 1)
    return Path(times, states, exit_step, dW)


def coupled_pair(model: SdeModel, x, y, T: float, cfg: McConfig,
                 noise: NoiseSource, path_index: int = 0) -> PathPair:
    """Two solutions driven by identical increments (one stream per pair)."""
    px = integrate(model, x, T, cfg, noise, path_index)
    py = integrate(model, y, T, cfg, noise, path_index)
    exits = [e for e in (px.exit_step, py.exit_step) if e is not None]
    return PathPair(
        times=px.times,
        x_path=px.states,
        y_path=py.states,
        increments=px.increments,
        shared_increments=True,
        exit_step=min(exits) if exits else None,
    )


def coupled_paths_full(model: SdeModel, x, y, T: float, cfg: McConfig,
                       noise: NoiseSource, path_indices=None):
    """Full trajectories of coupled pairs, vectorized across paths.

    Returns (times, X (N, n+1, d), Y (N, n+1, d), dW (N, n, m),
    exit_steps (N,) with -1 meaning no exit).  States freeze at the stopped
    value after an exit, as in ``integrate``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    n = cfg.n_steps(T)
    m = model.dim_noise
    if path_indices is None:
        path_indices = np.arange(cfg.n_paths)
    N = len(path_indices)
    dW = noise.increments_block(path_indices, n, m, cfg.dt)
    Xp = np.empty((N, n + 1, model.dim_state))
    Yp = np.empty_like(Xp)
    Xp[:, 0, :] = x
    Yp[:, 0, :] = y
    X = np.tile(x, (N, 1))
    Y = np.tile(y, (N, 1))
    exit_steps = np.full(N, -1, dtype=int)
    active = np.ones(N, dtype=bool)
    for k in range(n):
        if active.any():
            Xn = _step_batch(model, X[active], dW[active, k, :], cfg.dt, cfg.scheme)
            Yn = _step_batch(model, Y[active], dW[active, k, :], cfg.dt, cfg.scheme)
            ok = model.domain.contains_batch(Xn) & model.domain.contains_batch(Yn)
            rows = np.nonzero(active)[0]
            X[rows[ok]] = Xn[ok]
            Y[rows[ok]] = Yn[ok]
            exit_steps[rows[~ok]] = k + 1
            active[rows[~ok]] = False
        Xp[:, k + 1, :] = X
        Yp[:, k + 1, :] = Y
    times = np.linspace(0.0, n * cfg.dt, n + 1)
    return times, Xp, Yp, dW, exit_steps


def _broadcast_block(arr, n, d):
    arr = np.asarray(arr, dtype=float)
    if arr.shape == (d, d):
        return np.broadcast_to(arr, (n, d, d))
    if arr.shape == (n, d, d):
        return arr
    raise ValueError("pair-field second partial has unexpected shape")


def _pair_terms_batch(model: SdeModel, V: PairField, X: np.ndarray, Y: np.ndarray):
    """Vectorized (extgen, extnoise, V) along a trajectory of points."""
    n, d = X.shape
    # evaluate V first: a field that is not batch-aware fails fast here and
    # the caller falls back to the pointwise loop
    vval = np.asarray(V.value(X, Y), dtype=float).reshape(n)
    mux, muy = _eval_drift(model, X), _eval_drift(model, Y)
    sx, sy = _eval_diffusion(model, X), _eval_diffusion(model, Y)
    vx = np.asarray(V.dx(X, Y), dtype=float).reshape(n, d)
    vy = np.asarray(V.dy(X, Y), dtype=float).reshape(n, d)
    vxx = _broadcast_block(V.dxx(X, Y), n, d)
    vxy = _broadcast_block(V.dxy(X, Y), n, d)
    vyy = _broadcast_block(V.dyy(X, Y), n, d)
    extgen = np.einsum("ni,ni->n", vx, mux) + np.einsum("ni,ni->n", vy, muy)
    extgen += 0.5 * np.einsum("nik,njk,nij->n", sx, sx, vxx)
    extgen += np.einsum("nik,njk,nij->n", sx, sy, vxy)
    extgen += 0.5 * np.einsum("nik,njk,nij->n", sy, sy, vyy)
    extnoise = np.einsum("ni,nim->nm", vx, sx) + np.einsum("ni,nim->nm", vy, sy)
    return extgen, extnoise, vval


def _pair_terms_loop(model, V, X, Y):
    from .operators import apply_extended

    n = X.shape[0]
    extgen = np.empty(n)
    extnoise = np.empty((n, model.dim_noise))
    vval = np.empty(n)
    for k in range(n):
        ops = apply_extended(model, V, X[k], Y[k])
        extgen[k] = ops.extgen
        extnoise[k] = ops.extnoise_row
        vval[k] = float(V.value(X[k], Y[k]))
    return extgen, extnoise, vval


@dataclass(frozen=True)
class ResidualResult:
    residual: float
    n_steps_used: int
    truncated: bool  # V hit zero (or the pair exited) before the horizon


def pathwise_identity_residual(model: SdeModel, V: PairField, pair: PathPair) -> ResidualResult:
    """Gap of the pathwise log identity for V along a coupled pair:

        | log V_N - log V_0 - sum_k [ratio_gen - ratio_noise_sq/2] dt
          - sum_k (extnoise/V) . dW_k |

    with left-point evaluation.  Requires V > 0 at the initial points; if V
    hits zero (or the pair exits the domain) the residual is computed on the
    truncated window and flagged.
    """
    X, Y, dW = pair.x_path, pair.y_path, pair.increments
    n = dW.shape[0]
    dt = float(pair.times[1] - pair.times[0])
    if not float(V.value(X[0], Y[0])) > 0.0:
        raise ValueError("V must be positive at the initial points")
    try:
        extgen, extnoise, vval = _pair_terms_batch(model, V, X[:-1], Y[:-1])
    except Exception:
        extgen, extnoise, vval = _pair_terms_loop(model, V, X[:-1], Y[:-1])
    v_all = np.empty(n + 1)
    v_all[:-1] = vval
    v_all[-1] = float(V.value(X[-1], Y[-1]))

    last = n
    truncated = False
    if pair.exit_step is not None:
        last = min(last, pair.exit_step)
        truncated = True
    nonpos = np.nonzero(v_all <= 0.0)[0]
    if nonpos.size:
        last = min(last, int(nonpos[0]) - 1)
        truncated = True
    if last < 1:
        raise ValueError("no usable window: V vanished immediately")

    vv = v_all[:last]
    rg = np.where(np.abs(vv) < 1e-300, 0.0, extgen[:last] / vv)
    noise_sq = np.einsum("nm,nm->n", extnoise[:last], extnoise[:last])
    rn = np.where(np.abs(vv) < 1e-300, 0.0, noise_sq / vv**2)
    mart = np.einsum("nm,nm->", extnoise[:last] / vv[:, None], dW[:last])
    drift_sum = float(np.sum(rg - 0.5 * rn) * dt)
    res = abs(math.log(v_all[last]) - math.log(v_all[0]) - drift_sum - mart)
    return ResidualResult(res, last, truncated)


def residual_dt_sweep(model: SdeModel, V: PairField, x, y, T: float,
                      dt0: float, levels: int, n_paths: int, seed: int):
    """Identity residuals across dt halvings dt0, dt0/2, ..., dt0/2^(levels-1),
    using common refined noise: coarser increments are block sums of the
    finest level, so per-level medians are directly comparable.

    Returns (dts, medians, residual matrix of shape (levels, n_paths)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m = model.dim_noise
    n0 = int(round(T / dt0))
    if abs(n0 * dt0 - T) > 1e-9 * T:
        raise ValueError("dt0 must divide T")
    n_fine = n0 * 2 ** (levels - 1)
    dt_fine = T / n_fine
    noise = NoiseSource(seed)
    dWf = noise.increments_block(np.arange(n_paths), n_fine, m, dt_fine)
    dts, medians = [], []
    res = np.empty((levels, n_paths))
    for lev in range(levels):
        block = 2 ** (levels - 1 - lev)
        n_k = n_fine // block
        dt_k = T / n_k
        dW = dWf.reshape(n_paths, n_k, block, m).sum(axis=2)
        cfg = McConfig(n_paths=n_paths, dt=dt_k, seed=seed)
        Xp = np.empty((n_paths, n_k + 1, model.dim_state))
        Yp = np.empty_like(Xp)
        Xp[:, 0, :] = x
        Yp[:, 0, :] = y
        X = np.tile(x, (n_paths, 1))
        Y = np.tile(y, (n_paths, 1))
        for k in range(n_k):
            X = _step_batch(model, X, dW[:, k, :], dt_k, cfg.scheme)
            Y = _step_batch(model, Y, dW[:, k, :], dt_k, cfg.scheme)
            Xp[:, k + 1, :] = X
            Yp[:, k + 1, :] = Y
        times = np.linspace(0.0, T, n_k + 1)
        for i in range(n_paths):
            pair = PathPair(times, Xp[i], Yp[i], dW[i], True, None)
            res[lev, i] = pathwise_identity_residual(model, V, pair).residual
        dts.append(dt_k)
        medians.append(float(np.median(res[lev])))
    return np.array(dts), np.array(medians), res


def identity_residuals(model: SdeModel, V: PairField, x, y, T: float,
                       cfg: McConfig, noise: NoiseSource) -> np.ndarray:
    """Residuals of the pathwise log identity over cfg.n_paths coupled pairs."""
    times, Xp, Yp, dW, exits = coupled_paths_full(model, x, y, T, cfg, noise)
    out = np.empty(cfg.n_paths)
    for i in range(cfg.n_paths):
        pair = PathPair(times, Xp[i], Yp[i], dW[i], True,
                        None if exits[i] < 0 else int(exits[i]))
        out[i] = pathwise_identity_residual(model, V, pair).residual
    return out


_ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _blowup_rhs(t: float, z: np.ndarray) -> np.ndarray:
    n = float(np.hypot(z[0], z[1]))
    u = z - t * (_ROT @ z) / n**1.5
    return float(u @ u) * (_ROT @ u)


def _radial_rhs(t: float, w: float) -> float:
    # exact radial reduction: w = ||z||^2 obeys w' = 2 t (w^{5/4} + t^2 w^{-1/4})
    return 2.0 * t * (w**1.25 + t * t * w**-0.25)


@dataclass(frozen=True)
class BlowupResult:
    tau_estimate: float
    blown: bool
    final_norm: float
    trace_t: np.ndarray
    trace_norm: np.ndarray


def rode_blowup(x0, dt: float = 1e-3, blow_threshold: float = 1e6,
                horizon: float = 10.0) -> BlowupResult:
    """Integrate z' = ||z - t R z / ||z||^{3/2}||^2 R (z - t R z / ||z||^{3/2})
    until ||z|| >= blow_threshold, with adaptive step halving near blow-up.

    The vector field is integrated directly (RK4, step-doubling control)
    while the state is moderate; past ||z|| = 1e3 the rotation period shrinks
    like ||z||^{-2}, so the exact radial reduction
    d||z||^2/dt = 2 t (||z||^{5/2} + t^2 ||z||^{-1/2}) carries the tail to the
    threshold.  Non-blow-up by the horizon is reported, not raised.
    """
    z = np.atleast_1d(np.asarray(x0, dtype=float))
    if z.shape != (2,) or not np.any(z):
        raise ValueError("x0 must be a nonzero point in R^2")
    t = 0.0
    h = dt
    ts = [0.0]
    norms = [float(np.linalg.norm(z))]
    # The rotation period shrinks like ||z||^{-2}, so the vector field is
    # only integrated while the state is moderate; the radial reduction
    # (exact for every phase) carries the tail to the threshold.
    switch = min(20.0, blow_threshold)

    def rk4(f, t, u, h):
        k1 = f(t, u)
        k2 = f(t + h / 2, u + h / 2 * k1)
        k3 = f(t + h / 2, u + h / 2 * k2)
        k4 = f(t + h, u + h * k3)
        return u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    while np.linalg.norm(z) < switch and t < horizon:
        full = rk4(_blowup_rhs, t, z, h)
        two = rk4(_blowup_rhs, t + h / 2, rk4(_blowup_rhs, t, z, h / 2), h / 2)
        err = float(np.linalg.norm(full - two)) / (1.0 + float(np.linalg.norm(two)))
        if err > 1e-7 and h > 1e-12:
            h *= 0.5
            continue
        z, t = two, t + h
        ts.append(t)
        norms.append(float(np.linalg.norm(z)))
        if err < 1e-9:
            h = min(2.0 * h, dt)

    w = float(z @ z)
    target = blow_threshold**2
    while w < target and t < horizon:
        r = _radial_rhs(t, w)
        hh = min(dt, 0.01 * w / r) if r > 0 else dt
        k1 = _radial_rhs(t, w)
        k2 = _radial_rhs(t + hh / 2, w + hh / 2 * k1)
        k3 = _radial_rhs(t + hh / 2, w + hh / 2 * k2)
        k4 = _radial_rhs(t + hh, w + hh * k3)
        w = w + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += hh
        ts.append(t)
        norms.append(math.sqrt(w))

    blown = math.sqrt(w) >= blow_threshold if w >= 0 else True
    return BlowupResult(t, blown, math.sqrt(max(w, 0.0)), np.array(ts), np.array(norms))


_DUMP_MAGIC = b"SDST"


def dump_path(path: Path, fname: str, seed: int = 0, dt: Optional[float] = None):
    """Binary path dump: little-endian header (d, N as int64; dt as float64;
    seed as uint64) followed by the (N+1) x d states, row-major float64."""
    states = np.asarray(path.states, dtype="<f8")
    n_plus_1, d = states.shape
    if dt is None:
        dt = float(path.times[1] - path.times[0]) if len(path.times) > 1 else 0.0
    with open(fname, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<qqdQ", d, n_plus_1 - 1, dt, seed))
        fh.write(states.tobytes(order="C"))


def load_path(fname: str):
    """Inverse of dump_path: returns (states, dt, seed)."""
    with open(fname, "rb") as fh:
        if fh.read(4) != _DUMP_MAGIC:
            raise ValueError("not a sdestab path dump")
        d, n, dt, seed = struct.unpack("<qqdQ", fh.read(32))
        states = np.frombuffer(fh.read(8 * (n + 1) * d), dtype="<f8").reshape(n + 1, d)
    return states, dt, seed


@dataclass
class CoupledStats:
    """Per-path statistics of a coupled ensemble (stopped at domain exit)."""

    final_metric: np.ndarray
    sup_metric: np.ndarray
    exited: np.ndarray
    exit_fraction: float


def _chunk_indices(n_paths: int, chunk: int):
    for start in range(0, n_paths, chunk):
        yield np.arange(start, min(start + chunk, n_paths))


def default_chunk(n_steps: int, m: int, cap_floats: float = 4e7) -> int:
    return max(1, int(cap_floats / max(1, n_steps * m)))


def coupled_ensemble_stats(
    model: SdeModel,
    x,
    y,
    T: float,
    cfg: McConfig,
    noise: NoiseSource,
    metric: Optional[Callable] = None,
    n_workers: int = 1,
) -> CoupledStats:
    """Simulate cfg.n_paths coupled pairs; reduce each to its final and
    running-sup distance under ``metric`` (default Euclidean norm).

    Paths are processed in fixed-size chunks whose boundaries do not depend
    on ``n_workers``; chunk results are merged in index order, so output is
    bitwise independent of the thread count.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    n = cfg.n_steps(T)
    m = model.dim_noise
    if metric is None:
        metric = lambda X, Y: np.linalg.norm(X - Y, axis=1)
    chunk = default_chunk(n, m)
    chunks = list(_chunk_indices(cfg.n_paths, chunk))

    def run_chunk(idx):
        N = len(idx)
        dW = noise.increments_block(idx, n, m, cfg.dt)
        X = np.tile(x, (N, 1))
        Y = np.tile(y, (N, 1))
        active = np.ones(N, dtype=bool)
        dist = np.asarray(metric(X, Y), dtype=float)
        sup = dist.copy()
        for k in range(n):
            if active.any():
                Xn = _step_batch(model, X[active], dW[active, k, :], cfg.dt, cfg.scheme)
                Yn = _step_batch(model, Y[active], dW[active, k, :], cfg.dt, cfg.scheme)
                ok = model.domain.contains_batch(Xn) & model.domain.contains_batch(Yn)
                rows = np.nonzero(active)[0]
                X[rows[ok]] = Xn[ok]
                Y[rows[ok]] = Yn[ok]
                active[rows[~ok]] = False
                if ok.any():
                    d_new = np.asarray(metric(X[rows[ok]], Y[rows[ok]]), dtype=float)
                    sup[rows[ok]] = np.maximum(sup[rows[ok]], d_new)
        final = np.asarray(metric(X, Y), dtype=float)
        return final, sup, ~active

    if n_workers > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            results = list(ex.map(run_chunk, chunks))
    else:
        results = [run_chunk(c) for c in chunks]

    final = np.concatenate([r[0] for r in results])
    sup = np.concatenate([r[1] for r in results])
    exited = np.concatenate([r[2] for r in results])
    return CoupledStats(final, sup, exited, float(exited.mean()))


@dataclass
class ExpMomentStats:
    values: np.ndarray  # exp(e^{-alpha tau} U(X_tau) + sum e^{-alpha t_k} Ubar dt)
    exited: np.ndarray
    overflowed: np.ndarray
    exit_fraction: float


def exp_moment_ensemble(
    model: SdeModel,
    U_value: Callable,
    alpha: float,
    ubar_value: Optional[Callable],
    x,
    T: float,
    cfg: McConfig,
    noise: NoiseSource,
    n_workers: int = 1,
) -> ExpMomentStats:
    """Per-path exp(e^{-alpha tau} U(X_tau) + sum_k e^{-alpha t_k} Ubar dt)
    over stopped paths.  ``U_value``/``ubar_value`` take (N, d) batches."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = cfg.n_steps(T)
    m = model.dim_noise
    chunk = default_chunk(n, m)
    chunks = list(_chunk_indices(cfg.n_paths, chunk))

    def run_chunk(idx):
        N = len(idx)
        dW = noise.increments_block(idx, n, m, cfg.dt)
        X = np.tile(x, (N, 1))
        active = np.ones(N, dtype=bool)
        tau = np.full(N, T)
        integral = np.zeros(N)
        for k in range(n):
            if ubar_value is not None and active.any():
                integral[active] += (
                    math.exp(-alpha * k * cfg.dt)
                    * np.asarray(ubar_value(X[active]), dtype=float)
                    * cfg.dt
                )
            if active.any():
                Xn = _step_batch(model, X[active], dW[active, k, :], cfg.dt, cfg.scheme)
                ok = model.domain.contains_batch(Xn)
                rows = np.nonzero(active)[0]
                X[rows[ok]] = Xn[ok]
                active[rows[~ok]] = False
                tau[rows[~ok]] = k * cfg.dt
        u_tau = np.asarray(U_value(X), dtype=float)
        expo = np.exp(-alpha * tau) * u_tau + integral
        with np.errstate(over="ignore"):
            vals = np.exp(expo)
        return vals, ~active, ~np.isfinite(vals)

    if n_workers > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            results = list(ex.map(run_chunk, chunks))
    else:
        results = [run_chunk(c) for c in chunks]

    vals = np.concatenate([r[0] for r in results])
    exited = np.concatenate([r[1] for r in results])
    over = np.concatenate([r[2] for r in results])
    return ExpMomentStats(vals, exited, over, float(exited.mean()))

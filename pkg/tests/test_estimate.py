import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdestab.core import BoundCertificate, BoundQuery, INF, McConfig
from sdestab.estimate import (
    empirical_lipschitz,
    exp_moment_estimate,
    lp_norm,
    verify_certificate,
)
from sdestab.modelzoo import build_model, certificate
from sdestab.simulate import NoiseSource

from helpers import linear_model, ou_model, zero_model


def test_lp_norm_constant_samples():
    for p in (0.5, 1.0, 2.0, 7.0, INF):
        est = lp_norm(np.full(50, 3.0), p)
        assert abs(est.point_estimate - 3.0) < 1e-12


def test_lp_norm_hand_value():
    est = lp_norm([0.0, 2.0], 2.0)
    assert abs(est.point_estimate - math.sqrt(2.0)) < 1e-12


def test_lp_norm_max():
    est = lp_norm([1.0, 2.0, 3.0], INF)
    assert est.point_estimate == 3.0
    assert est.ci_low == est.ci_high == 3.0
    assert est.estimator_kind == "max"


def test_lp_norm_rejects_bad_input():
    with pytest.raises(ValueError):
        lp_norm([], 2.0)
    with pytest.raises(ValueError):
        lp_norm([-1.0, 2.0], 2.0)


def test_lp_norm_bootstrap_kicks_in_for_high_moments():
    rng = np.random.default_rng(0)
    est = lp_norm(rng.exponential(size=400), 9.0)
    assert est.flags.get("bootstrap")
    assert est.ci_low <= est.point_estimate <= est.ci_high


@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=40),
       st.floats(0.5, 6.0), st.floats(0.1, 6.0))
@settings(max_examples=50, deadline=None)
def test_lp_norm_monotone_in_p(samples, p, bump):
    a = lp_norm(samples, p).point_estimate
    b = lp_norm(samples, p + bump).point_estimate
    assert a <= b + 1e-9 * (1.0 + b)


def _query(T=0.5, r=2.0, x=(1.0,), y=(2.0,)):
    return BoundQuery(horizon=T, r=r, p=r, q0=INF, q1=INF, x=list(x), y=list(y))


def test_empirical_lipschitz_coupled_zero():
    q = _query(x=(1.0,), y=(1.0,))
    mc = McConfig(64, 1e-2, 5)
    marg, unif = empirical_lipschitz(linear_model(), q.x, q.y, q, mc)
    assert marg.point_estimate == 0.0
    assert unif.point_estimate == 0.0


def test_empirical_lipschitz_linear_exact_recursion():
    # additive noise: every path has the same deterministic difference
    a, dt, T = 0.5, 1e-2, 1.0
    q = _query(T=T)
    mc = McConfig(32, dt, 5)
    marg, unif = empirical_lipschitz(linear_model(a, 0.4), q.x, q.y, q, mc)
    expect = abs(1.0 - 2.0) * (1.0 + a * dt) ** 100
    assert abs(marg.point_estimate - expect) < 1e-12
    assert unif.point_estimate >= marg.point_estimate


def test_empirical_lipschitz_lorenz_classical_below_certificate():
    # classical chaotic parameters: the certificate is huge but finite
    entry = build_model("lorenz", {"alpha1": 10.0, "alpha2": 28.0,
                                   "alpha3": 8.0 / 3.0, "beta": 0.1})
    q = _query(T=0.5, r=2.0, x=(1.0, 1.0, 20.0), y=(1.05, 1.0, 20.0))
    cert = certificate(entry, q)
    mc = McConfig(200, 2e-4, 8)
    marg, unif = empirical_lipschitz(entry.model, q.x, q.y, q, mc)
    assert math.isfinite(marg.point_estimate)
    assert verify_certificate(marg, cert).passed
    assert verify_certificate(unif, cert).passed


def test_uniform_estimate_dominates_marginal():
    entry = build_model("van_der_pol")
    q = _query(x=(0.5, 0.5), y=(0.7, 0.4))
    mc = McConfig(128, 1e-3, 6)
    marg, unif = empirical_lipschitz(entry.model, q.x, q.y, q, mc)
    assert unif.point_estimate >= marg.point_estimate


def test_exp_moment_deterministic_path():
    # mu = sigma = 0, U(x) = x, alpha = 0: the estimate is exactly e
    from sdestab.core import ScalarField

    U = ScalarField(value=lambda x: float(np.atleast_1d(x)[0]),
                    gradient=lambda x: np.ones(1),
                    hessian=lambda x: np.zeros((1, 1)))
    mc = McConfig(16, 1e-2, 4)
    est = exp_moment_estimate(zero_model(), U, None, [1.0], 1.0, mc,
                              U_batch=lambda X: X[:, 0])
    assert abs(est.point_estimate - math.e) < 1e-12
    assert est.ci_low == est.ci_high == pytest.approx(math.e)


def test_exp_moment_overflow_flagged():
    from sdestab.core import ScalarField

    U = ScalarField(value=lambda x: 1e4 * float(np.atleast_1d(x)[0]),
                    gradient=lambda x: np.full(1, 1e4),
                    hessian=lambda x: np.zeros((1, 1)))
    mc = McConfig(8, 1e-2, 4)
    est = exp_moment_estimate(zero_model(), U, None, [1.0], 1.0, mc,
                              U_batch=lambda X: 1e4 * X[:, 0])
    assert math.isinf(est.point_estimate)
    assert est.flags.get("overflow")


def test_verify_certificate_threshold_semantics():
    cert = BoundCertificate(value=1.0, theorem="ThmUV")
    from sdestab.estimate import McEstimate

    ok = McEstimate(0.0, 0.0, 0.0, 10, "lp")
    assert verify_certificate(ok, cert).passed
    close = McEstimate(0.9, 0.89, 1.001, 10, "lp")
    v = verify_certificate(close, cert, slack=0.0)
    assert not v.passed
    assert v.margin == pytest.approx(1.0 - 1.001)
    assert verify_certificate(close, cert, slack=0.01).passed
    # kind=max compares the point value
    mx = McEstimate(0.999, 0.999, 0.999, 10, "max")
    assert verify_certificate(mx, cert).passed


def test_verify_certificate_metadata_mismatch_is_hard_error():
    q = _query()
    cert = BoundCertificate(value=1.0, theorem="ThmUV", query=q)
    from sdestab.estimate import McEstimate

    est = McEstimate(0.1, 0.05, 0.2, 10, "lp",
                     meta={"T": 0.25, "r": q.r, "x": q.x, "y": q.y})
    with pytest.raises(ValueError):
        verify_certificate(est, cert)


def test_doubling_paths_calibration_smoke():
    # the point estimate at 2N paths lies within the N-path CI >= 90% of 20 reps
    model = ou_model()
    hits = 0
    for rep in range(20):
        q = _query(T=0.25)
        a, _ = empirical_lipschitz(model, q.x, q.y, q,
                                   McConfig(200, 1e-2, 1000 + rep))
        b, _ = empirical_lipschitz(model, q.x, q.y, q,
                                   McConfig(400, 1e-2, 1000 + rep))
        if a.ci_low <= b.point_estimate <= a.ci_high:
            hits += 1
    assert hits >= 18


def test_exit_fraction_flag():
    # a domain the paths leave immediately: flagged unreliable
    from sdestab.core import DomainSpec, SdeModel
    from helpers import const_diffusion

    leaky = SdeModel(1, 1,
                     lambda x: np.full_like(np.asarray(x, dtype=float), -10.0),
                     const_diffusion(0.0), DomainSpec("positive_orthant"))
    q = _query(T=0.5, x=(0.5,), y=(0.6,))
    mc = McConfig(16, 1e-2, 3)
    marg, unif = empirical_lipschitz(leaky, q.x, q.y, q, mc)
    assert marg.flags["exit_fraction"] == 1.0
    assert marg.flags.get("unreliable")


def test_exp_moment_with_running_integral_term_vdp():
    # van der Pol: E[exp(e^{-alpha T} U(X_T) + sum e^{-alpha t_k} Ubar dt)]
    # stays below the shifted right-hand side exp(U(x) + int beta e^{-alpha s})
    from sdestab.bounds import exp_moment_bound_rhs_shifted

    entry = build_model("van_der_pol")
    ld = entry.lyapunov[0]
    assert ld.ubar_batch is not None
    x = np.array([0.5, 0.5])
    mc = McConfig(2000, 1e-3, 13)
    est = exp_moment_estimate(entry.model, ld.field, None, x, 0.5, mc,
                              NoiseSource(13), U_batch=ld.value_batch,
                              ubar_batch=ld.ubar_batch)
    bound = exp_moment_bound_rhs_shifted(ld.field, x, 0.5)
    assert est.ci_high <= bound
    # the integral term contributes: dropping it must give a smaller estimate
    est_no = exp_moment_estimate(entry.model, ld.field, None, x, 0.5, mc,
                                 NoiseSource(13), U_batch=ld.value_batch)
    assert est_no.point_estimate <= est.point_estimate


def test_residual_truncated_on_domain_exit():
    from sdestab.core import DomainSpec, SdeModel, squared_distance_pair
    from sdestab.simulate import coupled_pair, pathwise_identity_residual
    from helpers import const_diffusion

    # strong downward drift on the positive orthant: both paths exit early
    leaky = SdeModel(1, 1,
                     lambda x: np.full_like(np.asarray(x, dtype=float), -3.0),
                     const_diffusion(0.0), DomainSpec("positive_orthant"))
    pair = coupled_pair(leaky, [1.0], [0.5], 1.0, McConfig(1, 1e-2, 2),
                        NoiseSource(2))
    assert pair.exit_step is not None
    res = pathwise_identity_residual(leaky, squared_distance_pair(1), pair)
    assert res.truncated
    assert res.n_steps_used <= pair.exit_step


def test_empirical_lipschitz_accepts_pair_field_distance():
    # a pointwise-only PairField distance still works (row-wise fallback)
    entry = build_model("volatility")
    q = BoundQuery(horizon=0.25, r=2.0, p=2.0, q0=INF, q1=INF,
                   x=[1.2], y=[0.7])
    mc = McConfig(32, 1e-3, 21, scheme="transformed")
    marg, unif = empirical_lipschitz(entry.model, q.x, q.y, q, mc,
                                     NoiseSource(21), distance=entry.distance)
    # distance is the squared transformed difference; compare with the metric
    marg2, _ = empirical_lipschitz(entry.model, q.x, q.y, q, mc,
                                   NoiseSource(21),
                                   metric=lambda X, Y: np.abs(
                                       np.sqrt(X[:, 0]) - np.sqrt(Y[:, 0])) ** 2)
    assert marg.point_estimate == pytest.approx(marg2.point_estimate)


def test_exp_moment_matches_gaussian_closed_form():
    # OU terminal law is Gaussian, so E[exp(lambda X_T^2)] has a closed form:
    # (1 - 2 lam v)^{-1/2} exp(lam m^2 / (1 - 2 lam v)) with m = x e^{-T},
    # v = (1 - e^{-2T}) / 2 -- an oracle independent of the estimator.
    from sdestab.core import quadratic_field

    lam, T, x0 = 0.3, 0.7, 0.8
    v = (1.0 - math.exp(-2.0 * T)) / 2.0
    m = x0 * math.exp(-T)
    exact = (1.0 - 2.0 * lam * v) ** -0.5 * math.exp(lam * m * m / (1.0 - 2.0 * lam * v))
    U = quadratic_field(lam, 1)
    mc = McConfig(20000, 1e-3, 42)
    est = exp_moment_estimate(ou_model(), U, None, [x0], T, mc, NoiseSource(42),
                              U_batch=lambda X: lam * np.sum(X * X, axis=1))
    half = (est.ci_high - est.ci_low) / 2.0
    assert abs(est.point_estimate - exact) < 3.0 * half + 5e-3  # CI + Euler bias


def test_empirical_lipschitz_gbm_closed_form_l2():
    # dX = X dW coupled: D_T = (x - y) exp(W_T - T/2), so the marginal L^2
    # difference is exactly |x - y| e^{T/2} -- an oracle independent of the
    # estimator and of the certificates.
    from helpers import gbm_model

    T = 0.5
    q = _query(T=T, x=(1.0,), y=(1.5,))
    mc = McConfig(20000, 2.5e-4, 17)
    marg, unif = empirical_lipschitz(gbm_model(), q.x, q.y, q, mc, NoiseSource(17))
    exact = 0.5 * math.exp(T / 2.0)
    assert marg.ci_low - 5e-3 <= exact <= marg.ci_high + 5e-3
    assert unif.point_estimate >= marg.point_estimate

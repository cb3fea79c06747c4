import math

import numpy as np
import pytest

from sdestab.core import BoundQuery, INF, McConfig, NoCertificate
from sdestab.bounds import lyapunov_check
from sdestab.modelzoo import (
    ZOO_NAMES,
    build_model,
    certificate,
    default_grid,
    feller_boundary,
    volatility_exponent_sup,
)
from sdestab.operators import apply_operators
from sdestab.simulate import NoiseSource, coupled_paths_full


def test_registry_covers_all_names_and_rejects_unknown():
    for name in ZOO_NAMES:
        entry = build_model(name)
        assert entry.model.dim_state >= 1
    with pytest.raises(ValueError):
        build_model("heston")


def test_positivity_constraints_enforced():
    with pytest.raises(ValueError):
        build_model("duffing_vdp", {"alpha2": 0.0})
    with pytest.raises(ValueError):
        build_model("duffing_vdp", {"alpha3": -1.0})
    with pytest.raises(ValueError):
        build_model("psychology", {"alpha": 0.0})
    with pytest.raises(ValueError):
        build_model("volatility", {"a": 0.5})
    with pytest.raises(ValueError):
        build_model("brownian_dynamics", {"eta2": 100.0})


def test_psychology_generator_identity():
    # G U + |sigma^* grad U|^2 / 2 vanishes identically for U = ||x||^{2p}
    entry = build_model("psychology")
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.standard_normal(2)
        ops = apply_operators(entry.model, entry.lyapunov[0].field, x)
        val = ops.gen + 0.5 * float(ops.noise_row @ ops.noise_row)
        assert abs(val) < 1e-12


def test_rotation_counterexample_orthogonal_drift():
    entry = build_model("rotation_counterexample")
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.standard_normal(2)
        assert abs(float(x @ entry.model.drift(x))) < 1e-12


def test_volatility_feasibility_boundary_classification():
    ok = build_model("volatility", {"b": 0.5, "delta": 0.3, "beta": 0.5,
                                    "kappa": 0.0})
    q = BoundQuery(horizon=1.0, r=INF, p=INF, q0=INF, q1=INF, x=[1.0], y=[2.0])
    assert not isinstance(certificate(ok, q), NoCertificate)
    bad = build_model("volatility", {"b": 0.5, "delta": 0.1, "beta": 0.8,
                                     "kappa": 0.0})
    res = certificate(bad, q)
    assert isinstance(res, NoCertificate)
    assert "accessible" in res.reason


def test_feller_boundary_reports():
    assert feller_boundary("volatility", {"b": 0.5, "delta": 0.3, "beta": 0.5,
                                          "kappa": 0.0})["zero_inaccessible"]
    assert not feller_boundary("volatility", {"b": 0.5, "delta": 0.0,
                                              "beta": 0.5, "kappa": 0.0})["zero_inaccessible"]
    wf = feller_boundary("wright_fisher", {"rho0": 0.2, "rho1": 0.2, "beta": 0.4})
    assert wf["zero_inaccessible"] and wf["one_inaccessible"]
    wf2 = feller_boundary("wright_fisher", {"rho0": 0.1, "rho1": 0.3, "beta": 0.4})
    assert not wf2["zero_inaccessible"]
    with pytest.raises(ValueError):
        feller_boundary("lorenz", {})


def test_wright_fisher_certificate_s_zero_exact():
    entry = build_model("wright_fisher", {"s": 0.0, "rho0": 0.3, "rho1": 0.3,
                                          "beta": 0.4})
    x, y = 0.3, 0.6
    q = BoundQuery(horizon=2.0, r=INF, p=INF, q0=INF, q1=INF, x=[x], y=[y])
    cert = certificate(entry, q)
    assert cert.value == pytest.approx(abs(math.asin(math.sqrt(x))
                                           - math.asin(math.sqrt(y))))


def test_wright_fisher_certificate_requires_strong_mutation():
    entry = build_model("wright_fisher", {"s": 1.0, "rho0": 0.1, "rho1": 0.3,
                                          "beta": 0.4})
    q = BoundQuery(horizon=1.0, r=INF, p=INF, q0=INF, q1=INF, x=[0.3], y=[0.6])
    assert isinstance(certificate(entry, q), NoCertificate)


def test_volatility_global_threshold_three_halves_model():
    entry = build_model("volatility", {"a": 2.0, "b": 1.5, "kappa": 0.0,
                                       "delta": 0.0, "gamma": 0.5,
                                       "alpha": 2.0, "beta": 0.5})
    pmax = 1.0 + 16.0 * 2.0 / (9.0 * 0.25)
    for p, finite in [(1.0, True), (pmax, True), (pmax + 1e-9, False),
                      (pmax + 2.0, False)]:
        q = BoundQuery(horizon=1.0, r=p, p=p, q0=INF, q1=INF, x=[1.0], y=[2.0])
        res = certificate(entry, q, "global_lipschitz")
        assert isinstance(res, NoCertificate) == (not finite), p


def test_cir_exponent_sup_hand_value():
    # b=1/2, delta=0.3, beta=0.5, gamma=-1: integrand = -1/2 - 0.11875/u,
    # sup over u is gamma/2 (beta^2/8 <= delta/2)
    params = dict(a=2.0, b=0.5, c=1.0, kappa=0.0, delta=0.3, gamma=-1.0,
                  alpha=0.0, beta=0.5)
    sup = volatility_exponent_sup(params)
    assert abs(sup - (-0.5)) < 1e-4
    entry = build_model("volatility")
    q = BoundQuery(horizon=1.0, r=INF, p=INF, q0=INF, q1=INF, x=[1.2], y=[0.7])
    cert = certificate(entry, q)
    byhand = abs(math.sqrt(1.2) - math.sqrt(0.7)) * math.exp(1.0 * sup)
    assert cert.value == pytest.approx(byhand)


def test_zoo_lyapunov_checks_pass_on_default_boxes():
    for name in ZOO_NAMES:
        entry = build_model(name)
        grid = default_grid(entry, 6)
        for ld in entry.lyapunov:
            rep = lyapunov_check(entry.model, ld.field, ld.ubar, grid,
                                 np.linspace(0.0, 0.5, 4))
            assert rep.worst_margin >= -1e-9, (name, rep.worst_margin)


def test_monotone_coupling_volatility():
    entry = build_model("volatility")
    cfg = McConfig(32, 1e-3, 77, scheme="transformed")
    _, Xp, Yp, _, _ = coupled_paths_full(entry.model, [0.6], [1.4], 1.0,
                                         cfg, NoiseSource(77))
    assert np.all(Xp <= Yp + 1e-14)


def test_certificates_finite_on_feasible_queries():
    for name in ("van_der_pol", "duffing_vdp", "lorenz", "langevin",
                 "brownian_dynamics", "psychology"):
        entry = build_model(name)
        d = entry.model.dim_state
        q = BoundQuery(horizon=0.5, r=2.0, p=2.0, q0=INF, q1=INF,
                       x=[0.4] * d, y=[0.5] * d)
        cert = certificate(entry, q)
        assert not isinstance(cert, NoCertificate), name
        assert math.isfinite(cert.value) and cert.value > 0, name
    for name in ("sir", "brusselator"):
        entry = build_model(name)
        d = entry.model.dim_state
        q = BoundQuery(horizon=0.5, r=3.0, p=3.0, q0=INF, q1=INF,
                       x=[0.4] * d, y=[0.5] * d)
        cert = certificate(entry, q)
        assert not isinstance(cert, NoCertificate), name
        assert math.isfinite(cert.value), name


def test_infeasible_queries_get_no_certificate():
    sir = build_model("sir")
    q = BoundQuery(horizon=0.5, r=2.0, p=2.0, q0=INF, q1=INF,
                   x=[0.4, 0.3, 0.1], y=[0.5, 0.3, 0.1])
    assert isinstance(certificate(sir, q), NoCertificate)  # needs r > 2
    vdp = build_model("van_der_pol")
    q = BoundQuery(horizon=0.5, r=INF, p=INF, q0=INF, q1=INF,
                   x=[0.4, 0.3], y=[0.5, 0.3])
    assert isinstance(certificate(vdp, q), NoCertificate)  # needs finite r


def test_van_der_pol_linear_noise_variant():
    entry = build_model("van_der_pol", {"noise": "linear", "eta1": 0.25,
                                        "alpha": 1.0})
    assert entry.params["eta0"] == 0.0
    sig = entry.model.diffusion(np.array([2.0, 0.5]))
    assert sig[1, 0] == pytest.approx(0.5 * 2.0)
    q = BoundQuery(horizon=0.3, r=2.0, p=2.0, q0=INF, q1=INF,
                   x=[0.4, 0.3], y=[0.5, 0.3])
    cert = certificate(entry, q)
    assert math.isfinite(cert.value)


def test_brusselator_noise_vanishes_on_axes_and_in_sum():
    entry = build_model("brusselator")
    for pt in ([0.0, 1.3], [2.0, 0.0], [0.0, 0.0]):
        sig = entry.model.diffusion(np.asarray(pt, dtype=float))
        assert np.allclose(sig, 0.0)
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rng.uniform(0, 3, 2)
        sig = entry.model.diffusion(x)
        assert abs(float(np.array([1.0, 1.0]) @ sig[:, 0])) < 1e-15


def test_sir_certificate_matches_hand_transcription():
    entry = build_model("sir")
    p = entry.params
    al, be, ga, de = p["alpha"], p["beta"], p["gamma"], p["delta"]
    T, r = 0.5, 3.0
    x = np.array([0.6, 0.3, 0.1])
    y = np.array([0.5, 0.35, 0.15])
    q = BoundQuery(horizon=T, r=r, p=r, q0=math.inf, q1=math.inf, x=x, y=y)
    cert = certificate(entry, q)
    theta = cert.constants_used["theta"]
    sx, sy = x[0] + x[1], y[0] + y[1]
    byhand = (np.linalg.norm(x - y) / (1.0 - theta / r) ** (1.0 / theta)
              * math.exp(be**2 * T * (r - theta) + ga * T
                         + 3.0 * al * T / 4.0 * (2.0 * de * T + sx + sy)
                         + be**2 * T * (r - 1.0) / 2.0
                         * (ga * T + (sx - 1.0) ** 2 + (sy - 1.0) ** 2)))
    assert cert.value == pytest.approx(byhand)


def test_brusselator_certificate_matches_hand_transcription():
    entry = build_model("brusselator")
    pm = entry.params
    al, de, amp = pm["alpha"], pm["delta"], pm["sigma_amp"]
    T, r = 0.5, 3.0
    x = np.array([0.5, 0.5])
    y = np.array([0.6, 0.45])
    q = BoundQuery(horizon=T, r=r, p=r, q0=math.inf, q1=math.inf, x=x, y=y)
    cert = certificate(entry, q)
    c = cert.constants_used
    p_, q_, rho, eps = c["p"], c["q"], c["rho"], c["eps"]
    lip = math.sqrt(2.0) * amp
    assert math.exp(2.0 * rho * T * eps) <= rho / (2.0 * q_ * T)  # side condition
    byhand = (np.linalg.norm(x - y) / math.sqrt(1.0 - 2.0 / p_)
              * math.exp((p_ - 1.0) * T * lip**2 / 2.0
                         + (de**2 * T / eps + 1.0
                            + rho * (x[0] + x[1]) ** 2
                            + rho * (y[0] + y[1]) ** 2) / (2.0 * q_)))
    assert cert.value == pytest.approx(byhand)


def test_brownian_dynamics_certificate_matches_hand_transcription():
    entry = build_model("brownian_dynamics")
    pm = entry.params
    eps, e0 = pm["eps"], pm["eta0"]
    T, r = 0.5, 2.0
    x, y = np.array([1.2]), np.array([1.0])
    q = BoundQuery(horizon=T, r=r, p=r, q0=math.inf, q1=math.inf, x=x, y=y)
    cert = certificate(entry, q)
    c = cert.constants_used
    rho0, rho1, q0, q1, cc = c["rho0"], c["rho1"], c["q0"], c["q1"], c["c"]
    U = lambda u: (u[0] ** 2 - 1.0) ** 2 / 4.0
    byhand = (abs(x[0] - y[0])
              * math.exp(cc * T
                         + (rho0 / q0 + rho1 / q1) * eps * e0 * T / 2.0
                         + rho0 * (U(x) + U(y)) / (2.0 * q0)
                         + rho1 * (U(x) + U(y)) / (2.0 * q1)))
    assert cert.value == pytest.approx(byhand)


def test_langevin_certificate_matches_hand_transcription():
    entry = build_model("langevin")
    pm = entry.params
    g, eps, m = pm["gamma"], pm["eps"], int(pm["m"])
    T, r = 0.5, 2.0
    x = np.array([0.8, 0.2])
    y = np.array([0.9, 0.15])
    q = BoundQuery(horizon=T, r=r, p=r, q0=math.inf, q1=math.inf, x=x, y=y)
    cert = certificate(entry, q)
    c = cert.constants_used
    rho, cc = c["rho"], c["c"]
    U0 = lambda z: rho * ((z[0] ** 2 - 1.0) ** 2 / 4.0 + z[1] ** 2 / 2.0)
    byhand = (np.linalg.norm(x - y)
              * math.exp((cc + 0.5 + rho * eps * m / (4.0 * r)) * T
                         + (U0(x) + U0(y)) / (2.0 * r)))
    assert cert.value == pytest.approx(byhand)

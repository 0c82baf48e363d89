import math

import numpy as np
import pytest

from winding_wavemap import geometry as g
from winding_wavemap.errors import ChartDomainError, ConfigError


@pytest.fixture(scope="module")
def cfg():
    return g.ManifoldConfig()


# ---------------------------------------------------------------------------
# torus metric and chart
# ---------------------------------------------------------------------------


def test_metric_h_at_w0():
    m = g.metric_h(g.TorusPoint(0.0, 0.77)).mat
    assert np.allclose(m, [[math.pi ** 2, 0.0], [0.0, 1.0]], atol=1e-15)


def test_metric_h_at_half():
    # substitute w = 1/2 into the printed matrix: sin(pi/2) = 1
    m = g.metric_h(g.TorusPoint(0.5, 0.1)).mat
    assert np.allclose(m, [[math.pi ** 2, math.pi], [math.pi, 2.0]], atol=1e-14)


def test_metric_h_positive_definite_at_quarter():
    ev = np.linalg.eigvalsh(g.metric_h(g.TorusPoint(0.25, 0.0)).mat)
    assert ev[0] > 0.0 and ev[1] > 0.0


def test_phi_basic_values():
    q = g.phi(g.TorusPoint(0.5, 0.3))
    assert q.x == pytest.approx(-0.3, abs=1e-14)
    assert q.y == 0.3
    q = g.phi(g.TorusPoint(0.25, 0.0))  # cot(pi/4) = 1
    assert q.x == pytest.approx(1.0, abs=1e-14)
    assert q.y == 0.0


def test_phi_domain_error_on_singular_circle():
    with pytest.raises(ChartDomainError):
        g.phi(g.TorusPoint(0.0, 0.0))
    with pytest.raises(ChartDomainError):
        g.phi(g.TorusPoint(1e-15, 0.5))


def test_phi_inv_values():
    p = g.phi_inv(g.ChartPoint(0.0, 0.0))
    assert (p.w, p.z) == (pytest.approx(0.5), pytest.approx(0.0))
    p = g.phi_inv(g.ChartPoint(1.0, 0.0))  # acot(1) = pi/4
    assert p.w == pytest.approx(0.25, abs=1e-14)
    p = g.phi_inv(g.ChartPoint(-0.3, 0.3))
    assert (p.w, p.z) == (pytest.approx(0.5), pytest.approx(0.3))


def test_phi_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = g.TorusPoint(rng.uniform(0.02, 0.98), rng.uniform(0.0, 1.0))
        p2 = g.phi_inv(g.phi(p))
        assert p2.w == pytest.approx(p.w, abs=1e-12)
        assert p2.z == pytest.approx(p.z, abs=1e-12)


def test_chart_round_trip_up_to_identification():
    rng = np.random.default_rng(1)
    for _ in range(100):
        q = g.ChartPoint(rng.uniform(-3, 3), rng.uniform(-3, 3))
        q2 = g.phi(g.phi_inv(q))
        a, b = q.reduced(), q2.reduced()
        assert b.x == pytest.approx(a.x, abs=1e-12)
        assert b.y == pytest.approx(a.y, abs=1e-12)


def test_metric_xy_values():
    assert np.allclose(g.metric_xy(g.ChartPoint(0, 0)).mat, np.eye(2))
    assert np.allclose(g.metric_xy(g.ChartPoint(0, 1)).mat, [[0.25, 0], [0, 1]])


def test_pushforward_identity_random_points():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p = g.TorusPoint(rng.uniform(0.05, 0.45), rng.uniform(0, 1))
        J = g.dphi(p)
        Jinv = np.linalg.inv(J)
        push = Jinv.T @ g.metric_h(p).mat @ Jinv
        assert np.abs(push - g.metric_xy(g.phi(p)).mat).max() < 1e-10


# ---------------------------------------------------------------------------
# geodesic
# ---------------------------------------------------------------------------


def test_gamma_values():
    p = g.gamma(0.0)  # acot(0) = pi/2
    assert (p.w, p.z) == (pytest.approx(0.5), pytest.approx(0.0))
    p = g.gamma(1.0)  # acot(1) = pi/4, 1 mod 1 = 0
    assert (p.w, p.z) == (pytest.approx(0.25), pytest.approx(0.0))
    q = g.gamma_xy(7.25)
    assert (q.x, q.y) == (0.0, 7.25)


def test_gamma_consistent_with_chart():
    for s in (-3.7, -0.2, 0.6, 12.0):
        q = g.phi(g.gamma(s))
        qr, gr = q.reduced(), g.gamma_xy(s).reduced()
        assert qr.x == pytest.approx(gr.x, abs=1e-12)
        assert qr.y == pytest.approx(gr.y, abs=1e-12)


def test_geodesic_residual_zero_on_gamma():
    for s in (-50.0, -1.0, 0.0, 1.0, 10.0, 50.0):
        assert g.geodesic_residual(s) <= 1e-9


def test_geodesic_residual_negative_control():
    res = g.curve_geodesic_residual(lambda s: (0.1 * s * s, s), 1.0)
    assert res > 1e-3


def test_gamma_unit_speed():
    for s0 in (-20.0, 0.0, 5.0):
        assert g.gamma_arc_length(s0, 1.0) == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------------------
# cutoff chi
# ---------------------------------------------------------------------------


def test_chi_plateau_and_band(cfg):
    assert g.chi(g.TorusPoint(0.1, 0.7), cfg) == 1.0
    assert g.chi(g.TorusPoint(0.5, 0.2), cfg) == 0.0
    assert g.chi(g.TorusPoint(0.8, 0.33), cfg) == 1.0
    # whole band w in [7/16, 9/16] is exactly 0
    for w in np.linspace(7 / 16, 9 / 16, 17):
        for z in np.linspace(0, 1, 7, endpoint=False):
            assert g.chi(g.TorusPoint(w, z), cfg) == 0.0


def test_chi_gradient_parallel_on_gamma(cfg):
    # at the geodesic point with w = 0.3 (s = cot(0.3 pi)), finite-difference
    # metric gradient of chi is parallel to the tangent (0, 1)
    s = 1.0 / math.tan(0.3 * math.pi)
    gx, gy = g.fd_grad_chart(lambda x, y: g.chi_vals(x, y, cfg),
                             np.asarray(0.0), np.asarray(s))
    ratio, gnorm = g.metric_alignment_with_gamma(gx, gy, np.asarray(s))
    assert float(gnorm) > 1e-12
    assert float(ratio) <= 1e-8


def test_chi_identification_invariance(cfg):
    rng = np.random.default_rng(3)
    x = rng.uniform(-4, 4, 200)
    y = rng.uniform(-4, 4, 200)
    assert np.abs(g.chi_vals(x, y, cfg) - g.chi_vals(x + 1, y - 1, cfg)).max() <= 1e-14


def test_chi_range(cfg):
    rng = np.random.default_rng(4)
    vals = g.chi_vals(rng.uniform(-3, 3, 5000), rng.uniform(-3, 3, 5000), cfg)
    assert vals.min() >= 0.0 and vals.max() <= 1.0


# ---------------------------------------------------------------------------
# warping function
# ---------------------------------------------------------------------------


def test_f_tilde_values():
    # x = 1/8 kills the sine: sqrt2 * exp(-pi/4) + 1
    expect = math.sqrt(2.0) * math.exp(-math.pi / 4.0) + 1.0
    assert g.f_tilde_xy(g.ChartPoint(0.125, 0.0)) == pytest.approx(expect, rel=1e-14)
    # (0,0): sin(-pi/4) = -sqrt2/2
    assert g.f_tilde_xy(g.ChartPoint(0.0, 0.0)) == pytest.approx(1.0 + math.sqrt(2.0) / 2.0, rel=1e-14)


def test_f_tilde_envelope_to_one():
    ys = (1, 2, 4, 8, 16)
    excess = [float(g.f_tilde_minus_one_vals_chart(0.0, yy)) for yy in ys]
    bounds = [(1.0 + math.sqrt(2)) * math.exp(-2 * math.pi * yy) for yy in ys]
    for e, b in zip(excess, bounds):
        assert 0.0 < e <= b
    # envelope decays monotonically toward f_tilde = 1
    assert all(a > b for a, b in zip(excess, excess[1:]))
    assert g.f_tilde_xy(g.ChartPoint(0.0, 16.0)) == pytest.approx(1.0, abs=1e-12)


def test_f_exact_values(cfg):
    assert g.f(g.TorusPoint(0.0, 0.42), cfg) == 1.0
    for z in (0.0, 0.3, 0.9):
        assert g.f(g.TorusPoint(0.5, z), cfg) == cfg.M


def test_f_pure_branch_band(cfg):
    # 0 < w <= 1/4 branch: value within (1, 1 + exp(-2 pi cot(0.1 pi)) (1+sqrt2)]
    cot = 1.0 / math.tan(0.1 * math.pi)
    hi = 1.0 + math.exp(-2.0 * math.pi * cot) * (1.0 + math.sqrt(2.0))
    for z in np.linspace(0, 1, 11, endpoint=False):
        v = g.f(g.TorusPoint(0.1, z), cfg)
        assert 1.0 < v <= hi


def test_f_lower_bound_sampled(cfg):
    rng = np.random.default_rng(5)
    w = rng.uniform(0, 1, 20000)
    z = rng.uniform(0, 1, 20000)
    vals = g.f_vals_wz(w, z, cfg)
    assert vals.min() >= 1.0 - 1e-12


def test_f_chart_vs_torus(cfg):
    rng = np.random.default_rng(6)
    for _ in range(50):
        p = g.TorusPoint(rng.uniform(0.02, 0.98), rng.uniform(0, 1))
        assert g.f(p, cfg) == pytest.approx(g.f_xy(g.phi(p), cfg), abs=1e-10)


def test_f_identification(cfg):
    rng = np.random.default_rng(7)
    x = rng.uniform(-5, 5, 500)
    y = rng.uniform(-5, 5, 500)
    a = g.f_vals_chart(x, y, cfg)
    b = g.f_vals_chart(x + 1, y - 1, cfg)
    assert (np.abs(a - b) / np.maximum(1.0, np.abs(a))).max() <= 1e-12


def test_f_on_gamma_matches_chart(cfg):
    y = np.linspace(-8, 8, 3001)
    a = g.f_on_gamma(y, cfg)
    b = g.f_vals_chart(np.zeros_like(y), y, cfg)
    assert np.abs(a - b).max() <= 1e-13


# ---------------------------------------------------------------------------
# df/dy along gamma
# ---------------------------------------------------------------------------


def test_dfdy_plateau_zero(cfg):
    for y in (0.0, 0.1, -0.2, 0.24):
        assert g.df_dy_on_gamma(y, cfg) == 0.0


def test_dfdy_pure_branch_value(cfg):
    # derivative of the printed twist profile at y = 2
    expect = -2.0 * math.pi * math.exp(-4.0 * math.pi) * (math.sin(-math.pi / 4.0) + math.sqrt(2.0))
    assert g.df_dy_on_gamma(2.0, cfg) == pytest.approx(expect, rel=1e-12)
    assert expect < 0.0


def test_dfdy_antisymmetry_pure_branch(cfg):
    for y in (1.5, 2.0, 3.3):
        assert g.df_dy_on_gamma(-y, cfg) == pytest.approx(-g.df_dy_on_gamma(y, cfg), rel=1e-12)


def test_dfdy_sign_condition(cfg):
    y = np.linspace(-40, 40, 2001)
    y = y[np.abs(y) > 1e-12]
    d = g.df_dy_on_gamma(y, cfg)
    assert (np.sign(y) * d).max() <= 1e-10


def test_dfdy_matches_fd_of_f(cfg):
    # hybrid evaluator agrees with a plain difference quotient of f(0, .)
    for y in (0.4, 0.7, 0.9, 1.5, 2.5):
        h = 1e-5
        fd = (g.f_on_gamma(y + h, cfg) - g.f_on_gamma(y - h, cfg)) / (2 * h)
        assert g.df_dy_on_gamma(y, cfg) == pytest.approx(fd, rel=1e-5, abs=1e-12)


# ---------------------------------------------------------------------------
# config validation and check suite
# ---------------------------------------------------------------------------


def test_manifold_config_validation():
    with pytest.raises(ConfigError):
        g.ManifoldConfig(M=1.5)
    with pytest.raises(ConfigError):
        g.ManifoldConfig(M=3.0)  # below 2 sup f_tilde ~ 3.38
    with pytest.raises(ConfigError):
        g.ManifoldConfig(eps_bar=0.0)


def test_eps0_value(cfg):
    # min(eps_bar, cot(7 pi/16)/2) with the default eps_bar = 0.5
    assert cfg.eps0 == pytest.approx(0.5 / math.tan(7 * math.pi / 16), rel=1e-12)
    assert cfg.eps0 == pytest.approx(0.09945618, abs=1e-7)
    assert g.ManifoldConfig(eps_bar=0.01).eps0 == 0.01


def test_config_round_trip(cfg):
    assert g.ManifoldConfig.from_dict(cfg.to_dict()) == cfg


def test_geometry_check_suite_fast(cfg):
    results = g.run_geometry_checks(cfg, fast=True)
    failed = [r.check_name for r in results if not r.passed]
    assert failed == []

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from spinlab.analytic import (
    ClosedFormError,
    euler_xz_closed_form,
    analytic_trajectory,
    euler_angles_analytic,
    euler_xz_frequency_form,
    floquet_factors,
    nutation_profile,
    omega_analytic,
    omega_first_order,
    omega_semi_analytic,
    omega_xz_unit_u1_display,
    stm,
)
from spinlab.dynamics import euler_rate, rhs_first_order
from spinlab.integrate import propagate
from spinlab.model import Stability, derive_params, params_from_augmented
from spinlab.presets import EXAMPLE1, EXAMPLE2, FIG4, MARGINAL, UNSTABLE

REGIMES = [FIG4, EXAMPLE1, MARGINAL, UNSTABLE]


def _xz_matrix(tau, p):
    a, b = p.alpha, p.beta
    s2, c2 = math.sin(2 * tau), math.cos(2 * tau)
    return np.array([[a * s2, a * c2 + a + b], [a * c2 - a - b, -a * s2]])


def _first_order_ivp(p, t_eval):
    sol = solve_ivp(lambda t, w: rhs_first_order(t, w, p), (0, t_eval[-1]), [0, 0, 0],
                    method="DOP853", t_eval=t_eval, rtol=1e-12, atol=1e-14)
    return sol.y.T


def test_precession_config_floquet_exponent_matrix():
    _, R = floquet_factors(derive_params(FIG4))
    np.testing.assert_allclose(R, [[0, -1], [0.96117, 0]], atol=1e-5)


@pytest.mark.parametrize("cfg", REGIMES)
def test_stm_solves_homogeneous_system(cfg):
    p = derive_params(cfg)
    for col in range(2):
        sol = solve_ivp(lambda t, w: _xz_matrix(t, p) @ w, (0, 20), np.eye(2)[col],
                        method="DOP853", t_eval=[math.pi, 5.0, 20.0], rtol=1e-12, atol=1e-14)
        for k, t in enumerate(sol.t):
            np.testing.assert_allclose(stm(t, p)[:, col], sol.y[:, k], atol=1e-9)


@pytest.mark.parametrize("cfg", REGIMES)
def test_stm_determinant_is_one(cfg):
    p = derive_params(cfg)
    for t in (0.3, 4.0, 17.0):
        assert np.linalg.det(stm(t, p)) == pytest.approx(1.0, abs=1e-12)


def test_monodromy_eigenvalues_follow_sigma():
    for cfg in (FIG4, EXAMPLE1):
        ev = np.linalg.eigvals(stm(math.pi, derive_params(cfg)))
        np.testing.assert_allclose(np.abs(ev), 1.0, atol=1e-12)
    ev = np.linalg.eigvals(stm(math.pi, derive_params(UNSTABLE)))
    assert np.max(np.abs(ev)) > 1.0


@pytest.mark.parametrize("cfg", REGIMES)
@pytest.mark.parametrize("tau", [math.pi, 7.5, 40.0])
def test_closed_form_matches_quadrature(cfg, tau):
    p = derive_params(cfg)
    np.testing.assert_allclose(omega_first_order(tau, p)[[0, 2]], omega_semi_analytic(tau, p),
                               rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("cfg", REGIMES)
def test_closed_form_matches_first_order_ivp(cfg):
    p = derive_params(cfg)
    t = np.linspace(0, 30, 301)
    np.testing.assert_allclose(omega_first_order(t, p), _first_order_ivp(p, t), atol=1e-7)


def test_precession_config_at_pi_within_1e6():
    p = derive_params(FIG4)
    ref = _first_order_ivp(p, np.array([0.0, math.pi]))[-1]
    assert np.max(np.abs(omega_first_order(math.pi, p) - ref)) < 1e-6


def test_u1_free_display_only_holds_for_unit_u1():
    t = np.linspace(0, 50, 501)
    p = derive_params(FIG4)
    np.testing.assert_allclose(omega_xz_unit_u1_display(t, p), omega_first_order(t, p)[:, [0, 2]],
                               atol=1e-8)
    q = derive_params(EXAMPLE1)
    diff = omega_xz_unit_u1_display(t, q) - omega_first_order(t, q)[:, [0, 2]]
    assert np.max(np.abs(diff)) > 0.1


def test_y_channel_derivative():
    # d/dtau of the closed-form w_y equals the y row evaluated on the closed form
    for cfg in (EXAMPLE2, MARGINAL, UNSTABLE):
        p = derive_params(cfg)
        for t in (0.7, 3.3, 12.0):
            h = 1e-5
            num = (omega_first_order(t + h, p)[1] - omega_first_order(t - h, p)[1]) / (2 * h)
            exact = rhs_first_order(t, omega_first_order(t, p), p)[1]
            assert num == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_marginal_y_channel_value():
    p = derive_params(MARGINAL)
    assert p.u1 == 0.0
    assert omega_first_order(2.0, p)[1] == pytest.approx(0.5 * p.c2 * 4.0, rel=1e-14)


def test_scalar_and_vector_shapes():
    p = derive_params(FIG4)
    assert omega_first_order(1.0, p).shape == (3,)
    assert omega_first_order([0.0, 1.0], p).shape == (2, 3)
    np.testing.assert_array_equal(omega_first_order(0.0, p), 0.0)


def test_omega_analytic_scales_by_gamma():
    p = derive_params(EXAMPLE1)
    g = p.gamma
    np.testing.assert_allclose(omega_analytic(3.0, EXAMPLE1),
                               omega_first_order(3.0, p) * [g, g * g, g], rtol=1e-15)
    with pytest.raises(ClosedFormError):
        omega_analytic(1.0, EXAMPLE1.replace(initial_omega=[1e-4, 0, 0]))


def test_example1_transverse_amplitude_law():
    # |(w_x, w_z)| = |eps| * sqrt(lam^2 sin^2 + u1^2 (1 - cos)^2)
    p = derive_params(EXAMPLE1)
    t = np.linspace(0, 100, 100_001)
    w = omega_analytic(t, EXAMPLE1)
    phi = np.linspace(0, 2 * np.pi, 200_001)
    law = abs(p.epsilon) * np.max(np.sqrt(p.lam**2 * np.sin(phi) ** 2
                                          + p.u1**2 * (1 - np.cos(phi)) ** 2))
    assert np.max(np.hypot(w[:, 0], w[:, 2])) == pytest.approx(law, rel=1e-3)
    # the peak of w_x alone sits below |eps|, near 0.89 |eps|
    assert np.max(np.abs(w[:, 0])) / abs(p.epsilon) == pytest.approx(0.889, abs=0.01)


def test_degenerate_lambda_rejected():
    p = params_from_augmented(100, 100 - 1e-8, 200, gamma=-1e-4)
    with pytest.raises(ClosedFormError, match="degeneracy"):
        omega_first_order(1.0, p)


# ---------------------------------------------------------------- attitude


@pytest.mark.parametrize("cfg", [FIG4, EXAMPLE1, MARGINAL])
def test_euler_closed_form_matches_kinematics_quadrature(cfg):
    p = derive_params(cfg)
    g = p.gamma

    def f(t, th):
        w = omega_first_order(t, p) * [g, g * g, g]
        return euler_rate(th, w)

    t = np.linspace(0, 30, 61)
    sol = solve_ivp(f, (0, 30), [0, 0, 0], method="DOP853", t_eval=t, rtol=1e-12, atol=1e-16)
    th = euler_angles_analytic(t, p)
    scale = np.max(np.abs(sol.y))
    np.testing.assert_allclose(th, sol.y.T, atol=1e-6 * scale)


def test_frequency_form_equals_closed_form():
    for cfg in (FIG4, EXAMPLE1, EXAMPLE2):
        p = derive_params(cfg)
        t = np.linspace(0, 200, 2001)
        a = np.stack(euler_xz_closed_form(t, p))
        b = np.stack(euler_xz_frequency_form(t, p))
        np.testing.assert_allclose(a, b, atol=1e-14)


def test_marginal_angles_at_pi():
    cfg = MARGINAL.replace(ixy=-0.01 * 102)
    p = derive_params(cfg)
    assert p.gamma == pytest.approx(-0.01)
    th = euler_angles_analytic(math.pi, p)
    # th_x = g (sin - tau cos), th_z = g (tau sin + cos - 1)
    assert th[0] == pytest.approx(-0.01 * math.pi, rel=1e-12)
    assert th[2] == pytest.approx(0.02, rel=1e-12)


def test_marginal_radius_grows_linearly():
    cfg = MARGINAL.replace(ixy=-0.01 * 102)
    p = derive_params(cfg)
    t = np.linspace(0, 100, 1001)
    thx, thz = euler_xz_closed_form(t, p)
    r = np.hypot(thx, thz + p.gamma)
    np.testing.assert_allclose(r, abs(p.gamma) * np.sqrt(t**2 + 1), rtol=1e-12)


def test_euler_closed_forms_rejected_when_undefined():
    with pytest.raises(ClosedFormError, match="sigma"):
        euler_angles_analytic(1.0, derive_params(UNSTABLE))
    p = params_from_augmented(100, 200, 100, gamma=-1e-4)
    with pytest.raises(ClosedFormError, match="resonance"):
        euler_angles_analytic(1.0, p)


# ---------------------------------------------------------------- nutation


def test_precession_config_profile_values():
    prof = nutation_profile(derive_params(FIG4))
    assert prof.theta_z0 == pytest.approx(-0.005, abs=1e-15)
    assert math.sqrt(prof.A0) == pytest.approx(5.1015e-3, rel=1e-4)
    assert prof.eps_n == pytest.approx(0.19948, rel=1e-4)
    lam = derive_params(FIG4).lam
    assert sorted(prof.precession_freqs) == pytest.approx(sorted([1 - lam, 1, 1 + lam]))
    assert prof.nutation_freqs == pytest.approx((lam, 2 * lam))


def _circle_residual(p, dtype):
    prof = nutation_profile(p, dtype)
    t = np.linspace(0, 500, 50_001).astype(dtype)
    thx, thz = euler_xz_closed_form(t, p)
    lhs = thx**2 + (thz + prof.theta_z0) ** 2
    return float(np.max(np.abs(lhs - (prof.A0 + prof.radius_variation(t)))) / p.epsilon**2)


@pytest.mark.parametrize("cfg", [FIG4, EXAMPLE1, EXAMPLE2])
def test_circle_identity(cfg):
    p = derive_params(cfg)
    assert _circle_residual(p, np.longdouble) < 1e-12
    # float64 sits at a few ulp of A0, which is ~2.5e3 eps^2 near lam = 1
    assert _circle_residual(p, np.float64) < 1e-11


@pytest.mark.parametrize("cfg", [FIG4, EXAMPLE1, EXAMPLE2])
def test_profile_against_sampling(cfg):
    p = derive_params(cfg)
    prof = nutation_profile(p)
    t = np.linspace(0, 200 * 2 * math.pi / p.lam, 2_000_001)
    A = prof.radius_variation(t)
    assert prof.A_max == pytest.approx(np.max(np.abs(A)), rel=1e-6)
    # A has zero mean, so A0 is the long-run mean squared radius
    thx, thz = euler_xz_closed_form(t, p)
    assert np.mean(thx**2 + (thz + prof.theta_z0) ** 2) == pytest.approx(prof.A0, rel=1e-3)


def test_profile_requires_stable():
    with pytest.raises(ClosedFormError):
        nutation_profile(derive_params(UNSTABLE))


# ------------------------------------------------------------- trajectory


def test_analytic_trajectory_uses_closed_forms():
    traj = analytic_trajectory(FIG4, 50.0, 1e-2)
    p = derive_params(FIG4)
    thx, thz = euler_xz_closed_form(traj.tau, p)
    np.testing.assert_array_equal(traj.euler[:, 0], thx)
    np.testing.assert_array_equal(traj.euler[:, 2], thz)
    assert len(traj) == 5001 and traj.model == "analytic"


def test_analytic_trajectory_close_to_full_model():
    full = propagate(FIG4, "full", 50.0, 1e-2)
    ana = propagate(FIG4, "analytic", 50.0, 1e-2)
    assert np.max(np.abs(full.euler - ana.euler)) < 1e-7
    # quaternion vector part is half the small angles up to second order
    theta = np.max(np.abs(ana.euler))
    np.testing.assert_allclose(ana.quat[:, 1:] * 2, ana.euler, atol=theta**2)


_stable_aug = st.tuples(st.floats(10, 300), st.floats(10, 300), st.floats(10, 300)).filter(
    lambda a: (a[1] - a[0]) * (a[1] - a[2]) > 1e-2 * a[0] * a[2])


@settings(max_examples=30, deadline=None)
@given(_stable_aug, st.floats(0.1, 60.0))
def test_property_closed_form_vs_quadrature(aug, tau):
    p = params_from_augmented(*aug, gamma=-1e-4)
    assert p.stability is Stability.STABLE
    np.testing.assert_allclose(omega_first_order(tau, p)[[0, 2]], omega_semi_analytic(tau, p),
                               rtol=1e-8, atol=1e-8 / p.lam**2)

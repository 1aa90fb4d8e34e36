import math

import numpy as np
import pytest

from spinlab.analysis import (
    Growth,
    dominant_frequencies,
    envelope_at,
    error_report,
    growth_envelope,
    nutation_sweep,
)
from spinlab.analytic import nutation_profile
from spinlab.integrate import Trajectory, propagate
from spinlab.model import derive_params
from spinlab.presets import EXAMPLE1, FIG4, MARGINAL


def _traj(omega, dt=0.1, cfg=FIG4):
    n = len(omega)
    tau = np.arange(n) * dt
    quat = np.tile([1.0, 0, 0, 0], (n, 1))
    return Trajectory(dt, tau, np.asarray(omega, float), quat, np.zeros((n, 3)), cfg)


def test_error_report_hand_values():
    ref = _traj([[3.0, 0, 4.0], [0, 0, 0], [0, 0, 0]])
    test = _traj([[3.0, 0, 4.0], [1.0, 0, 0], [0, 0, 0]])
    rep = error_report(ref, test)
    # one unit deviation, peak reference norm 5, three samples
    assert rep.mre == pytest.approx(1 / 3 / 5)
    assert rep.mse == pytest.approx(1 / 9)
    assert rep.rmse == pytest.approx(1 / 3)
    ss_tot = np.sum((ref.omega - ref.omega.mean(axis=0)) ** 2)
    assert rep.r2 == pytest.approx(1 - 1 / ss_tot)
    assert rep.n_samples == 3


def test_identical_runs_have_zero_error():
    full = propagate(FIG4, "full", 10.0, 1e-2)
    rep = error_report(full, full, 5.0)
    assert rep.mre == 0 and rep.mse == 0 and rep.r2 == 1.0
    assert rep.window == (0.0, 5.0) and rep.n_samples == 501


def test_mismatched_grids_rejected():
    a = propagate(FIG4, "full", 2.0, 1e-2)
    b = propagate(FIG4, "full", 2.0, 2e-2)
    with pytest.raises(ValueError, match="mismatched"):
        error_report(a, b)
    short = propagate(FIG4, "full", 1.0, 1e-2)
    with pytest.raises(ValueError, match="mismatched"):
        error_report(a, short)


def test_zero_variance_reference():
    z = _traj(np.zeros((4, 3)))
    assert error_report(z, z).r2 == 1.0
    assert math.isnan(error_report(z, _traj(np.ones((4, 3)))).r2)


def test_windows_are_monotone_on_example1(example1_runs):
    rows = [error_report(example1_runs["full"], example1_runs["analytic"], w).mre
            for w in (33, 66, 100)]
    assert rows == sorted(rows)


def test_growth_bounded_linear_exponential():
    t = np.arange(0, 400, 0.05)
    osc = np.stack([np.sin(t), np.zeros_like(t), np.cos(t)], 1)
    assert growth_envelope(_traj(osc, 0.05)).kind is Growth.BOUNDED
    lin = osc * (1 + 0.05 * t)[:, None]
    fit = growth_envelope(_traj(lin, 0.05))
    assert fit.kind is Growth.LINEAR and fit.rate == pytest.approx(0.05, rel=1e-2)
    ex = osc * np.exp(0.02 * t)[:, None]
    fit = growth_envelope(_traj(ex, 0.05))
    assert fit.kind is Growth.EXPONENTIAL and fit.rate == pytest.approx(0.02, rel=1e-2)


def test_growth_needs_peaks():
    with pytest.raises(ValueError, match="insufficient peaks"):
        growth_envelope(_traj(np.zeros((100, 3))))


def test_marginal_growth_is_linear(regime_first_runs):
    traj = regime_first_runs["marginal"]
    fit = growth_envelope(traj)
    assert fit.kind is Growth.LINEAR
    # envelope slope of the closed form is |gamma|
    assert fit.rate == pytest.approx(abs(derive_params(MARGINAL).gamma), rel=0.02)
    assert envelope_at(traj, 50.0) / envelope_at(traj, 25.0) == pytest.approx(2.0, rel=0.1)


def test_stable_growth_is_bounded(example1_runs):
    assert growth_envelope(example1_runs["full"]).kind is Growth.BOUNDED


def test_dominant_frequencies_on_synthetic_tones():
    dt = 0.05
    t = np.arange(0, 4000, dt)
    x = np.sin(0.7 * t) + 0.5 * np.sin(1.3 * t + 0.2) + 0.25 * np.cos(2.1 * t)
    f = dominant_frequencies(x, dt, k=3)
    assert f == pytest.approx([0.7, 1.3, 2.1], abs=2 * math.pi / 4000)
    with pytest.raises(ValueError, match="too short"):
        dominant_frequencies(x[:100], dt)


def test_sweep_matches_profile():
    p = derive_params(FIG4)
    rows, skipped = nutation_sweep([p.ixx_aug], [p.iyy], [p.izz_aug], gamma=p.gamma)
    assert skipped == 0 and len(rows) == 1
    assert rows[0].eps_n == pytest.approx(nutation_profile(p).eps_n, rel=1e-14)
    assert rows[0].theta_z0 == pytest.approx(-0.005, rel=1e-12)


def test_sweep_omits_unstable_points():
    rows, skipped = nutation_sweep([100, 150, 200], [50, 150, 300], [100, 150, 200])
    assert len(rows) + skipped == 27
    assert skipped > 0
    assert all(r.sigma < 0 for r in rows)
    with pytest.raises(ValueError, match="empty stable subset"):
        nutation_sweep([100], [150], [200])


def test_nutation_decreases_with_iyy_on_upper_branch():
    iyy = np.linspace(250, 400, 16)
    for xa, za in ((100, 120), (150, 110), (200, 200)):
        rows, _ = nutation_sweep([xa], iyy, [za])
        eps = [r.eps_n for r in rows]
        assert np.all(np.diff(eps) < 0)


def test_nutation_increases_with_ixx_aug_on_upper_branch():
    xa = np.linspace(100, 200, 11)
    for iyy in (250, 300, 400):
        for za in (100, 150, 200):
            rows, _ = nutation_sweep(xa, [iyy], [za])
            assert np.all(np.diff([r.eps_n for r in rows]) > 0)

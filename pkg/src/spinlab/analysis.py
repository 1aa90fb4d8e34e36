"""Trajectory error metrics, growth-regime fitting, spectral peaks and the
nutation-amplitude sweep."""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal, stats

from .analytic import nutation_profile
from .integrate import Trajectory
from .model import Stability, params_from_augmented

__all__ = [
    "ErrorReport",
    "error_report",
    "Growth",
    "GrowthFit",
    "growth_envelope",
    "envelope_at",
    "dominant_frequencies",
    "SweepRow",
    "nutation_sweep",
]


@dataclass(frozen=True)
class ErrorReport:
    """Deviation of a test trajectory's angular velocity from a reference.

    ``mre`` is the mean Euclidean deviation divided by the largest
    Euclidean norm of the reference inside the window (peak-normalized, so
    it stays finite when the rate passes through zero).  ``r2`` pools the
    three components about the per-component reference mean.
    """

    mre: float
    mse: float
    rmse: float
    r2: float
    n_samples: int
    window: tuple[float, float]
    r2_components: tuple[float, float, float]

    def as_row(self):
        return {
            "tau_min": self.window[0],
            "tau_max": self.window[1],
            "n_samples": self.n_samples,
            "mre": self.mre,
            "mse": self.mse,
            "rmse": self.rmse,
            "r2": self.r2,
        }


def _r2(ss_res, ss_tot):
    if ss_tot > 0:
        return 1.0 - ss_res / ss_tot
    return 1.0 if ss_res == 0 else math.nan


def error_report(reference: Trajectory, test: Trajectory, window=None) -> ErrorReport:
    """Compare ``test`` against ``reference`` over ``window``.

    Parameters
    ----------
    reference, test : Trajectory
        Must share ``dt`` and sample times over the window.
    window : float or (float, float), optional
        Upper bound or ``(tau_min, tau_max)``; defaults to the whole
        reference trajectory.
    """
    if not math.isclose(reference.dt, test.dt, rel_tol=1e-12):
        raise ValueError(f"mismatched grids: dt {reference.dt} vs {test.dt}")
    if window is None:
        lo, hi = 0.0, float(reference.tau[-1])
    elif np.ndim(window) == 0:
        lo, hi = 0.0, float(window)
    else:
        lo, hi = (float(v) for v in window)
    m_ref = reference.window(hi, lo)
    m_test = test.window(hi, lo)
    if m_ref.sum() != m_test.sum() or not np.allclose(
        reference.tau[m_ref], test.tau[m_test], rtol=0, atol=1e-9 * reference.dt
    ):
        raise ValueError("mismatched grids: trajectories are not aligned inside the window")
    ref = reference.omega[m_ref]
    tst = test.omega[m_test]
    if ref.shape[0] == 0:
        raise ValueError("window contains no samples")
    diff = tst - ref
    mse = float(np.mean(diff**2))
    dev = np.linalg.norm(diff, axis=1)
    peak = float(np.max(np.linalg.norm(ref, axis=1)))
    if peak > 0:
        mre = float(dev.mean() / peak)
    else:
        mre = 0.0 if not dev.any() else math.inf
    centered = ref - ref.mean(axis=0)
    r2 = _r2(float(np.sum(diff**2)), float(np.sum(centered**2)))
    r2c = tuple(
        _r2(float(np.sum(diff[:, i] ** 2)), float(np.sum(centered[:, i] ** 2)))
        for i in range(3)
    )
    return ErrorReport(mre=mre, mse=mse, rmse=math.sqrt(mse), r2=r2,
                       n_samples=int(ref.shape[0]), window=(lo, hi), r2_components=r2c)


# ------------------------------------------------------------------ growth


class Growth(str, enum.Enum):
    BOUNDED = "Bounded"
    LINEAR = "Linear"
    EXPONENTIAL = "Exponential"


@dataclass(frozen=True)
class GrowthFit:
    kind: Growth
    rate: float = math.nan
    """Slope for ``Linear`` (rate units per tau), exponent for ``Exponential``."""
    r2: float = math.nan
    n_peaks: int = 0


def _envelope_peaks(traj: Trajectory, lo, hi):
    mask = traj.window(hi, lo)
    taus = traj.tau[mask]
    pts = []
    for k in (0, 2):
        x = np.abs(traj.omega[mask, k])
        idx, _ = signal.find_peaks(x)
        pts.extend(zip(taus[idx], x[idx]))
    pts.sort()
    if not pts:
        return np.empty(0), np.empty(0)
    t, v = np.array(pts).T
    keep = v > 0
    return t[keep], v[keep]


def growth_envelope(traj: Trajectory, window=None, min_peaks=10) -> GrowthFit:
    """Classify the growth of the transverse rate ``(w_x, w_z)``.

    Peaks of ``|w_x|`` and ``|w_z|`` form the envelope.  It is
    ``Exponential`` when ``log(peak)`` is linear in tau (R^2 > 0.99, better
    than a straight-line fit and growing by more than e over the window),
    ``Linear`` when the peaks fit ``a*tau + b`` with R^2 > 0.99 and a
    non-trivial trend, and ``Bounded`` when the linear trend is not
    statistically distinguishable from zero or changes the peaks by less
    than 10% across the window.

    Raises
    ------
    ValueError
        Fewer than ``min_peaks`` envelope peaks in the window.
    """
    lo, hi = (0.0, float(traj.tau[-1])) if window is None else window
    t, v = _envelope_peaks(traj, lo, hi)
    if t.size < min_peaks:
        raise ValueError(f"insufficient peaks: found {t.size}, need {min_peaks}")
    span = t[-1] - t[0]
    lin = stats.linregress(t, v)
    r2_lin = lin.rvalue**2
    trend = abs(lin.slope) * span / np.mean(v)
    log = stats.linregress(t, np.log(v))
    r2_log = log.rvalue**2
    if log.slope * span > 1.0 and r2_log > 0.99 and r2_log >= r2_lin:
        return GrowthFit(Growth.EXPONENTIAL, float(log.slope), float(r2_log), int(t.size))
    if lin.pvalue > 0.01 or trend < 0.1:
        return GrowthFit(Growth.BOUNDED, float(lin.slope), float(r2_lin), int(t.size))
    if r2_lin > 0.99:
        return GrowthFit(Growth.LINEAR, float(lin.slope), float(r2_lin), int(t.size))
    if r2_log > r2_lin:
        return GrowthFit(Growth.EXPONENTIAL, float(log.slope), float(r2_log), int(t.size))
    return GrowthFit(Growth.LINEAR, float(lin.slope), float(r2_lin), int(t.size))


def envelope_at(traj: Trajectory, tau, span=2.0 * math.pi):
    """Largest ``|(w_x, w_z)|`` over the trailing rotor period ending at ``tau``."""
    mask = traj.window(tau, tau - span)
    return float(np.max(np.hypot(traj.omega[mask, 0], traj.omega[mask, 2])))


# ---------------------------------------------------------------- spectrum


def dominant_frequencies(series, dt, k=3, min_separation=None):
    """Angular frequencies (rad per tau) of the ``k`` strongest spectral peaks.

    Uses a Hann-windowed periodogram with parabolic interpolation of the
    log power around each peak.  ``min_separation`` (rad per tau, default
    eight bins) suppresses window sidelobes next to a stronger peak.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2048:
        raise ValueError(f"series too short: {n} samples, need at least 2048")
    freqs, power = signal.periodogram(x - x.mean(), fs=1.0 / dt, window="hann",
                                      scaling="spectrum")
    df = freqs[1] - freqs[0]
    sep_bins = 8 if min_separation is None else max(1, int(round(min_separation / (2 * np.pi * df))))
    idx, _ = signal.find_peaks(power, distance=sep_bins)
    idx = idx[np.argsort(power[idx])[::-1][:k]]
    out = []
    for i in idx:
        shift = 0.0
        if 0 < i < power.size - 1 and np.all(power[i - 1:i + 2] > 0):
            a, b, c = np.log(power[i - 1:i + 2])
            denom = a - 2 * b + c
            if denom != 0:
                shift = 0.5 * (a - c) / denom
        out.append(2.0 * np.pi * (freqs[i] + shift * df))
    return out


# ------------------------------------------------------------------- sweep


@dataclass(frozen=True)
class SweepRow:
    ixx_aug: float
    iyy: float
    izz_aug: float
    sigma: float
    lam: float
    eps_n: float
    theta_z0: float


def _parse_axis(values):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("grid axes must be non-empty 1-D sequences")
    return arr


def nutation_sweep(ixx_aug, iyy, izz_aug, gamma=-1e-4, max_workers=None):
    """Relative nutation amplitude over a grid of augmented inertias.

    Parameters
    ----------
    ixx_aug, iyy, izz_aug : sequence of float
        Grid axes (kg*m^2).
    gamma : float
        Perturbation scale; only the precession center depends on it.

    Returns
    -------
    rows : list of SweepRow
        One row per stable, non-resonant grid point, in grid order.
    n_skipped : int
        Grid points left out (sigma >= 0, degenerate or resonant).

    Raises
    ------
    ValueError
        If no grid point is stable ("empty stable subset").
    """
    axes = [_parse_axis(a) for a in (ixx_aug, iyy, izz_aug)]
    points = list(itertools.product(*axes))

    def evaluate(point):
        p = params_from_augmented(*point, gamma=gamma)
        if p.stability is not Stability.STABLE or p.lambda_degenerate or p.resonant:
            return None
        prof = nutation_profile(p)
        return SweepRow(point[0], point[1], point[2], p.sigma, p.lam, prof.eps_n,
                        prof.theta_z0)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(evaluate, points))
    rows = [r for r in results if r is not None]
    if not rows:
        raise ValueError("empty stable subset")
    return rows, len(points) - len(rows)

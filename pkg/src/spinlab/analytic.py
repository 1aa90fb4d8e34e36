"""Closed-form first-order solutions, Floquet factors and precession/nutation.

The x-z subsystem is ``w' = A(tau) w + (sin tau, cos tau)`` with a
pi-periodic ``A``.  With ``P(tau)`` the rotation below and the constant
``R = [[0, u1], [u2, 0]]`` its transition matrix is
``Phi(tau, 0) = P(tau) expm(tau R)``.  Because ``P(s)^-1 (sin s, cos s)``
is the constant ``(0, 1)``, the zero-initial-state forced response reduces
to ``P(tau) v(tau)`` with ``v = int_0^tau expm(s R) ds (0, 1)``; every
closed form here is built from that ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import integrate

from .dynamics import _kinematics_into
from .integrate import Trajectory, integrate_ode, uniform_steps
from .model import DerivedParams, Stability, SystemConfig, derive_params

__all__ = [
    "ClosedFormError",
    "NutationProfile",
    "floquet_factors",
    "stm",
    "omega_first_order",
    "omega_xz_unit_u1_display",
    "omega_semi_analytic",
    "omega_analytic",
    "euler_angles_analytic",
    "euler_xz_closed_form",
    "euler_xz_frequency_form",
    "nutation_profile",
    "analytic_trajectory",
]

_REGIME_CODE = {
    Stability.STABLE: 0,
    Stability.MARGINALLY_UNSTABLE: 1,
    Stability.EXPONENTIALLY_UNSTABLE: 2,
}


class ClosedFormError(ValueError):
    """The requested closed form is undefined for these parameters."""


def _check_closed_form(p: DerivedParams):
    if p.stability is not Stability.MARGINALLY_UNSTABLE and p.lambda_degenerate:
        raise ClosedFormError(
            f"lambda**2={p.lam_sq:.3g} is below the degeneracy threshold; "
            "closed-form amplitudes are undefined"
        )


def floquet_factors(p: DerivedParams):
    """Periodic factor ``P(tau)`` (a callable) and constant matrix ``R``."""

    def P(tau):
        c, s = math.cos(tau), math.sin(tau)
        return np.array([[c, s], [-s, c]])

    R = np.array([[0.0, p.u1], [p.u2, 0.0]])
    return P, R


def _exp_tau_r(tau, p):
    lam = p.lam
    R = np.array([[0.0, p.u1], [p.u2, 0.0]])
    if p.stability is Stability.STABLE:
        return math.cos(lam * tau) * np.eye(2) + (math.sin(lam * tau) / lam) * R
    if p.stability is Stability.EXPONENTIALLY_UNSTABLE:
        return math.cosh(lam * tau) * np.eye(2) + (math.sinh(lam * tau) / lam) * R
    # R is nilpotent when u1*u2 == 0
    return np.eye(2) + tau * R


def stm(tau, p: DerivedParams):
    """Transition matrix ``Phi(tau, 0)`` of the homogeneous x-z system."""
    P, _ = floquet_factors(p)
    return P(float(tau)) @ _exp_tau_r(float(tau), p)


def _v_components(tau, p):
    """``v(tau)``, its two entries, and ``int_0^tau (2 c1 v1 v2 + c2 v2)``."""
    lam, l2, u1 = p.lam, p.lam_sq, p.u1
    if p.stability is Stability.STABLE:
        one_minus_c = 2.0 * np.sin(0.5 * lam * tau) ** 2
        v1 = u1 * one_minus_c / l2
        v2 = np.sin(lam * tau) / lam
        wy = p.c1 * u1 * one_minus_c**2 / l2**2 + p.c2 * one_minus_c / l2
    elif p.stability is Stability.EXPONENTIALLY_UNSTABLE:
        ch_minus_1 = 2.0 * np.sinh(0.5 * lam * tau) ** 2
        v1 = u1 * ch_minus_1 / l2
        v2 = np.sinh(lam * tau) / lam
        wy = p.c1 * u1 * ch_minus_1**2 / l2**2 + p.c2 * ch_minus_1 / l2
    else:
        v1 = 0.5 * u1 * tau**2
        v2 = tau * np.ones_like(tau)
        wy = 0.25 * p.c1 * u1 * tau**4 + 0.5 * p.c2 * tau**2
    return v1, v2, wy


def omega_first_order(tau, p: DerivedParams):
    """Scaled first-order angular velocity ``omega^(1)`` for zero initial rate.

    Parameters
    ----------
    tau : float or array_like
    p : DerivedParams

    Returns
    -------
    ndarray
        ``(3,)`` for scalar ``tau``, else ``(n, 3)``.
    """
    _check_closed_form(p)
    t = np.asarray(tau, dtype=float)
    v1, v2, wy = _v_components(t, p)
    c, s = np.cos(t), np.sin(t)
    wx = c * v1 + s * v2
    wz = -s * v1 + c * v2
    return np.stack([wx, wy, wz], axis=-1)


def omega_xz_unit_u1_display(tau, p: DerivedParams):
    """The alternative stable-regime x-z expression that drops ``u1``.

    It is the exact solution only when ``u1 == -1``.  Kept as a reference
    for that special case; :func:`omega_first_order` is the general form.
    """
    if p.stability is not Stability.STABLE:
        raise ClosedFormError("only defined in the stable regime")
    t = np.asarray(tau, dtype=float)
    lam = p.lam
    c, s = np.cos(t), np.sin(t)
    cl, sl = np.cos(lam * t), np.sin(lam * t)
    wx = (lam * s * sl + c * cl - c) / lam**2
    wz = (lam * c * sl - s * cl + s) / lam**2
    return np.stack([wx, wz], axis=-1)


def omega_semi_analytic(tau, p: DerivedParams, epsabs=1e-12):
    """Forced x-z response by adaptive quadrature of the transition matrix.

    Evaluates ``Phi(tau, 0) int_0^tau Phi(s, 0)^-1 (sin s, cos s) ds``
    with ``scipy.integrate.quad``.

    Raises
    ------
    RuntimeError
        If the quadrature reports non-convergence.
    """
    tau = float(tau)
    if tau == 0.0:
        return np.zeros(2)

    def integrand(s, i):
        phi = stm(s, p)
        # det Phi == 1 (the system matrix is traceless)
        inv = np.array([[phi[1, 1], -phi[0, 1]], [-phi[1, 0], phi[0, 0]]])
        return (inv @ np.array([math.sin(s), math.cos(s)]))[i]

    limit = max(200, int(20 * tau))
    acc = np.empty(2)
    for i in range(2):
        val, err, info = integrate.quad(integrand, 0.0, tau, args=(i,), epsabs=epsabs,
                                        epsrel=1e-13, limit=limit, full_output=True)[:3]
        if err > max(epsabs, 1e-13 * abs(val)) * 10:
            raise RuntimeError(f"quadrature did not converge at tau={tau}: err={err:.3g}")
        acc[i] = val
    return stm(tau, p) @ acc


def omega_analytic(tau, cfg: SystemConfig):
    """Physical first-order rate ``diag(g, g**2, g) * omega^(1)``."""
    if any(cfg.initial_omega):
        raise ClosedFormError("closed forms assume a platform initially at rest")
    p = derive_params(cfg)
    g = p.gamma
    return omega_first_order(tau, p) * np.array([g, g * g, g])


def _stable_coeffs(p, dtype):
    # u1, lam, lam**2, lam**2 - 1, epsilon in the working precision
    f = np.dtype(dtype).type
    u1 = f(p.u1)
    l2 = abs(u1 * f(p.u2))
    prod = f(p.ixx_aug) * f(p.izz_aug)
    l2m1 = -(f(p.sigma) + prod) / prod
    return u1, np.sqrt(l2), l2, l2m1, f(p.gamma) / l2


def euler_xz_closed_form(t, p: DerivedParams):
    """Closed-form ``(th_x, th_z)`` for sigma <= 0.

    Evaluated in the precision of ``t`` when that is wider than float64
    (pass ``np.longdouble`` times for extended precision).
    """
    _check_euler(p)
    t = np.asarray(t)
    dtype = np.result_type(t.dtype, np.float64)
    t = t.astype(dtype, copy=False)
    if p.stability is Stability.STABLE:
        u1, lam, l2, l2m1, eps = _stable_coeffs(p, dtype)
        k = eps / l2m1
        a1 = u1 - l2
        b1 = lam * (u1 - 1)
        c1 = u1 * l2m1
        s, c = np.sin(t), np.cos(t)
        sl, cl = np.sin(lam * t), np.cos(lam * t)
        thx = k * (a1 * s * cl - b1 * c * sl + c1 * s)
        thz = k * (a1 * c * cl + b1 * s * sl + c1 * c - (u1 - 1) * l2)
        return thx, thz
    # marginal: integrals of tau*(sin, cos) and of u1*tau**2/2*(cos, -sin)
    g = p.gamma
    u1 = p.u1
    s, c = np.sin(t), np.cos(t)
    thx = g * ((s - t * c) + 0.5 * u1 * (t * t * s + 2.0 * t * c - 2.0 * s))
    thz = g * ((t * s + c - 1.0) - 0.5 * u1 * (-t * t * c + 2.0 * t * s + 2.0 * c - 2.0))
    return thx, thz


def _check_euler(p):
    _check_closed_form(p)
    if p.stability is Stability.EXPONENTIALLY_UNSTABLE:
        raise ClosedFormError("Euler-angle closed forms exist only for sigma <= 0")
    if p.resonant:
        raise ClosedFormError("lambda == 1 resonance: Euler-angle closed forms are singular")


def euler_xz_frequency_form(tau, p: DerivedParams):
    """Stable-regime ``(th_x, th_z)`` written as a sum of tones at
    ``1 + lam``, ``1 - lam`` and ``1``.

    Expanding the products in the closed form puts the coefficient ``a`` on
    the ``1 + lam`` tone of both angles.
    """
    _check_euler(p)
    if p.stability is not Stability.STABLE:
        raise ClosedFormError("only defined in the stable regime")
    t = np.asarray(tau, dtype=float)
    lam, l2, u1 = p.lam, p.lam_sq, p.u1
    k = p.epsilon / (2.0 * (l2 - 1.0))
    a = -l2 + u1 - lam * u1 + lam
    b = -l2 + u1 + lam * u1 - lam
    thx = k * (a * np.sin((1 + lam) * t) + b * np.sin((1 - lam) * t)
               + 2 * u1 * (l2 - 1) * np.sin(t))
    thz = k * (a * np.cos((1 + lam) * t) + b * np.cos((1 - lam) * t)
               + 2 * u1 * (l2 - 1) * np.cos(t) - 2 * (u1 - 1) * l2)
    return thx, thz


def _theta_y(t, p, rtol=1e-12):
    # th_y' = g**2 w_y + th_y * g w_z, th_y(0) = 0
    g = p.gamma
    t = np.atleast_1d(t)
    if g == 0.0 or t.size == 0:
        return np.zeros_like(t)
    order = np.argsort(t)
    ts = t[order]

    def f(tau, y):
        w = omega_first_order(tau, p)
        return [g * g * w[1] + y[0] * g * w[2]]

    t_end = float(ts[-1])
    if t_end <= 0.0:
        return np.zeros_like(t)
    sol = integrate.solve_ivp(f, (0.0, t_end), [0.0], method="DOP853", t_eval=ts,
                              rtol=rtol, atol=1e-18 + abs(g) ** 3 * 1e-12)
    if not sol.success:
        raise RuntimeError(f"theta_y quadrature failed: {sol.message}")
    out = np.empty_like(t)
    out[order] = sol.y[0]
    return out


def euler_angles_analytic(tau, p: DerivedParams):
    """Small-angle Euler angles ``(th_x, th_y, th_z)`` from the closed forms.

    ``th_x`` and ``th_z`` are closed-form; ``th_y`` integrates the closed-form
    ``w_y`` through the small-angle kinematics.  Defined for sigma <= 0 away
    from the ``lam == 1`` resonance.
    """
    _check_euler(p)
    t = np.asarray(tau, dtype=float)
    thx, thz = euler_xz_closed_form(t, p)
    thy = _theta_y(np.atleast_1d(t), p).reshape(t.shape)
    return np.stack([thx, thy, thz], axis=-1)


@dataclass(frozen=True)
class NutationProfile:
    """Precession circle and nutation of the stable-regime spin axis.

    The spin axis traces ``th_x**2 + (th_z + theta_z0)**2 = A0 + A(tau)``
    with ``A(tau) = a_2lam cos(2 lam tau) + a_lam cos(lam tau)``.
    ``A0`` is the squared mean precession radius.
    """

    theta_z0: float
    A0: float
    A_max: float
    eps_n: float
    a_2lam: float
    a_lam: float
    lam: float
    precession_freqs: tuple[float, float, float]
    nutation_freqs: tuple[float, float]

    def radius_variation(self, tau):
        tau = np.asarray(tau)
        lt = self.lam * tau.astype(np.result_type(tau.dtype, np.float64), copy=False)
        return self.a_2lam * np.cos(2.0 * lt) + self.a_lam * np.cos(lt)

    def radius(self, tau):
        return np.sqrt(self.A0 + self.radius_variation(tau))


def nutation_profile(p: DerivedParams, dtype=np.float64) -> NutationProfile:
    """Precession center, mean radius and nutation of the stable regime.

    ``dtype=np.longdouble`` evaluates everything in extended precision,
    matching :func:`euler_angles_analytic` fed long-double times.
    """
    if p.stability is not Stability.STABLE:
        raise ClosedFormError("precession/nutation profile needs sigma < 0")
    _check_euler(p)
    u1, lam, l2, l2m1, eps = _stable_coeffs(p, dtype)
    scale = eps**2 / l2m1**2
    A0 = scale * (((u1 - l2) ** 2 + l2 * (u1 - 1) ** 2) / 2 + u1**2 * l2m1**2)
    a2 = scale * ((u1 - l2) ** 2 - l2 * (u1 - 1) ** 2) / 2
    a1 = scale * 2 * u1 * l2m1 * (u1 - l2)
    # A = a2 (2x^2 - 1) + a1 x with x = cos(lam tau) in [-1, 1]
    candidates = [1, -1]
    if a2 != 0:
        x_star = -a1 / (4 * a2)
        if -1 <= x_star <= 1:
            candidates.append(x_star)
    A_max = max(abs(a2 * (2 * x * x - 1) + a1 * x) for x in candidates)
    theta_z0 = np.dtype(dtype).type(p.gamma) * (u1 - 1) / l2m1
    return NutationProfile(
        theta_z0=theta_z0,
        A0=A0,
        A_max=A_max,
        eps_n=np.sqrt(abs(A_max / A0)),
        a_2lam=a2,
        a_lam=a1,
        lam=lam,
        precession_freqs=(1 + lam, 1 - lam, np.dtype(dtype).type(1)),
        nutation_freqs=(lam, 2 * lam),
    )


# ---------------------------------------------------------------- trajectories


@njit(cache=True)
def _omega_closed_kernel(tau, pa):
    # pa = [u1, lam, c1, c2, gamma, regime, lam**2]; returns physical omega
    u1, lam, c1, c2, g, regime, l2 = pa[0], pa[1], pa[2], pa[3], pa[4], pa[5], pa[6]
    if regime == 0.0:
        omc = 2.0 * math.sin(0.5 * lam * tau) ** 2
        v1 = u1 * omc / l2
        v2 = math.sin(lam * tau) / lam
        wy = c1 * u1 * omc**2 / (l2 * l2) + c2 * omc / l2
    elif regime == 2.0:
        chm = 2.0 * math.sinh(0.5 * lam * tau) ** 2
        v1 = u1 * chm / l2
        v2 = math.sinh(lam * tau) / lam
        wy = c1 * u1 * chm**2 / (l2 * l2) + c2 * chm / l2
    else:
        v1 = 0.5 * u1 * tau * tau
        v2 = tau
        wy = 0.25 * c1 * u1 * tau**4 + 0.5 * c2 * tau * tau
    c = math.cos(tau)
    s = math.sin(tau)
    out = np.empty(3)
    out[0] = g * (c * v1 + s * v2)
    out[1] = g * g * wy
    out[2] = g * (-s * v1 + c * v2)
    return out


@njit(cache=True)
def _analytic_kinematics_kernel(tau, y, pa):
    w = _omega_closed_kernel(tau, pa)
    dy = np.zeros(10)
    _kinematics_into(dy, y, w)
    return dy


def analytic_trajectory(cfg: SystemConfig, tau_end, dt):
    """Closed-form angular velocity on the uniform grid, with attitude.

    The quaternion and ``th_y`` integrate the small-angle/quaternion
    kinematics driven by the closed-form rate; ``th_x``/``th_z`` use their
    closed forms when those exist (sigma <= 0, no resonance).
    """
    if any(cfg.initial_omega):
        raise ClosedFormError("closed forms assume a platform initially at rest")
    p = derive_params(cfg)
    _check_closed_form(p)
    n, _ = uniform_steps(tau_end, dt)
    pa = np.array([p.u1, p.lam, p.c1, p.c2, p.gamma, float(_REGIME_CODE[p.stability]),
                   p.lam_sq])
    y0 = np.zeros(10)
    y0[3] = 1.0
    taus, ys = integrate_ode(_analytic_kinematics_kernel, y0, tau_end, dt, args=pa,
                             quat_index=3)
    taus, ys = taus[: n + 1], ys[: n + 1]
    g = p.gamma
    omega = omega_first_order(taus, p) * np.array([g, g * g, g])
    euler = ys[:, 7:10].copy()
    if p.stability is not Stability.EXPONENTIALLY_UNSTABLE and not p.resonant:
        euler[:, 0], euler[:, 2] = euler_xz_closed_form(taus, p)
    return Trajectory(
        dt=float(dt),
        tau=taus.copy(),
        omega=omega,
        quat=ys[:, 3:7].copy(),
        euler=euler,
        config=cfg,
        meta={"model": "analytic", "integrator": "closed-form+rk4-kinematics",
              "dt": float(dt), "tau_end": float(tau_end)},
    )

"""Right-hand sides: rotor inertia, full nonlinear dynamics, first-order
system and attitude kinematics.

The ``*_kernel`` functions are numba-compiled and work on flat float
arrays so the integrator can run them without Python overhead.  The public
functions wrap them with validation and friendlier argument types.

Parameter-array layouts used by the kernels:

* full model:  ``[ixx, iyy, izz, ixy, ibr, iby]``
* first order: ``[alpha, beta, c1, c2, gamma]``

State layout used by the propagation kernels (10 entries):
``[wx, wy, wz, qw, qx, qy, qz, th_x, th_y, th_z]``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .model import DerivedParams, SpinInertia, SystemConfig

__all__ = [
    "OMEGA0",
    "rotor_rotation",
    "rotor_rotation_rate",
    "spin_inertia_at",
    "rhs_full",
    "rhs_first_order",
    "euler_rate",
    "quaternion_rate",
    "quat_to_matrix",
    "quat_multiply",
    "angular_momentum_body",
    "angular_momentum_inertial",
    "full_params",
    "first_order_params",
    "SingularInertiaError",
]

#: dimensionless rotor rate direction in the platform frame
OMEGA0 = np.array([0.0, 1.0, 0.0])

_MAX_CONDITION = 1e12


class SingularInertiaError(ValueError):
    """The total inertia ``I1 + IB`` is numerically singular."""


def full_params(cfg: SystemConfig):
    s, b = cfg.spin, cfg.platform
    return np.array([s.ixx, s.iyy, s.izz, s.ixy, b.ibr, b.iby], dtype=float)


def first_order_params(p: DerivedParams):
    return np.array([p.alpha, p.beta, p.c1, p.c2, p.gamma], dtype=float)


def rotor_rotation(tau):
    """Rotation from rotor basis to platform basis (about y by ``tau``)."""
    c, s = math.cos(tau), math.sin(tau)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotor_rotation_rate(tau):
    """d/dtau of :func:`rotor_rotation`."""
    c, s = math.cos(tau), math.sin(tau)
    return np.array([[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]])


def spin_inertia_at(tau, spin: SpinInertia):
    """Equivalent spin inertia ``I1(tau)`` and its tau-derivative.

    Returns
    -------
    I1, I1dot : (3, 3) ndarray
        ``T C T^T`` and ``T' C T^T + T C T'^T`` with ``C`` the constant
        rotor-basis tensor.
    """
    T = rotor_rotation(tau)
    Td = rotor_rotation_rate(tau)
    C = spin.matrix()
    return T @ C @ T.T, Td @ C @ T.T + T @ C @ Td.T


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _inertia_terms(tau, ixx, iyy, izz, ixy):
    # explicit entries of T C T^T and its derivative
    c = math.cos(tau)
    s = math.sin(tau)
    c2 = math.cos(2.0 * tau)
    s2 = math.sin(2.0 * tau)
    i1 = np.empty((3, 3))
    i1[0, 0] = c * c * ixx + s * s * izz
    i1[0, 1] = c * ixy
    i1[0, 2] = c * s * (izz - ixx)
    i1[1, 1] = iyy
    i1[1, 2] = -s * ixy
    i1[2, 2] = s * s * ixx + c * c * izz
    i1[1, 0] = i1[0, 1]
    i1[2, 0] = i1[0, 2]
    i1[2, 1] = i1[1, 2]
    d = np.empty((3, 3))
    d[0, 0] = s2 * (izz - ixx)
    d[0, 1] = -s * ixy
    d[0, 2] = c2 * (izz - ixx)
    d[1, 1] = 0.0
    d[1, 2] = -c * ixy
    d[2, 2] = s2 * (ixx - izz)
    d[1, 0] = d[0, 1]
    d[2, 0] = d[0, 2]
    d[2, 1] = d[1, 2]
    return i1, d


@njit(cache=True)
def _solve3(a, b):
    # adjugate inverse; a is symmetric positive definite here
    c00 = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    c01 = a[1, 2] * a[2, 0] - a[1, 0] * a[2, 2]
    c02 = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    c10 = a[0, 2] * a[2, 1] - a[0, 1] * a[2, 2]
    c11 = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    c12 = a[0, 1] * a[2, 0] - a[0, 0] * a[2, 1]
    c20 = a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]
    c21 = a[0, 2] * a[1, 0] - a[0, 0] * a[1, 2]
    c22 = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    det = a[0, 0] * c00 + a[0, 1] * c01 + a[0, 2] * c02
    x = np.empty(3)
    x[0] = (c00 * b[0] + c10 * b[1] + c20 * b[2]) / det
    x[1] = (c01 * b[0] + c11 * b[1] + c21 * b[2]) / det
    x[2] = (c02 * b[0] + c12 * b[1] + c22 * b[2]) / det
    return x


@njit(cache=True)
def full_omega_rate_kernel(tau, w, p):
    """d(omega_hat)/dtau of the full nonlinear torque-free model."""
    ixx, iyy, izz, ixy, ibr, iby = p[0], p[1], p[2], p[3], p[4], p[5]
    i1, i1d = _inertia_terms(tau, ixx, iyy, izz, ixy)
    wx, wy, wz = w[0], w[1], w[2]
    # total spin rate seen by the rotor: omega + Omega0
    vx, vy, vz = wx, wy + 1.0, wz
    h1x = i1[0, 0] * vx + i1[0, 1] * vy + i1[0, 2] * vz
    h1y = i1[1, 0] * vx + i1[1, 1] * vy + i1[1, 2] * vz
    h1z = i1[2, 0] * vx + i1[2, 1] * vy + i1[2, 2] * vz
    hbx, hby, hbz = ibr * wx, iby * wy, ibr * wz
    hx = hbx + h1x
    hy = hby + h1y
    hz = hbz + h1z
    rhs = np.empty(3)
    rhs[0] = i1d[0, 0] * vx + i1d[0, 1] * vy + i1d[0, 2] * vz + (wy * hz - wz * hy)
    rhs[1] = i1d[1, 0] * vx + i1d[1, 1] * vy + i1d[1, 2] * vz + (wz * hx - wx * hz)
    rhs[2] = i1d[2, 0] * vx + i1d[2, 1] * vy + i1d[2, 2] * vz + (wx * hy - wy * hx)
    i2 = i1.copy()
    i2[0, 0] += ibr
    i2[1, 1] += iby
    i2[2, 2] += ibr
    out = _solve3(i2, rhs)
    return -out


@njit(cache=True)
def first_order_rate_kernel(tau, w1, p):
    """Rate of the scaled first-order variables ``omega^(1)``."""
    alpha, beta, c1, c2 = p[0], p[1], p[2], p[3]
    x, y, z = w1[0], w1[1], w1[2]
    s, c = math.sin(tau), math.cos(tau)
    s2, c2t = math.sin(2.0 * tau), math.cos(2.0 * tau)
    out = np.empty(3)
    out[0] = alpha * s2 * x + (alpha * c2t + (alpha + beta)) * z + s
    out[1] = c1 * (2.0 * c2t * x * z + s2 * (x * x - z * z)) + c2 * (s * x + c * z)
    out[2] = (alpha * c2t - (alpha + beta)) * x - alpha * s2 * z + c
    return out


@njit(cache=True)
def quaternion_rate_kernel(q, w):
    # 0.5 * q (x) (0, w), scalar-first
    qw, qx, qy, qz = q[0], q[1], q[2], q[3]
    a, b, c = w[0], w[1], w[2]
    out = np.empty(4)
    out[0] = 0.5 * (-qx * a - qy * b - qz * c)
    out[1] = 0.5 * (qw * a + qy * c - qz * b)
    out[2] = 0.5 * (qw * b - qx * c + qz * a)
    out[3] = 0.5 * (qw * c + qx * b - qy * a)
    return out


@njit(cache=True)
def euler_rate_kernel(theta, w):
    out = np.empty(3)
    out[0] = w[0]
    out[1] = w[1] + theta[1] * w[2]
    out[2] = w[2]
    return out


@njit(cache=True)
def _kinematics_into(dy, y, w):
    qd = quaternion_rate_kernel(y[3:7], w)
    ed = euler_rate_kernel(y[7:10], w)
    for i in range(4):
        dy[3 + i] = qd[i]
    for i in range(3):
        dy[7 + i] = ed[i]


@njit(cache=True)
def full_state_kernel(tau, y, p):
    """Full model angular velocity plus quaternion and small-angle kinematics."""
    w = y[0:3]
    dy = np.empty(10)
    wd = full_omega_rate_kernel(tau, w, p)
    dy[0], dy[1], dy[2] = wd[0], wd[1], wd[2]
    _kinematics_into(dy, y, w)
    return dy


@njit(cache=True)
def first_order_state_kernel(tau, y, p):
    """First-order model; kinematics use ``diag(g, g**2, g) * omega^(1)``."""
    g = p[4]
    w1 = y[0:3]
    dy = np.empty(10)
    wd = first_order_rate_kernel(tau, w1, p)
    dy[0], dy[1], dy[2] = wd[0], wd[1], wd[2]
    w = np.empty(3)
    w[0] = g * w1[0]
    w[1] = g * g * w1[1]
    w[2] = g * w1[2]
    _kinematics_into(dy, y, w)
    return dy


# ---------------------------------------------------------------- wrappers


def rhs_full(tau, omega, cfg: SystemConfig):
    """Full nonlinear dimensionless attitude equation.

    Raises
    ------
    SingularInertiaError
        If ``I1(tau) + IB`` has condition number above 1e12.
    """
    I1, _ = spin_inertia_at(tau, cfg.spin)
    I2 = I1 + cfg.platform.matrix()
    if np.linalg.cond(I2) > _MAX_CONDITION:
        raise SingularInertiaError("total inertia I1 + IB is numerically singular")
    w = np.asarray(omega, dtype=float)
    return full_omega_rate_kernel(float(tau), w, full_params(cfg))


def rhs_first_order(tau, w1, p: DerivedParams):
    return first_order_rate_kernel(float(tau), np.asarray(w1, dtype=float),
                                   first_order_params(p))


def euler_rate(theta, omega):
    """Small-angle Z-Y-X Euler-angle rates."""
    return euler_rate_kernel(np.asarray(theta, dtype=float), np.asarray(omega, dtype=float))


def quaternion_rate(quat, omega):
    """Scalar-first quaternion rate for body-frame angular velocity ``omega``."""
    return quaternion_rate_kernel(np.asarray(quat, dtype=float), np.asarray(omega, dtype=float))


def quat_multiply(q, r):
    w0, x0, y0, z0 = q
    w1, x1, y1, z1 = r
    return np.array([
        w0 * w1 - x0 * x1 - y0 * y1 - z0 * z1,
        w0 * x1 + x0 * w1 + y0 * z1 - z0 * y1,
        w0 * y1 - x0 * z1 + y0 * w1 + z0 * x1,
        w0 * z1 + x0 * y1 - y0 * x1 + z0 * w1,
    ])


def quat_to_matrix(q):
    """Rotation matrix(es) taking platform-frame vectors to the inertial frame.

    Accepts a single quaternion ``(4,)`` or a stack ``(n, 4)``.
    """
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    R = np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
    ], -2)
    return R


def angular_momentum_body(tau, omega, cfg: SystemConfig):
    """Platform-frame momentum ``IB w + I1 (w + Omega0)``, vectorized over tau.

    Units are kg*m^2 per unit tau; multiply by ``omega_mag`` for SI.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    s, b = cfg.spin, cfg.platform
    c, sn = np.cos(tau), np.sin(tau)
    vx, vy, vz = omega[:, 0], omega[:, 1] + 1.0, omega[:, 2]
    i00 = c * c * s.ixx + sn * sn * s.izz
    i01 = c * s.ixy
    i02 = c * sn * (s.izz - s.ixx)
    i12 = -sn * s.ixy
    i22 = sn * sn * s.ixx + c * c * s.izz
    hx = b.ibr * omega[:, 0] + i00 * vx + i01 * vy + i02 * vz
    hy = b.iby * omega[:, 1] + i01 * vx + s.iyy * vy + i12 * vz
    hz = b.ibr * omega[:, 2] + i02 * vx + i12 * vy + i22 * vz
    return np.stack([hx, hy, hz], axis=-1)


def angular_momentum_inertial(tau, omega, quat, cfg: SystemConfig):
    """Inertial-frame angular momentum; constant for the torque-free system."""
    hb = angular_momentum_body(tau, omega, cfg)
    R = quat_to_matrix(np.atleast_2d(quat))
    return np.einsum("nij,nj->ni", R, hb)

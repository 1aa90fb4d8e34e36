"""Fixed-step RK4 integration and trajectory propagation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from numba.core.registry import CPUDispatcher

from . import dynamics
from .model import SystemConfig, derive_params

__all__ = [
    "Model",
    "BodyState",
    "Trajectory",
    "IntegrationBlowUp",
    "integrate_ode",
    "propagate",
    "uniform_steps",
    "DEFAULT_DT",
    "BLOWUP_LIMIT",
]

DEFAULT_DT = 1e-3
BLOWUP_LIMIT = 1e12


class Model(str, enum.Enum):
    FULL = "full"
    FIRST_ORDER = "first"
    ANALYTIC = "analytic"


class IntegrationBlowUp(RuntimeError):
    """A state component exceeded :data:`BLOWUP_LIMIT` during integration."""

    def __init__(self, tau):
        self.tau = float(tau)
        super().__init__(
            f"state exceeded {BLOWUP_LIMIT:g} at tau={self.tau:.6g}; "
            "the run diverged (exponentially unstable configuration?)"
        )


@dataclass(frozen=True)
class BodyState:
    tau: float
    omega: np.ndarray
    quat: np.ndarray
    euler: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled attitude history.

    Arrays are indexed by sample: ``omega`` is ``(n, 3)`` dimensionless
    platform rate, ``quat`` is ``(n, 4)`` scalar-first platform-to-inertial
    quaternion, ``euler`` is ``(n, 3)`` small-angle ``(th_x, th_y, th_z)``.
    """

    dt: float
    tau: np.ndarray
    omega: np.ndarray
    quat: np.ndarray
    euler: np.ndarray
    config: SystemConfig
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tau", "omega", "quat", "euler"):
            getattr(self, name).setflags(write=False)

    def __len__(self):
        return self.tau.shape[0]

    def __getitem__(self, i):
        return BodyState(float(self.tau[i]), self.omega[i], self.quat[i], self.euler[i])

    @property
    def model(self):
        return self.meta.get("model")

    def momentum(self):
        """Inertial-frame angular momentum at every sample (kg*m^2/s)."""
        h = dynamics.angular_momentum_inertial(self.tau, self.omega, self.quat, self.config)
        return h * self.config.omega_mag

    def decimate(self, stride):
        """Every ``stride``-th sample, as a new trajectory with spacing ``stride * dt``."""
        stride = int(stride)
        if stride < 1:
            raise ValueError("stride must be >= 1")
        sl = slice(None, None, stride)
        meta = dict(self.meta, stride=stride)
        return Trajectory(self.dt * stride, self.tau[sl].copy(), self.omega[sl].copy(),
                          self.quat[sl].copy(), self.euler[sl].copy(), self.config, meta)

    def window(self, tau_max=None, tau_min=0.0):
        """Boolean mask of samples with ``tau_min <= tau <= tau_max``."""
        hi = self.tau[-1] if tau_max is None else tau_max
        eps = 1e-9 * self.dt
        return (self.tau >= tau_min - eps) & (self.tau <= hi + eps)


def uniform_steps(tau_end, dt):
    """Number of whole ``dt`` steps in ``[0, tau_end]`` and the leftover step."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if not (tau_end > 0 and math.isfinite(tau_end)):
        raise ValueError(f"tau_end must be > 0, got {tau_end!r}")
    n = int(math.floor(tau_end / dt + 1e-9))
    rest = tau_end - n * dt
    if rest <= 1e-9 * dt:
        rest = 0.0
    return n, rest


# not cached: numba's on-disk cache cannot key on function-typed arguments
@njit(nogil=True)
def _rk4_kernel(rhs, y0, args, n_steps, dt, last_dt, q0, limit):
    n_out = n_steps + 1
    if last_dt > 0.0:
        n_out += 1
    out = np.empty((n_out, y0.size))
    taus = np.empty(n_out)
    y = y0.copy()
    out[0] = y
    taus[0] = 0.0
    for k in range(n_out - 1):
        t = k * dt
        h = dt if k < n_steps else last_dt
        k1 = rhs(t, y, args)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, args)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, args)
        k4 = rhs(t + h, y + h * k3, args)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if q0 >= 0:
            nq = math.sqrt(y[q0] ** 2 + y[q0 + 1] ** 2 + y[q0 + 2] ** 2 + y[q0 + 3] ** 2)
            for i in range(4):
                y[q0 + i] /= nq
        for i in range(y.size):
            if not abs(y[i]) <= limit:
                return taus[: k + 1], out[: k + 1], k + 1
        out[k + 1] = y
        taus[k + 1] = t + h
    return taus, out, -1


def _rk4_python(rhs, y0, n_steps, dt, last_dt, q0, limit):
    n_out = n_steps + 1 + (1 if last_dt > 0 else 0)
    out = np.empty((n_out, y0.size))
    taus = np.empty(n_out)
    y = y0.copy()
    out[0] = y
    taus[0] = 0.0
    for k in range(n_out - 1):
        t = k * dt
        h = dt if k < n_steps else last_dt
        k1 = np.asarray(rhs(t, y), dtype=float)
        k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(rhs(t + h, y + h * k3), dtype=float)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if q0 >= 0:
            y[q0:q0 + 4] /= np.linalg.norm(y[q0:q0 + 4])
        if not np.all(np.abs(y) <= limit):
            return taus[: k + 1], out[: k + 1], k + 1
        out[k + 1] = y
        taus[k + 1] = t + h
    return taus, out, -1


def integrate_ode(rhs, y0, tau_end, dt, args=None, quat_index=None):
    """Classical fixed-step fourth-order Runge-Kutta.

    Parameters
    ----------
    rhs : callable
        ``rhs(tau, y)`` or, when ``args`` is given, ``rhs(tau, y, args)``.
        A numba-compiled ``rhs`` together with an ``args`` array runs the
        whole loop in compiled code.
    y0 : array_like
        Initial state at ``tau = 0``.
    tau_end, dt : float
        End time and step.  Samples are taken at every ``k * dt``; if
        ``tau_end`` is not a multiple of ``dt`` a final partial step lands
        exactly on ``tau_end``.
    args : ndarray, optional
        Extra parameter array passed to ``rhs``.
    quat_index : int, optional
        Start index of a quaternion block in the state, renormalized after
        every step.

    Returns
    -------
    taus : (n,) ndarray
    ys : (n, len(y0)) ndarray

    Raises
    ------
    IntegrationBlowUp
        If any state component exceeds 1e12 (or becomes non-finite).
    """
    n_steps, last_dt = uniform_steps(tau_end, dt)
    y0 = np.array(y0, dtype=float, ndmin=1)
    q0 = -1 if quat_index is None else int(quat_index)
    if isinstance(rhs, CPUDispatcher) and args is not None:
        taus, ys, fail = _rk4_kernel(rhs, y0, np.asarray(args, dtype=float),
                                     n_steps, float(dt), float(last_dt), q0, BLOWUP_LIMIT)
    else:
        f = rhs if args is None else (lambda t, y: rhs(t, y, args))
        taus, ys, fail = _rk4_python(f, y0, n_steps, float(dt), float(last_dt), q0, BLOWUP_LIMIT)
    if fail >= 0:
        tau_fail = fail * dt if fail <= n_steps else tau_end
        raise IntegrationBlowUp(tau_fail)
    return taus, ys


def _initial_state(w0):
    y0 = np.zeros(10)
    y0[0:3] = w0
    y0[3] = 1.0
    return y0


def propagate(cfg: SystemConfig, model="full", tau_end=100.0, dt=DEFAULT_DT):
    """Integrate angular velocity, quaternion and small-angle Euler angles.

    ``model`` is ``"full"`` for the nonlinear equation or ``"first"`` for the
    first-order reduced system; the latter stores the physical
    reconstruction ``diag(g, g**2, g) * omega^(1)`` as ``omega``.

    Only the uniform grid ``k * dt`` is kept, so a trailing partial step is
    dropped from the returned trajectory.
    """
    model = Model(model)
    if model is Model.ANALYTIC:
        from .analytic import analytic_trajectory

        return analytic_trajectory(cfg, tau_end, dt)
    w0 = np.asarray(cfg.initial_omega, dtype=float)
    p = derive_params(cfg)
    if model is Model.FULL:
        rhs, args = dynamics.full_state_kernel, dynamics.full_params(cfg)
        y0 = _initial_state(w0)
    else:
        rhs, args = dynamics.first_order_state_kernel, dynamics.first_order_params(p)
        g = p.gamma
        if np.any(w0 != 0.0):
            if g == 0.0:
                raise ValueError("first-order model needs gamma != 0 for a nonzero initial_omega")
            w0 = w0 / np.array([g, g * g, g])
        y0 = _initial_state(w0)
    taus, ys = integrate_ode(rhs, y0, tau_end, dt, args=args, quat_index=3)
    n_uniform, _ = uniform_steps(tau_end, dt)
    taus, ys = taus[: n_uniform + 1], ys[: n_uniform + 1]
    omega = ys[:, 0:3].copy()
    if model is Model.FIRST_ORDER:
        g = p.gamma
        omega *= np.array([g, g * g, g])
    return Trajectory(
        dt=float(dt),
        tau=taus.copy(),
        omega=omega,
        quat=ys[:, 3:7].copy(),
        euler=ys[:, 7:10].copy(),
        config=cfg,
        meta={"model": model.value, "integrator": "rk4", "dt": float(dt),
              "tau_end": float(tau_end)},
    )

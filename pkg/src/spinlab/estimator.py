"""scikit-learn style front end: time in, platform angular velocity out.

>>> model = AttitudeResponseModel(**EXAMPLE1.to_dict()).fit()
>>> omega = model.predict(np.linspace(0, 100, 1001))

Because the inertias are constructor parameters, ``get_params`` /
``set_params`` / ``sklearn.base.clone`` work for sweeps, and ``score``
gives the pooled-output R^2 of ``predict`` against reference rates.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analytic import omega_analytic
from .integrate import DEFAULT_DT, propagate
from .model import SystemConfig, derive_params

__all__ = ["AttitudeResponseModel", "check_tau"]

_METHODS = ("analytic", "full", "first")


def check_tau(X):
    """Validate dimensionless times given as ``(n,)`` or ``(n, 1)``."""
    X = check_array(X, ensure_2d=False, dtype=np.float64, ensure_min_samples=0)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single time column, got {X.shape[1]} columns")
        X = X[:, 0]
    if np.any(X < 0):
        raise ValueError("times must be non-negative")
    return X


class AttitudeResponseModel(RegressorMixin, BaseEstimator):
    """Platform angular velocity of an unbalanced partial-spin spacecraft.

    Parameters
    ----------
    ixx, iyy, izz, ixy : float
        Equivalent spin inertia elements (kg*m^2).
    ibr, iby : float
        Platform transverse and spin-axis inertia (kg*m^2).
    omega_mag : float
        Rotor relative rate (rad/s).
    method : {"analytic", "full", "first"}
        Closed-form first-order solution, or RK4 integration of the full or
        first-order equations (interpolated with a cubic spline).
    dt : float
        Integration step for the numerical methods.

    Attributes
    ----------
    config_ : SystemConfig
    params_ : DerivedParams
    stability_ : Stability
    """

    def __init__(self, ixx=80.0, iyy=80.0, izz=60.0, ixy=-0.1, ibr=100.0, iby=90.0,
                 omega_mag=1.0, method="analytic", dt=DEFAULT_DT):
        self.ixx = ixx
        self.iyy = iyy
        self.izz = izz
        self.ixy = ixy
        self.ibr = ibr
        self.iby = iby
        self.omega_mag = omega_mag
        self.method = method
        self.dt = dt

    def fit(self, X=None, y=None):
        """Validate the inertias and derive the reduced-system coefficients.

        ``X`` and ``y`` are accepted for API compatibility and ignored: the
        response is fully determined by the parameters.
        """
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        self.config_ = SystemConfig.from_values(self.ixx, self.iyy, self.izz, self.ixy,
                                                self.ibr, self.iby, omega_mag=self.omega_mag)
        self.params_ = derive_params(self.config_)
        self.stability_ = self.params_.stability
        self._spline = None
        self._spline_end = 0.0
        return self

    def _numerical(self, tau_max):
        if self._spline is None or tau_max > self._spline_end:
            end = max(self.dt, math.ceil(tau_max / self.dt) * self.dt)
            traj = propagate(self.config_, self.method, end, self.dt)
            self._spline = CubicSpline(traj.tau, traj.omega, axis=0)
            self._spline_end = float(traj.tau[-1])
        return self._spline

    def predict(self, X):
        """Dimensionless angular velocity ``(n, 3)`` at times ``X``."""
        check_is_fitted(self, "params_")
        tau = check_tau(X)
        if self.method == "analytic":
            return np.atleast_2d(omega_analytic(tau, self.config_))
        if tau.size == 0:
            return np.empty((0, 3))
        return self._numerical(float(tau.max()))(tau)

"""Attitude dynamics toolkit for partial-spin spacecraft with an unbalanced rotor."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    ErrorReport,
    Growth,
    GrowthFit,
    dominant_frequencies,
    error_report,
    growth_envelope,
    nutation_sweep,
)
from .analytic import (  # noqa: E402
    NutationProfile,
    euler_angles_analytic,
    nutation_profile,
    omega_analytic,
    omega_first_order,
)
from .estimator import AttitudeResponseModel  # noqa: E402
from .integrate import IntegrationBlowUp, Trajectory, propagate  # noqa: E402
from .model import (  # noqa: E402
    DerivedParams,
    PlatformInertia,
    SpinInertia,
    Stability,
    SystemConfig,
    classify_stability,
    derive_params,
)

__all__ = [
    "AttitudeResponseModel",
    "DerivedParams",
    "ErrorReport",
    "Growth",
    "GrowthFit",
    "IntegrationBlowUp",
    "NutationProfile",
    "PlatformInertia",
    "SpinInertia",
    "Stability",
    "SystemConfig",
    "Trajectory",
    "classify_stability",
    "derive_params",
    "dominant_frequencies",
    "error_report",
    "euler_angles_analytic",
    "growth_envelope",
    "nutation_profile",
    "nutation_sweep",
    "omega_analytic",
    "omega_first_order",
    "propagate",
]

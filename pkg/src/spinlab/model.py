"""Inertia types, reduced-system coefficients and the stability classifier.

All inertias are in kg*m^2.  The platform frame has its y-axis along the
rotor spin axis; the rotor spins at a constant relative rate ``omega_mag``
(rad/s), and dimensionless time is ``tau = omega_mag * t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpinInertia",
    "PlatformInertia",
    "RotorPhysical",
    "SystemConfig",
    "Stability",
    "DerivedParams",
    "compose_equivalent_inertia",
    "derive_params",
    "classify_stability",
    "params_from_augmented",
    "LAMBDA_DEGENERATE_TOL",
    "RESONANCE_TOL",
]

#: lambda**2 below this makes the closed-form amplitudes (1/lambda**2) unusable
LAMBDA_DEGENERATE_TOL = 1e-9
#: |lambda - 1| below this makes the Euler-angle closed forms singular
RESONANCE_TOL = 1e-6
#: relative tolerance used to detect sigma == 0
SIGMA_REL_TOL = 1e-12


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


def _require_positive(name, value):
    _require_finite(name, value)
    if value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class SpinInertia:
    """Constant-basis elements of the equivalent spin inertia tensor.

    The tensor in the rotor-attached basis is::

        [[ixx, ixy, 0],
         [ixy, iyy, 0],
         [0,   0,   izz]]
    """

    ixx: float
    iyy: float
    izz: float
    ixy: float = 0.0

    def __post_init__(self):
        for name in ("ixx", "iyy", "izz"):
            _require_positive(name, getattr(self, name))
        _require_finite("ixy", self.ixy)
        if self.ixy**2 >= self.ixx * self.iyy:
            raise ValueError(
                f"ixy: spin inertia is not positive definite "
                f"(ixy**2={self.ixy**2!r} >= ixx*iyy={self.ixx * self.iyy!r})"
            )

    def matrix(self):
        return np.array(
            [[self.ixx, self.ixy, 0.0], [self.ixy, self.iyy, 0.0], [0.0, 0.0, self.izz]]
        )


@dataclass(frozen=True)
class PlatformInertia:
    """Axisymmetric platform inertia ``diag(ibr, iby, ibr)``."""

    ibr: float
    iby: float

    def __post_init__(self):
        _require_positive("ibr", self.ibr)
        _require_positive("iby", self.iby)

    def matrix(self):
        return np.diag([self.ibr, self.iby, self.ibr])


@dataclass(frozen=True)
class RotorPhysical:
    """Physical rotor/platform data used to build the equivalent spin inertia.

    Parameters
    ----------
    m_a, m_b : float
        Rotor and platform masses (kg).
    h : float
        Distance from the rotor mass center to the spin axis (m).
    d : float
        Distance from the platform mass center to the spin plane (m).
    ia_principal : tuple of float
        Rotor principal moments ``(Ixx, Iyy, Izz)`` about its mass center.
    """

    m_a: float
    m_b: float
    h: float
    d: float
    ia_principal: tuple[float, float, float]

    def __post_init__(self):
        _require_positive("m_a", self.m_a)
        _require_positive("m_b", self.m_b)
        for name in ("h", "d"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")
        ia = tuple(float(v) for v in self.ia_principal)
        if len(ia) != 3:
            raise ValueError("ia_principal must have three entries")
        for axis, value in zip("xyz", ia):
            _require_positive(f"ia_principal[{axis}]", value)
        object.__setattr__(self, "ia_principal", ia)


@dataclass(frozen=True)
class SystemConfig:
    """Everything needed to simulate one spacecraft configuration."""

    spin: SpinInertia
    platform: PlatformInertia
    omega_mag: float = 1.0
    initial_omega: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        _require_positive("omega_mag", self.omega_mag)
        w0 = tuple(float(v) for v in self.initial_omega)
        if len(w0) != 3:
            raise ValueError("initial_omega must have three entries")
        for v in w0:
            _require_finite("initial_omega", v)
        object.__setattr__(self, "initial_omega", w0)

    @classmethod
    def from_values(cls, ixx, iyy, izz, ixy, ibr, iby, omega_mag=1.0,
                    initial_omega=(0.0, 0.0, 0.0)):
        return cls(
            SpinInertia(ixx, iyy, izz, ixy),
            PlatformInertia(ibr, iby),
            omega_mag=omega_mag,
            initial_omega=initial_omega,
        )

    def replace(self, **changes):
        """Copy with some of the flat fields (``ixx`` ... ``iby``, ``omega_mag``,
        ``initial_omega``) changed."""
        flat = self.to_dict()
        unknown = set(changes) - set(flat)
        if unknown:
            raise TypeError(f"unknown config fields: {sorted(unknown)}")
        flat.update(changes)
        return SystemConfig.from_dict(flat)

    def to_dict(self):
        return {
            "ixx": self.spin.ixx,
            "iyy": self.spin.iyy,
            "izz": self.spin.izz,
            "ixy": self.spin.ixy,
            "ibr": self.platform.ibr,
            "iby": self.platform.iby,
            "omega_mag": self.omega_mag,
            "initial_omega": list(self.initial_omega),
        }

    @classmethod
    def from_dict(cls, data):
        """Build a config from a flat mapping.

        A ``rotor`` block (``m_a, m_b, h, d, ia_principal``) may stand in for
        the four spin-inertia fields.
        """
        data = dict(data)
        if "rotor" in data:
            rotor = data.pop("rotor")
            try:
                phys = RotorPhysical(**rotor)
            except TypeError as exc:
                raise ValueError(f"rotor: {exc}") from None
            spin = compose_equivalent_inertia(phys)
            for key in ("ixx", "iyy", "izz", "ixy"):
                if key in data:
                    raise ValueError(f"{key}: given together with a rotor block")
            data.update(ixx=spin.ixx, iyy=spin.iyy, izz=spin.izz, ixy=spin.ixy)
        required = ("ixx", "iyy", "izz", "ixy", "ibr", "iby")
        for key in required:
            if key not in data:
                raise ValueError(f"{key}: missing from config")
        allowed = set(required) | {"omega_mag", "initial_omega"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"{sorted(unknown)[0]}: unknown config field")
        values = {}
        for key in required + ("omega_mag",):
            if key not in data:
                continue
            try:
                values[key] = float(data[key])
            except (TypeError, ValueError):
                raise ValueError(f"{key}: expected a number, got {data[key]!r}") from None
        if "initial_omega" in data:
            values["initial_omega"] = tuple(data["initial_omega"])
        return cls.from_values(**values)


class Stability(enum.Enum):
    STABLE = "Stable"
    MARGINALLY_UNSTABLE = "MarginallyUnstable"
    EXPONENTIALLY_UNSTABLE = "ExponentiallyUnstable"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DerivedParams:
    """Scalar coefficients of the reduced (first-order) system.

    ``lam`` is always non-negative: the oscillation rate sqrt(-u1*u2) when
    stable, the growth rate sqrt(u1*u2) when exponentially unstable and 0 in
    the marginal case.  ``epsilon`` is ``gamma / lam**2`` and is NaN when
    ``lam`` is zero.
    """

    gamma: float
    alpha: float
    beta: float
    c1: float
    c2: float
    u1: float
    u2: float
    sigma: float
    lam: float
    epsilon: float
    ixx_aug: float
    izz_aug: float
    iyy: float
    stability: Stability
    lambda_degenerate: bool = False
    resonant: bool = False
    flags: tuple[str, ...] = field(default=())

    @property
    def lam_sq(self):
        """``lam**2`` without the square-root round trip."""
        if self.stability is Stability.MARGINALLY_UNSTABLE:
            return 0.0
        return abs(self.u1 * self.u2)

    @property
    def lam_sq_minus_one(self):
        """``lam**2 - 1`` for sigma < 0, formed from the inertias to avoid cancellation."""
        prod = self.ixx_aug * self.izz_aug
        return -(self.sigma + prod) / prod

    @property
    def sigma_tol(self):
        return SIGMA_REL_TOL * self.ixx_aug * self.izz_aug

    def as_dict(self):
        out = {
            k: getattr(self, k)
            for k in ("gamma", "alpha", "beta", "c1", "c2", "u1", "u2", "sigma",
                      "lam", "epsilon", "ixx_aug", "izz_aug", "iyy")
        }
        out["stability"] = self.stability.value
        out["lambda_degenerate"] = self.lambda_degenerate
        out["resonant"] = self.resonant
        return out


def compose_equivalent_inertia(phys: RotorPhysical) -> SpinInertia:
    """Rotor inertia plus the mass-center offset term, in the rotor basis."""
    mu = phys.m_a * phys.m_b / (phys.m_a + phys.m_b)
    ia_xx, ia_yy, ia_zz = phys.ia_principal
    h, d = phys.h, phys.d
    return SpinInertia(
        ixx=ia_xx + mu * h * h,
        iyy=ia_yy + mu * d * d,
        izz=ia_zz + mu * (d * d + h * h),
        ixy=-mu * d * h,
    )


def _classify(sigma, ixx_aug, izz_aug):
    tol = SIGMA_REL_TOL * ixx_aug * izz_aug
    if sigma < -tol:
        return Stability.STABLE
    if sigma > tol:
        return Stability.EXPONENTIALLY_UNSTABLE
    return Stability.MARGINALLY_UNSTABLE


def _finish(gamma, alpha, beta, c1, c2, u1, u2, ixx_aug, iyy, izz_aug):
    sigma = -(iyy - ixx_aug) * (iyy - izz_aug)
    stability = _classify(sigma, ixx_aug, izz_aug)
    if stability is Stability.MARGINALLY_UNSTABLE:
        lam = 0.0
    else:
        lam = math.sqrt(abs(u1 * u2))
    flags = []
    degenerate = abs(u1 * u2) < LAMBDA_DEGENERATE_TOL
    if degenerate:
        flags.append("lambda_degenerate")
    resonant = stability is Stability.STABLE and abs(lam - 1.0) < RESONANCE_TOL
    if resonant:
        flags.append("resonant")
    epsilon = gamma / abs(u1 * u2) if lam > 0 else math.nan
    return DerivedParams(
        gamma=gamma, alpha=alpha, beta=beta, c1=c1, c2=c2, u1=u1, u2=u2,
        sigma=sigma, lam=lam, epsilon=epsilon, ixx_aug=ixx_aug, izz_aug=izz_aug,
        iyy=iyy, stability=stability, lambda_degenerate=degenerate,
        resonant=resonant, flags=tuple(flags),
    )


def derive_params(cfg: SystemConfig) -> DerivedParams:
    """Compute every coefficient of the reduced system for ``cfg``."""
    ixx, iyy, izz, ixy = cfg.spin.ixx, cfg.spin.iyy, cfg.spin.izz, cfg.spin.ixy
    ibr, iby = cfg.platform.ibr, cfg.platform.iby
    ixx_aug = ixx + ibr
    izz_aug = izz + ibr

    gamma = ixy / izz_aug
    alpha = (ixx - izz) * (ixx - iyy + 2.0 * ibr + izz) / (2.0 * izz_aug * ixx_aug)
    beta = -(ixx - iyy - izz) / izz_aug
    c1 = -(ixx - izz) / (2.0 * (iby + iyy))
    c2 = -izz_aug * (ixx + iyy - izz) / ((iby + iyy) * ixx_aug)
    # equal to 2*alpha + beta - 1 and 1 - beta, without the cancellation
    u1 = (iyy - izz_aug) / ixx_aug
    u2 = (ixx_aug - iyy) / izz_aug
    return _finish(gamma, alpha, beta, c1, c2, u1, u2, ixx_aug, iyy, izz_aug)


def params_from_augmented(ixx_aug, iyy, izz_aug, gamma=0.0):
    """Reduced-system coefficients from the augmented inertias alone.

    ``u1`` and ``u2`` (and hence sigma, lambda and everything precession
    related) only depend on ``ixx_aug``, ``iyy`` and ``izz_aug``.  The
    y-channel coefficients ``c1``/``c2`` need the split between rotor and
    platform and are returned as NaN.
    """
    for name, value in (("ixx_aug", ixx_aug), ("iyy", iyy), ("izz_aug", izz_aug)):
        _require_positive(name, value)
    u1 = (iyy - izz_aug) / ixx_aug
    u2 = (ixx_aug - iyy) / izz_aug
    beta = 1.0 - u2
    alpha = (u1 - beta + 1.0) / 2.0
    return _finish(float(gamma), alpha, beta, math.nan, math.nan, u1, u2,
                   float(ixx_aug), float(iyy), float(izz_aug))


def classify_stability(p: DerivedParams) -> Stability:
    """Map the sign of sigma onto the three stability regimes."""
    return _classify(p.sigma, p.ixx_aug, p.izz_aug)

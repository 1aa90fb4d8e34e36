"""Named configurations used throughout the examples and reproductions.

``iby`` is not given for the three regime illustrations; it only enters the
y-channel coefficients and is set to 100 there.
"""

from .model import SystemConfig

#: rotor that loses part of its mass at t = 0
EXAMPLE1 = SystemConfig.from_values(ixx=80, iyy=80, izz=60, ixy=-0.1, ibr=100, iby=90)
#: 20 m, 1 t truss spinning on a satellite platform
EXAMPLE2 = SystemConfig.from_values(ixx=20, iyy=60, izz=10, ixy=-1, ibr=1000, iby=800)
#: stable precession/nutation illustration (sigma < 0, u1 = -1)
FIG4 = SystemConfig.from_values(ixx=1, iyy=2, izz=3, ixy=-0.01, ibr=100, iby=100)
#: sigma == 0: izz + ibr == iyy
MARGINAL = SystemConfig.from_values(ixx=3, iyy=102, izz=2, ixy=-0.01, ibr=100, iby=100)
#: sigma > 0: iyy strictly between ixx + ibr and izz + ibr
UNSTABLE = SystemConfig.from_values(ixx=1, iyy=102, izz=3, ixy=-0.01, ibr=100, iby=100)

PRESETS = {
    "example1": EXAMPLE1,
    "example2": EXAMPLE2,
    "fig4": FIG4,
    "marginal": MARGINAL,
    "unstable": UNSTABLE,
}

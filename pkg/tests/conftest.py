"""Shared trajectories; the long runs are computed once per session."""

import pytest

from spinlab.integrate import propagate
from spinlab.presets import EXAMPLE1, FIG4, MARGINAL, UNSTABLE

DT = 1e-3


@pytest.fixture(scope="session")
def example1_runs():
    return {m: propagate(EXAMPLE1, m, 300.0, DT) for m in ("full", "analytic")}


@pytest.fixture(scope="session")
def precession_runs():
    return {m: propagate(FIG4, m, 320.0, DT) for m in ("full", "first", "analytic")}


@pytest.fixture(scope="session")
def regime_full_runs():
    return {name: propagate(cfg, "full", 100.0, DT)
            for name, cfg in (("fig4", FIG4), ("marginal", MARGINAL), ("unstable", UNSTABLE))}


@pytest.fixture(scope="session")
def regime_first_runs():
    return {name: propagate(cfg, "first", 100.0, DT)
            for name, cfg in (("fig4", FIG4), ("marginal", MARGINAL), ("unstable", UNSTABLE))}


@pytest.fixture(scope="session")
def unstable_long():
    return propagate(UNSTABLE, "first", 700.0, DT)

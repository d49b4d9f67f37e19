"""Shared fixtures: wave profiles are expensive enough to build once."""

import pytest

from lowmach.profiles import Frame, ProfileSet
from lowmach.wave import WaveSolveOptions, solve_wave


@pytest.fixture(scope="session")
def wave():
    """Default gentle wave, endpoints (1, 1.1), kappa 1."""
    return solve_wave(1.0, 1.1, 1.0)


@pytest.fixture(scope="session")
def steep_wave():
    return solve_wave(1.0, 1.5, 1.0)


@pytest.fixture(scope="session")
def ps(wave):
    return ProfileSet(wave=wave, mu_tilde=1.0, epsilon=0.1,
                      frame=Frame.LAGRANGIAN)

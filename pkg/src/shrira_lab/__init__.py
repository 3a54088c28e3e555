"""Pseudospectral lab for u_t + H Lap u + u u_x = 0 on the 2-torus."""

__version__ = "0.1.0"

from .spectral_core import GridSpec, SpectralField  # noqa: E402
from .dyadic import DyadicIndex  # noqa: E402
from .solver import SolveConfig, Trajectory, solve_ivp  # noqa: E402
from .estimates import ProbeReport  # noqa: E402

__all__ = ["GridSpec", "SpectralField", "DyadicIndex", "SolveConfig", "Trajectory", "solve_ivp", "ProbeReport", "__version__"]

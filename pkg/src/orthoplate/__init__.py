"""Orthotropic Kirchhoff-Love plate with a one-dimensional reinforcement.

Submodules: :mod:`elasticity` (stiffness/compliance algebra), :mod:`plate`
(energies, operator, boundary conditions), :mod:`spectral` (sine-mode
reduction, spectra, static solves), :mod:`dynamics` (modal evolution) and
:mod:`cli`.
"""

from .config import load_config, run_config
from .plate import PlateModel, derive_material

__version__ = "0.1.0"

__all__ = ["PlateModel", "derive_material", "load_config", "run_config", "__version__"]

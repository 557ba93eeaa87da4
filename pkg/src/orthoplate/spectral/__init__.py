"""Sine-mode reduction, per-mode eigenproblems, spectra and static solves."""

from .modes import (
    ModeProblem,
    Parity,
    RootStructure,
    SpectralError,
    characteristic_structure,
    mode_determinant,
    reduce_mode,
)
from .oracle import discretization_oracle, solve_mode_bvp_fem
from .spectrum import (
    EigenPair,
    IncompleteSpectrumError,
    Spectrum,
    assemble_spectrum,
    frequencies,
    frequency,
    solve_mode_eigs,
)

__all__ = [
    "EigenPair",
    "IncompleteSpectrumError",
    "ModeProblem",
    "Parity",
    "RootStructure",
    "SpectralError",
    "Spectrum",
    "assemble_spectrum",
    "characteristic_structure",
    "discretization_oracle",
    "frequencies",
    "frequency",
    "mode_determinant",
    "reduce_mode",
    "solve_mode_bvp_fem",
    "solve_mode_eigs",
]

"""Reduction of the plate operator to one fourth-order ODE per sine mode.

With ``u = sin(mu x) Y(y)`` and ``mu = m pi / L`` the hinged conditions at
``x = 0, L`` hold automatically and the plate eigenproblem becomes

    R (Y'''' - 2 mu^2 Y'' + (1 + kappa) mu^4 Y) = lambda Y    on (-ell, ell)
    Y'' - nu mu^2 Y = 0,   Y''' - (2 - nu) mu^2 Y' = 0        at y = +-ell.

The ODE is written as a first-order system ``Z' = A Z`` for the state
``Z = (Y, Y', Y'', Y''')``; its fundamental matrix ``expm(A y)`` is entire in
``lambda`` so no regime of the characteristic roots needs special treatment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ..plate import PlateModel


class SpectralError(RuntimeError):
    pass


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def family(self) -> str:
        return "vertical" if self is Parity.EVEN else "torsional"

    @property
    def sign(self) -> float:
        return 1.0 if self is Parity.EVEN else -1.0

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, Parity):
            return value
        key = str(value).strip().lower()
        aliases = {"even": cls.EVEN, "vertical": cls.EVEN, "vert": cls.EVEN,
                   "odd": cls.ODD, "torsional": cls.ODD, "tors": cls.ODD}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown parity {value!r}; use even/vertical or odd/torsional") from None


# state components that are free at y = 0 for each parity
FREE_STATE = {Parity.EVEN: (0, 2), Parity.ODD: (1, 3)}


@dataclass(frozen=True)
class ModeProblem:
    """Reduced ODE for the x-mode ``m``."""

    m: int
    mu: float
    R: float
    kappa: float
    nu: float
    ell: float
    L: float

    @property
    def mu2(self) -> float:
        return self.mu * self.mu

    @property
    def mu4(self) -> float:
        return self.mu2 * self.mu2

    @property
    def lower_bound(self) -> float:
        """Rigorous lower bound ``R (1 + kappa - nu^2) mu^4`` for every eigenvalue.

        Follows from writing the quadratic form as a sum of squares.
        """
        return self.R * (1.0 + self.kappa - self.nu**2) * self.mu4

    @property
    def beam_estimate(self) -> float:
        """``R (1 + kappa) mu^4``, the eigenvalue of a y-independent profile."""
        return self.R * (1.0 + self.kappa) * self.mu4

    def system_matrix(self, lam: float) -> np.ndarray:
        c = (1.0 + self.kappa) * self.mu4 - lam / self.R
        return np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-c, 0.0, 2.0 * self.mu2, 0.0],
            ]
        )

    def boundary_rows(self) -> np.ndarray:
        """Free-edge operators acting on the state ``(Y, Y', Y'', Y''')``."""
        return np.array(
            [
                [-self.nu * self.mu2, 0.0, 1.0, 0.0],
                [0.0, -(2.0 - self.nu) * self.mu2, 0.0, 1.0],
            ]
        )

    def ode_residual(self, D, lam: float) -> np.ndarray:
        """``R (Y'''' - 2 mu^2 Y'' + (1+kappa) mu^4 Y) - lam Y`` from rows of ``D``."""
        Y0, _, Y2, _, Y4 = D
        return self.R * (Y4 - 2.0 * self.mu2 * Y2 + (1.0 + self.kappa) * self.mu4 * Y0) - lam * Y0

    def bc_residuals(self, state_at_edge) -> np.ndarray:
        return self.boundary_rows() @ np.asarray(state_at_edge)


def reduce_mode(model: PlateModel, m: int) -> ModeProblem:
    if int(m) != m or m < 1:
        raise ValueError(f"mode index must be a positive integer, got {m}")
    m = int(m)
    return ModeProblem(
        m=m,
        mu=m * np.pi / model.L,
        R=model.R,
        kappa=model.kappa,
        nu=model.nu,
        ell=model.ell,
        L=model.L,
    )


@dataclass(frozen=True)
class RootStructure:
    """Roots ``t^2`` of ``t^4 - 2 mu^2 t^2 + (1+kappa) mu^4 - lam/R = 0``.

    ``regime`` is ``"complex"`` (complex-conjugate pair), ``"two_positive"``,
    ``"mixed"`` (one positive, one negative) or ``"degenerate"`` on the
    boundaries between them.
    """

    t2: tuple
    regime: str
    degenerate: bool
    discriminant: float


def characteristic_structure(mode: ModeProblem, lam: float, rtol: float = 1e-12) -> RootStructure:
    s = lam / mode.R - mode.kappa * mode.mu4
    q = (1.0 + mode.kappa) * mode.mu4 - lam / mode.R
    scale = (1.0 + mode.kappa) * mode.mu4
    root = np.sqrt(complex(s))
    t2 = (mode.mu2 + root, mode.mu2 - root)
    if abs(s) <= rtol * scale:
        return RootStructure(t2, "degenerate", True, s)
    if abs(q) <= rtol * scale:
        return RootStructure(t2, "degenerate", True, s)
    if s < 0:
        regime = "complex"
    elif q > 0:
        regime = "two_positive"
    else:
        regime = "mixed"
    return RootStructure(t2, regime, False, s)


def fundamental_matrix(mode: ModeProblem, lam: float, y: float) -> np.ndarray:
    P = expm(mode.system_matrix(lam) * y)
    if not np.all(np.isfinite(P)):
        raise SpectralError(f"fundamental solutions overflow at lambda={lam:.6g}, mode m={mode.m}")
    return P


def boundary_matrix(mode: ModeProblem, parity, lam: float):
    """2 x 2 free-edge matrix at ``y = ell`` for the parity-restricted basis.

    Returns ``(B, scale)``: column ``j`` of ``B`` applies the two free-edge
    operators to the normalized fundamental solution number ``j``; ``scale``
    are the normalizing factors (the max-abs of each solution's state at
    ``y = ell``), so ``B`` stays O(1) whatever the size of ``t * ell``.
    """
    parity = Parity.parse(parity)
    P = fundamental_matrix(mode, lam, mode.ell)
    V = P[:, FREE_STATE[parity]]
    scale = np.abs(V).max(axis=0)
    V = V / scale
    return mode.boundary_rows() @ V, scale


def mode_determinant(mode: ModeProblem, parity, lam: float) -> float:
    """Characteristic function whose zeros in ``lam`` are the eigenvalues."""
    B, _ = boundary_matrix(mode, parity, lam)
    return float(B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0])

"""Eigenpairs of the plate per sine mode and the assembled global spectrum."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..fields import DisplacementField, modal_field
from ..plate import PlateModel
from .modes import (
    FREE_STATE,
    ModeProblem,
    Parity,
    SpectralError,
    boundary_matrix,
    fundamental_matrix,
    mode_determinant,
    reduce_mode,
)
from .oracle import discretization_oracle

SCAN_START = 1e-8
SCAN_RATIO = 1.05
CEILING_FACTOR = 10.0
ROOT_RTOL = 1e-12
# composite Gauss-Legendre on the half-width, used for norms and Rayleigh quotients
_QUAD_PANELS = 32
_QUAD_ORDER = 10


class IncompleteSpectrumError(SpectralError):
    def __init__(self, message: str, ceiling: float):
        super().__init__(message)
        self.ceiling = ceiling


def frequency(lam, M: float, ell: float):
    """Frequency in Hz of the stationary wave for eigenvalue ``lam``."""
    return np.sqrt(ell * np.asarray(lam, dtype=float) / (2.0 * M)) / np.pi


def angular_frequency(lam, M: float, ell: float):
    return 2.0 * np.pi * frequency(lam, M, ell)


def eigenvalue_for_frequency(nu_hz, M: float, ell: float):
    return 2.0 * M * (np.pi * np.asarray(nu_hz, dtype=float)) ** 2 / ell


def _half_width_quadrature(ell: float):
    g, w = np.polynomial.legendre.leggauss(_QUAD_ORDER)
    edges = np.linspace(0.0, ell, _QUAD_PANELS + 1)
    h = edges[1] - edges[0]
    y = (edges[:-1, None] + (g[None, :] + 1.0) * h / 2.0).ravel()
    return y, np.tile(w * h / 2.0, _QUAD_PANELS)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Eigenvalue and separable eigenfunction ``U = sin(mu x) Y(y)``.

    ``Y`` is represented exactly by its state vector ``z0 = (Y, Y', Y'', Y''')``
    at ``y = 0``; ``U`` has unit L2 norm over the plate and ``Y(ell) > 0``.
    """

    lam: float
    mode: ModeProblem
    parity: Parity
    index: int
    z0: np.ndarray
    nu_hz: float
    rayleigh_residual: float = field(default=np.nan)

    @property
    def m(self) -> int:
        return self.mode.m

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.nu_hz

    @property
    def label(self) -> str:
        return f"m={self.m} {self.parity.value} #{self.index}"

    def profile(self, y, derivatives: int = 4) -> np.ndarray:
        """Rows ``Y, Y', ..., Y^(derivatives)`` at the points ``y``.

        Evaluated at ``|y|`` and mirrored, so the parity is exact.
        """
        return _profile_from_state(self.mode, self.lam, self.z0, self.parity, y, derivatives)

    def samples(self, y) -> np.ndarray:
        return self.profile(y, 0)[0]

    def field(self, x, y, amplitude: float = 1.0) -> DisplacementField:
        return modal_field(x, y, [(self.mode.mu, amplitude, self.profile(y))])

    def key(self):
        return (self.lam, self.m, 0 if self.parity is Parity.EVEN else 1, self.index)


def _profile_from_state(mode: ModeProblem, lam: float, z0, parity: Parity, y, derivatives: int = 4):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    states = np.empty((4, y.size))
    for i, yi in enumerate(np.abs(y)):
        states[:, i] = fundamental_matrix(mode, lam, yi) @ z0
    # Y'''' from the ODE itself
    Y4 = 2.0 * mode.mu2 * states[2] - ((1.0 + mode.kappa) * mode.mu4 - lam / mode.R) * states[0]
    rows = np.vstack([states, Y4[None, :]])
    # derivative of order k picks up (-1)^k under reflection, times the parity sign
    signs = np.array([parity.sign * (-1.0) ** k for k in range(5)])
    neg = y < 0
    rows[:, neg] *= signs[:, None]
    return rows[: derivatives + 1]


def quadratic_form(mode: ModeProblem, D, w) -> float:
    """Per-mode energy ``a(Y, Y)`` as a sum of squares, from profile rows and weights."""
    Y, Y1, Y2 = D[0], D[1], D[2]
    dens = (Y2 - mode.nu * mode.mu2 * Y) ** 2 + 2.0 * (1.0 - mode.nu) * mode.mu2 * Y1**2 + (
        1.0 + mode.kappa - mode.nu**2
    ) * mode.mu4 * Y**2
    return float(dens @ w)


def _null_state(mode: ModeProblem, parity: Parity, lam: float) -> np.ndarray:
    B, scale = boundary_matrix(mode, parity, lam)
    _, _, vt = np.linalg.svd(B)
    c = vt[-1] / scale
    z0 = np.zeros(4)
    z0[list(FREE_STATE[parity])] = c
    return z0


def _make_pair(mode: ModeProblem, parity: Parity, lam: float, index: int, M: float) -> EigenPair:
    z0 = _null_state(mode, parity, lam)
    yq, wq = _half_width_quadrature(mode.ell)
    D = _profile_from_state(mode, lam, z0, parity, yq, 2)
    # ||U||^2 over the plate is (L/2) * 2 * int_0^ell Y^2
    norm2 = mode.L * float(D[0] ** 2 @ wq)
    z0 = z0 / np.sqrt(norm2)
    edge = fundamental_matrix(mode, lam, mode.ell) @ z0
    ref = edge[0] if abs(edge[0]) > 1e-12 * np.abs(edge).max() else edge[1]
    if ref < 0:
        z0 = -z0
    D = D / np.sqrt(norm2)
    rq = mode.R * quadratic_form(mode, D, wq) / float(D[0] ** 2 @ wq)
    return EigenPair(
        lam=float(lam),
        mode=mode,
        parity=parity,
        index=index,
        z0=z0,
        nu_hz=float(frequency(lam, M, mode.ell)),
        rayleigh_residual=abs(rq - lam) / lam,
    )


def find_eigenvalues(mode: ModeProblem, parity, k: int, ceiling: float | None = None) -> np.ndarray:
    """First ``k`` zeros of the mode determinant, ascending.

    A geometric scan (ratio 1.05) from ``1e-8 R mu^4`` brackets each sign
    change, then Brent's method refines it.  The default ceiling is ten times
    the oracle estimate of the ``k``-th eigenvalue.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    parity = Parity.parse(parity)
    if ceiling is None:
        est = discretization_oracle(mode, parity, n=60, k=k)
        ceiling = CEILING_FACTOR * float(est[-1] if len(est) >= k else est.max())
    det = lambda x: mode_determinant(mode, parity, x)  # noqa: E731
    roots = []
    lam = SCAN_START * mode.R * mode.mu4
    f = det(lam)
    while len(roots) < k:
        nxt = lam * SCAN_RATIO
        if nxt > ceiling:
            raise IncompleteSpectrumError(
                f"found {len(roots)} of {k} eigenvalues for m={mode.m} ({parity.value}) below the scan ceiling "
                f"{ceiling:.6g} N/m^3",
                ceiling,
            )
        fn = det(nxt)
        if fn == 0.0:
            roots.append(nxt)
        elif np.sign(fn) != np.sign(f) and f != 0.0:
            roots.append(brentq(det, lam, nxt, xtol=1e-300, rtol=ROOT_RTOL))
        lam, f = nxt, fn
    return np.array(roots)


def solve_mode_eigs(model: PlateModel, m: int, parity, k: int, ceiling: float | None = None) -> list:
    mode = reduce_mode(model, m)
    parity = Parity.parse(parity)
    roots = find_eigenvalues(mode, parity, k, ceiling)
    return [_make_pair(mode, parity, lam, i + 1, model.M) for i, lam in enumerate(roots)]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Globally sorted eigenpairs of the plate.

    ``cutoff`` certifies completeness: every eigenvalue of the plate below it
    is in ``pairs``.  It is the smaller of the first discarded root per
    ``(m, parity)`` and the lower bound for modes beyond ``m_max``.
    """

    pairs: tuple
    m_max: int
    k_per_mode: int
    cutoff: float
    M: float
    ell: float

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    @property
    def certified(self) -> tuple:
        return tuple(p for p in self.pairs if p.lam < self.cutoff)

    def lowest(self, n: int) -> tuple:
        """The ``n`` smallest plate eigenvalues; raises if not certified."""
        cert = self.certified
        if n > len(cert):
            raise IncompleteSpectrumError(
                f"only {len(cert)} eigenvalues are certified below {self.cutoff:.6g} N/m^3; "
                f"increase m_max or k_per_mode",
                self.cutoff,
            )
        return cert[:n]

    def find(self, m: int, parity, index: int = 1) -> EigenPair:
        parity = Parity.parse(parity)
        for p in self.pairs:
            if p.m == m and p.parity is parity and p.index == index:
                return p
        raise KeyError(f"no eigenpair m={m} {parity.value} #{index} in spectrum")

    def family(self, parity) -> dict:
        """Lowest eigenpair of the given parity for each x-mode ``m``."""
        parity = Parity.parse(parity)
        return {m: self.find(m, parity, 1) for m in range(1, self.m_max + 1)}

    @property
    def vertical(self) -> dict:
        return self.family(Parity.EVEN)

    @property
    def torsional(self) -> dict:
        return self.family(Parity.ODD)


def assemble_spectrum(model: PlateModel, m_max: int = 12, k_per_mode: int = 4) -> Spectrum:
    if m_max < 1 or k_per_mode < 1:
        raise ValueError("m_max and k_per_mode must be positive")
    pairs = []
    discarded = []
    for m in range(1, m_max + 1):
        mode = reduce_mode(model, m)
        for parity in (Parity.EVEN, Parity.ODD):
            roots = find_eigenvalues(mode, parity, k_per_mode + 1)
            discarded.append(roots[-1])
            pairs.extend(_make_pair(mode, parity, lam, i + 1, model.M) for i, lam in enumerate(roots[:-1]))
    beyond = reduce_mode(model, m_max + 1).lower_bound
    cutoff = min(min(discarded), beyond)
    pairs.sort(key=EigenPair.key)
    return Spectrum(tuple(pairs), m_max, k_per_mode, float(cutoff), model.M, model.ell)


def frequencies(spectrum: Spectrum, M: float | None = None, ell: float | None = None) -> dict:
    """Frequency tables in Hz: all pairs in order plus the two families by ``m``."""
    M = spectrum.M if M is None else M
    ell = spectrum.ell if ell is None else ell
    lam = spectrum.eigenvalues
    nu = frequency(lam, M, ell)
    return {
        "all_hz": nu,
        "omega": 2.0 * np.pi * nu,
        "vertical_hz": np.array([frequency(p.lam, M, ell) for p in spectrum.vertical.values()]),
        "torsional_hz": np.array([frequency(p.lam, M, ell) for p in spectrum.torsional.values()]),
    }

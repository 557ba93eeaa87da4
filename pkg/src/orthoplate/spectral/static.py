"""Equilibrium of the plate under a vertical load, mode by mode.

The load is expanded as ``f ~ sum_m f_m(y) sin(mu x)`` with
``f_m(y) = (2/L) int_0^L f(x, y) sin(mu x) dx``.  For each mode the
two-point problem

    R (Y'''' - 2 mu^2 Y'' + (1+kappa) mu^4 Y) = f_m(y),   free-edge BCs at y = +-ell

is solved by variation of constants: ``f_m / R`` is replaced by its cubic
spline through a uniform y-grid, and the state ``(Y, Y', Y'', Y''')`` is
propagated exactly across each spline piece with one matrix exponential of
an augmented system.  The profile therefore satisfies the ODE exactly for
the splined forcing (which coincides with ``f_m`` at the spline nodes) and
carries exact derivatives up to fourth order.

The spline grid starts ``SPLINE_REFINEMENT`` times finer than the output
grid and is doubled per mode until two successive solves agree to
``REFINEMENT_RTOL`` at the output nodes, or until the change stops shrinking
(the roundoff floor of the propagation).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from ..fields import DisplacementField, Grid, GridError, modal_field, simpson_2d
from ..plate import PlateModel, bending_energy, boundary_residuals, interior_residual, total_energy
from .modes import ModeProblem, SpectralError, reduce_mode

DEFAULT_M_MAX = 49
SPLINE_REFINEMENT = 16
MAX_REFINEMENT = 256
REFINEMENT_RTOL = 1e-9
REFINEMENT_WARN = 1e-6
NEGLIGIBLE_MODE = 1e-12
TRUNCATION_WARN = 0.1
FINE_X = 4001


class TruncationWarning(UserWarning):
    pass


class RefinementWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# Loads
# ---------------------------------------------------------------------------


class Load:
    """Vertical load per unit area.  Subclasses give nodal values and sine coefficients."""

    #: y-nodes the load is known on, or None if it can be evaluated anywhere
    native_y = None

    def values(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def mode_profile(self, model: PlateModel, m: int, y) -> np.ndarray:
        raise NotImplementedError

    def modes(self, m_max: int):
        """Mode indices that may carry a nonzero coefficient."""
        return range(1, m_max + 1)


@dataclass(frozen=True)
class UniformLoad(Load):
    q: float

    def values(self, x, y):
        return np.full((len(x), len(y)), float(self.q))

    def mode_profile(self, model, m, y):
        c = 4.0 * self.q / (m * np.pi) if m % 2 else 0.0
        return np.full(np.shape(y), c)

    def modes(self, m_max):
        return range(1, m_max + 1, 2) if self.q != 0 else range(0)


@dataclass(frozen=True)
class SineLoad(Load):
    """``q sin(m pi x / L)``, uniform across the width."""

    m: int
    q: float
    L: float

    def values(self, x, y):
        return self.q * np.sin(self.m * np.pi * np.asarray(x) / self.L)[:, None] * np.ones(len(y))

    def mode_profile(self, model, m, y):
        return np.full(np.shape(y), self.q if m == self.m else 0.0)

    def modes(self, m_max):
        return [self.m] if self.m <= m_max else []


class GridLoad(Load):
    """Load known only at the nodes of a tensor grid."""

    def __init__(self, x, y, f):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.f = np.asarray(f, dtype=float)
        if self.f.shape != (len(self.x), len(self.y)):
            raise GridError("load values do not match the load grid")
        if len(self.x) % 2 == 0:
            raise GridError("Simpson projection needs an odd number of x nodes")
        self.native_y = self.y

    def values(self, x, y):
        if not (np.array_equal(np.asarray(x), self.x) and np.array_equal(np.asarray(y), self.y)):
            raise GridError("grid load is evaluated on a grid different from its own")
        return self.f

    def mode_profile(self, model, m, y):
        if not np.array_equal(np.asarray(y), self.y):
            raise GridError("grid load is projected on y-nodes different from its own")
        s = np.sin(m * np.pi * self.x / model.L)
        return (2.0 / model.L) * simpson(self.f * s[:, None], x=self.x, axis=0)


class FunctionLoad(Load):
    """Load given by a vectorized callable ``f(x, y)``."""

    def __init__(self, func, nx_projection: int = FINE_X):
        if nx_projection % 2 == 0:
            raise GridError("projection grid needs an odd node count")
        self.func = func
        self.nx_projection = nx_projection
        # samples on the fine projection grid, shared by all modes; two y-grids kept
        self._cache: dict = {}

    def values(self, x, y):
        X, Y = np.meshgrid(x, y, indexing="ij")
        return np.asarray(self.func(X, Y), dtype=float) * np.ones(X.shape)

    def _fine_samples(self, L: float, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        key = (L, y.size, y[0], y[-1])
        if key not in self._cache:
            if len(self._cache) >= 2:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = self.values(np.linspace(0.0, L, self.nx_projection), y)
        return self._cache[key]

    def mode_profile(self, model, m, y):
        xf = np.linspace(0.0, model.L, self.nx_projection)
        F = self._fine_samples(model.L, y)
        s = np.sin(m * np.pi * xf / model.L)
        return (2.0 / model.L) * simpson(F * s[:, None], x=xf, axis=0)


class ModeLoad(Load):
    """``scale * sin(mu x) Y(y)`` for a single profile, e.g. ``lambda * U`` of an eigenpair."""

    def __init__(self, pair, scale: float = 1.0):
        self.pair = pair
        self.scale = float(scale)

    def values(self, x, y):
        return self.scale * self.pair.field(x, y).u

    def mode_profile(self, model, m, y):
        if m != self.pair.m:
            return np.zeros(np.shape(y))
        return self.scale * self.pair.samples(y)

    def modes(self, m_max):
        return [self.pair.m] if self.pair.m <= m_max else []


# ---------------------------------------------------------------------------
# Per-mode two-point problem
# ---------------------------------------------------------------------------


def _augmented_propagator(mode: ModeProblem, h: float):
    """Exact one-step map for ``Z' = A Z + e4 g`` with cubic ``g`` on a step ``h``.

    ``g`` is carried by its Taylor data ``(g, g', g'', g''')`` at the left end.
    """
    A = mode.system_matrix(0.0)
    big = np.zeros((8, 8))
    big[:4, :4] = A
    big[3, 4] = 1.0
    big[4, 5] = big[5, 6] = big[6, 7] = 1.0
    E = expm(big * h)
    return E[:4, :4], E[:4, 4:]


def solve_mode_bvp(mode: ModeProblem, y_nodes, g_nodes):
    """States ``(Y, Y', Y'', Y''')`` at uniform ``y_nodes`` spanning ``[-ell, ell]``.

    ``g_nodes`` are samples of ``f_m / R`` at the same nodes.
    """
    y_nodes = np.asarray(y_nodes, dtype=float)
    h = y_nodes[1] - y_nodes[0]
    if not np.allclose(np.diff(y_nodes), h, rtol=1e-10, atol=0):
        raise GridError("spline nodes must be uniform")
    spline = CubicSpline(y_nodes, g_nodes, bc_type="not-a-knot")
    c = spline.c  # c[k, i] multiplies (y - y_i)^(3-k)
    taylor = np.stack([c[3], c[2], 2.0 * c[1], 6.0 * c[0]])
    Phi, Gam = _augmented_propagator(mode, h)
    n = len(y_nodes)
    # march the homogeneous basis and one particular solution together
    hom = np.empty((n, 4, 4))
    par = np.empty((n, 4))
    hom[0] = np.eye(4)
    par[0] = 0.0
    for i in range(n - 1):
        hom[i + 1] = Phi @ hom[i]
        par[i + 1] = Phi @ par[i] + Gam @ taylor[:, i]
    B = mode.boundary_rows()
    lhs = np.vstack([B, B @ hom[-1]])
    rhs = np.concatenate([np.zeros(2), -B @ par[-1]])
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > 1e14:
        raise SpectralError(f"free-edge system for m={mode.m} is numerically singular (cond={cond:.3g})")
    z0 = np.linalg.solve(lhs, rhs)
    states = np.einsum("nij,j->ni", hom, z0) + par
    return states.T, spline


@dataclass(frozen=True, eq=False)
class StaticSolution:
    model: PlateModel
    field: DisplacementField
    load_values: np.ndarray
    projected_load: np.ndarray
    modes: tuple
    truncation: float

    def interior_residual(self, form: str = "model") -> float:
        """Max interior ``|A u - f~|`` relative to ``max |f~|`` (``f~`` the mode-projected load)."""
        r = interior_residual(self.model, self.field, self.projected_load, form)
        scale = np.abs(self.projected_load).max()
        return float(np.abs(r).max() / scale) if scale > 0 else float(np.abs(r).max())

    def boundary_residuals(self) -> dict:
        """Each boundary family relative to the magnitude of the terms it balances."""
        f = self.field
        raw = boundary_residuals(self.model, f)
        nu = self.model.nu
        uxx, uyy = np.abs(f.d("xx")), np.abs(f.d("yy"))
        scales = {
            "navier_value": np.abs(f.u).max(),
            "navier_curvature": uxx.max(),
            "free_moment": max(uyy.max(), nu * uxx.max()),
            "free_shear": max(np.abs(f.d("yyy")).max(), (2.0 - nu) * np.abs(f.d("xxy")).max()),
        }
        return {k: (v / scales[k] if scales[k] > 0 else v) for k, v in raw.as_dict().items()}

    def energies(self) -> dict:
        eb = bending_energy(self.model, self.field)
        return {"bending": eb, "total": total_energy(self.model, self.field, self.load_values)}


def _rel_change(a, b) -> float:
    scale = np.abs(b).max(axis=1)
    scale[scale == 0] = 1.0
    return float((np.abs(a - b).max(axis=1) / scale).max())


def _mode_states(model: PlateModel, mode: ModeProblem, load: Load, y, refinement: int, load_scale: float):
    """State rows and projected load at the output nodes ``y``, or ``(None, fm)`` for a negligible mode."""

    def negligible(fm):
        return not np.abs(fm).max() > NEGLIGIBLE_MODE * load_scale

    if load.native_y is not None:
        fm = np.asarray(load.mode_profile(model, mode.m, y), dtype=float)
        if negligible(fm):
            return None, fm
        return solve_mode_bvp(mode, y, fm / model.R)[0], fm

    def solve(r):
        ys = np.linspace(y[0], y[-1], (len(y) - 1) * r + 1)
        fm = np.asarray(load.mode_profile(model, mode.m, ys), dtype=float)
        if negligible(fm):
            return None, fm[::r]
        return solve_mode_bvp(mode, ys, fm / model.R)[0][:, ::r], fm[::r]

    S, fm = solve(refinement)
    if S is None:
        return None, fm
    change = np.inf
    while refinement < MAX_REFINEMENT:
        refinement *= 2
        S2, fm = solve(refinement)
        prev, change = change, _rel_change(S, S2)
        S = S2
        # a spline error of order h^4 shrinks 16-fold per doubling; stalling means roundoff
        if change <= REFINEMENT_RTOL or change > 0.25 * prev:
            break
    if change > REFINEMENT_WARN:
        warnings.warn(
            f"mode m={mode.m}: load spline unresolved at refinement {refinement} (relative change {change:.3g})",
            RefinementWarning,
            stacklevel=3,
        )
    return S, fm


def static_solve(model: PlateModel, load: Load, m_max: int = DEFAULT_M_MAX, grid: Grid | None = None,
                 refinement: int = SPLINE_REFINEMENT) -> StaticSolution:
    """Displacement under ``load`` with modes ``m = 1 .. m_max``.

    Returns the field on ``grid`` (default 201 x 41) with exact derivatives,
    the nodal load, its mode projection and the truncation ratio
    ``||f - f~|| / ||f||`` in the discrete L2 norm.
    """
    if m_max < 1:
        raise ValueError("m_max must be positive")
    grid = grid or Grid(model.L, model.ell)
    if abs(grid.L - model.L) > 1e-12 * model.L or abs(grid.ell - model.ell) > 1e-12 * model.ell:
        raise GridError("grid extents do not match the plate")
    x, y = grid.x, grid.y
    if load.native_y is not None:
        ys = np.asarray(load.native_y, dtype=float)
        if ys.shape != y.shape or not np.allclose(ys, y, rtol=0, atol=1e-9 * model.ell):
            raise GridError("load grid does not match the solution grid")
    f_nodes = load.values(x, y)
    load_scale = float(np.abs(f_nodes).max())
    terms = []
    projected = np.zeros_like(f_nodes)
    used = []
    for m in load.modes(m_max):
        mode = reduce_mode(model, m)
        S, fm_out = _mode_states(model, mode, load, y, refinement, load_scale)
        if S is None:
            continue
        Y4 = 2.0 * mode.mu2 * S[2] - (1.0 + mode.kappa) * mode.mu4 * S[0] + fm_out / model.R
        terms.append((mode.mu, 1.0, np.vstack([S, Y4])))
        projected += np.sin(mode.mu * x)[:, None] * fm_out[None, :]
        used.append(m)
    if terms:
        field = modal_field(x, y, terms)
    else:
        field = DisplacementField.zeros(grid)
    fnorm = np.sqrt(simpson_2d(f_nodes**2, x, y))
    tail = np.sqrt(simpson_2d((f_nodes - projected) ** 2, x, y))
    truncation = float(tail / fnorm) if fnorm > 0 else 0.0
    if truncation > TRUNCATION_WARN:
        warnings.warn(
            f"sine expansion with m_max={m_max} leaves {truncation:.3g} of the load norm unresolved",
            TruncationWarning,
            stacklevel=2,
        )
    return StaticSolution(model, field, f_nodes, projected, tuple(used), truncation)

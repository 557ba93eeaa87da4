"""Free vibrations of the plate by exact modal synthesis.

The equation of motion ``(M / 2 ell) u_tt + R (Laplacian^2 u + kappa u_xxxx) = 0``
decouples in the eigenbasis: each coefficient oscillates as
``a(t) = a0 cos(w t) + (v0 / w) sin(w t)`` with ``w^2 = 2 ell lambda / M``.
No time stepping is involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fields import DisplacementField, modal_field, simpson_2d
from .plate import PlateModel, bending_energy, plate_operator


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ModalState:
    """Modal coefficients ``a_k`` and velocities at ``t0`` for a list of eigenpairs.

    Eigenfunctions are L2-orthonormal over the plate, so the total energy is
    ``sum (M / (4 ell)) adot_k^2 + (lambda_k / 2) a_k^2``.
    """

    pairs: tuple
    a0: np.ndarray
    v0: np.ndarray
    M: float
    ell: float
    t0: float = 0.0
    truncation: float = 0.0

    def __post_init__(self):
        if len(self.pairs) == 0:
            raise DynamicsError("modal state needs at least one eigenpair")
        if len(self.a0) != len(self.pairs) or len(self.v0) != len(self.pairs):
            raise DynamicsError("coefficient arrays do not match the number of eigenpairs")

    @property
    def lam(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(2.0 * self.ell * self.lam / self.M)

    def coefficients(self, t):
        """``(a(t), adot(t))``; for an array ``t`` the arrays have shape ``(len(t), K)``."""
        t = np.asarray(t, dtype=float)
        w = self.omega
        tau = (t[..., None] if t.ndim else t) - self.t0
        c, s = np.cos(w * tau), np.sin(w * tau)
        a = self.a0 * c + (self.v0 / w) * s
        adot = -self.a0 * w * s + self.v0 * c
        return a, adot

    def energy(self, t) -> np.ndarray:
        a, adot = self.coefficients(t)
        return ((self.M / (4.0 * self.ell)) * adot**2 + 0.5 * self.lam * a**2).sum(axis=-1)


def modal_energy_split(state: ModalState, t):
    """Closed-form ``(kinetic, bending)`` energies in J."""
    a, adot = state.coefficients(t)
    kinetic = ((state.M / (4.0 * state.ell)) * adot**2).sum(axis=-1)
    bending = (0.5 * state.lam * a**2).sum(axis=-1)
    return kinetic, bending


def _synthesize(pairs, coeffs, x, y) -> DisplacementField:
    return modal_field(x, y, [(p.mode.mu, c, p.profile(y)) for p, c in zip(pairs, coeffs)])


def evolve(state: ModalState, t: float, x, y) -> DisplacementField:
    """Displacement at time ``t`` on the grid ``x, y`` with exact derivatives."""
    a, _ = state.coefficients(float(t))
    return _synthesize(state.pairs, a, x, y)


def velocity(state: ModalState, t: float, x, y) -> DisplacementField:
    _, adot = state.coefficients(float(t))
    return _synthesize(state.pairs, adot, x, y)


def energy_split(state: ModalState, model: PlateModel, t: float, x, y):
    """``(kinetic, bending)`` in J from quadrature of the synthesized fields."""
    u = evolve(state, t, x, y)
    ut = velocity(state, t, x, y)
    kinetic = 0.5 * (model.M / (2.0 * model.ell)) * simpson_2d(ut.u**2, x, y)
    return kinetic, bending_energy(model, u)


def evolution_residual(state: ModalState, model: PlateModel, t: float, x, y) -> float:
    """Max interior ``|(M/2 ell) u_tt + A u|`` relative to ``max |A u|``."""
    u = evolve(state, t, x, y)
    w = state.omega
    a, _ = state.coefficients(float(t))
    # u_tt = -sum w_k^2 a_k(t) U_k
    utt = _synthesize(state.pairs, -(w**2) * a, x, y).u
    Au = plate_operator(model, u)
    r = (model.M / (2.0 * model.ell)) * utt + Au
    scale = np.abs(Au[1:-1, 1:-1]).max()
    err = np.abs(r[1:-1, 1:-1]).max()
    return float(err / scale) if scale > 0 else float(err)


def modal_state(pairs, a0, v0, M: float, ell: float) -> ModalState:
    return ModalState(tuple(pairs), np.asarray(a0, dtype=float), np.asarray(v0, dtype=float), float(M), float(ell))


def stationary_wave(pair, amplitude: float, M: float, ell: float) -> ModalState:
    """``amplitude * sin(w t) U`` written as a modal state."""
    w = np.sqrt(2.0 * ell * pair.lam / M)
    return modal_state([pair], [0.0], [amplitude * w], M, ell)


def project_initial(u0: DisplacementField, v0: DisplacementField, pairs, M: float, ell: float,
                    tol: float = 1e-10) -> ModalState:
    """Modal coefficients of initial displacement and velocity fields.

    The coefficients solve the Gram system of the eigenfunctions in the
    discrete (Simpson) inner product of the fields' grid, so data lying in the
    modal span are recovered exactly.  ``truncation`` reports
    ``||u0 - sum a_k U_k|| / ||u0||``.
    """
    pairs = tuple(pairs)
    if not pairs:
        raise DynamicsError("cannot project onto an empty spectrum")
    if not u0.same_grid(v0):
        raise DynamicsError("initial displacement and velocity live on different grids")
    x, y = u0.x, u0.y
    for f in (u0, v0):
        edge = max(np.abs(f.u[0]).max(), np.abs(f.u[-1]).max())
        if edge > tol * max(np.abs(f.u).max(), 1e-300):
            raise DynamicsError("initial data must vanish on the hinged edges x = 0, L")
    basis = np.array([p.field(x, y).u for p in pairs])
    G = np.array([[simpson_2d(bi * bj, x, y) for bj in basis] for bi in basis])
    rhs_u = np.array([simpson_2d(u0.u * b, x, y) for b in basis])
    rhs_v = np.array([simpson_2d(v0.u * b, x, y) for b in basis])
    a0 = np.linalg.solve(G, rhs_u)
    adot0 = np.linalg.solve(G, rhs_v)
    norm = np.sqrt(simpson_2d(u0.u**2, x, y))
    rest = u0.u - np.tensordot(a0, basis, axes=1)
    truncation = float(np.sqrt(simpson_2d(rest**2, x, y)) / norm) if norm > 0 else 0.0
    return ModalState(pairs, a0, adot0, float(M), float(ell), 0.0, truncation)


def zero_crossings(t, a) -> np.ndarray:
    """Times where the sampled signal changes sign, by linear interpolation."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    idx = np.nonzero(np.sign(a[:-1]) * np.sign(a[1:]) < 0)[0]
    return t[idx] - a[idx] * (t[idx + 1] - t[idx]) / (a[idx + 1] - a[idx])


def write_trajectory(path, state: ModalState, times) -> None:
    """CSV ``t,a_1,...,a_K`` at full precision."""
    a, _ = state.coefficients(np.asarray(times, dtype=float))
    header = "t," + ",".join(f"a_{k + 1}" for k in range(len(state.pairs)))
    data = np.column_stack([np.asarray(times, dtype=float), np.atleast_2d(a)])
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def manifest(state: ModalState) -> dict:
    return {
        "modes": [
            {"k": k + 1, "m": p.m, "parity": p.parity.value, "index": p.index,
             "lambda_N_per_m3": p.lam, "frequency_hz": p.nu_hz}
            for k, p in enumerate(state.pairs)
        ]
    }


def write_manifest(path, state: ModalState) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest(state), fh, indent=2, sort_keys=True)
        fh.write("\n")

"""Anisotropic and orthotropic elasticity-tensor algebra.

Symmetric 3x3 tensors are stored as 6-vectors of *tensor* components in the
order (11, 22, 33, 12, 13, 23).  The off-diagonal slots carry ``e12`` itself,
not the engineering shear ``2 e12``.  With this convention

    sigma = C @ e,        e = S @ sigma,

the shear compliance entries are ``1 / (2 mu)`` and the shear stiffness
entries are ``2 mu``.  Most engineering texts use Voigt vectors with doubled
shears instead; do not mix the two.

Because shears enter once, the elastic energy is ``0.5 * e @ W @ C @ e`` with
``W = diag(1, 1, 1, 2, 2, 2)``.  ``W @ C`` is the matrix that must be
symmetric for a hyperelastic material.  For stiffness matrices written in
their orthotropy axes this coincides with plain symmetry of ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

#: index pairs of the six basis tensors X1..X6
SYM_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))

#: weights turning tensor-component products into full double contractions
SHEAR_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])

#: entries allowed to be nonzero in an orthotropic stiffness matrix
ORTHOTROPIC_PATTERN = np.zeros((6, 6), dtype=bool)
ORTHOTROPIC_PATTERN[:3, :3] = True
ORTHOTROPIC_PATTERN[3, 3] = ORTHOTROPIC_PATTERN[4, 4] = ORTHOTROPIC_PATTERN[5, 5] = True

STRUCTURAL_TOL = 1e-12
INVERSION_TOL = 1e-10


class MaterialError(ValueError):
    """Raised for inadmissible or inconsistent elastic constants."""


class TransformError(ValueError):
    """Raised when a coordinate change is not orthogonal."""


# ---------------------------------------------------------------------------
# symmetric tensors
# ---------------------------------------------------------------------------


def sym_to_coeffs(X) -> np.ndarray:
    """Coefficients of a symmetric 3x3 matrix in the basis X1..X6."""
    X = np.asarray(X, dtype=float)
    if X.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {X.shape}")
    if not np.allclose(X, X.T, rtol=0.0, atol=STRUCTURAL_TOL * max(1.0, np.abs(X).max())):
        raise ValueError("matrix is not symmetric")
    return np.array([X[i, j] for i, j in SYM_INDEX])


def coeffs_to_sym(alpha) -> np.ndarray:
    """Inverse of :func:`sym_to_coeffs`; the result is exactly symmetric."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (6,):
        raise ValueError(f"expected 6 coefficients, got shape {alpha.shape}")
    X = np.empty((3, 3))
    for a, (i, j) in enumerate(SYM_INDEX):
        X[i, j] = X[j, i] = alpha[a]
    return X


# ---------------------------------------------------------------------------
# coordinate changes
# ---------------------------------------------------------------------------


def check_orthogonal(A, tol: float = STRUCTURAL_TOL) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise TransformError(f"expected a 3x3 matrix, got shape {A.shape}")
    err = np.abs(A.T @ A - np.eye(3)).max()
    if err > tol:
        raise TransformError(f"matrix is not orthogonal: max|A^T A - I| = {err:.3e}")
    return A


def lift_transform(A) -> np.ndarray:
    """6x6 matrix of ``X -> A X A^T`` acting on basis coefficients.

    Column ``b`` holds the coefficients of ``A X_b A^T``.  For a diagonal
    basis element this gives ``A_ik A_jk``; for an off-diagonal one
    ``A_ik A_jl + A_il A_jk`` (which is ``2 A_ik A_il`` on the diagonal rows).
    """
    A = check_orthogonal(A)
    T = np.empty((6, 6))
    for a, (i, j) in enumerate(SYM_INDEX):
        for b, (k, l) in enumerate(SYM_INDEX):
            if k == l:
                T[a, b] = A[i, k] * A[j, k]
            else:
                T[a, b] = A[i, k] * A[j, l] + A[i, l] * A[j, k]
    return T


def rotation_x1(theta: float) -> np.ndarray:
    """Rotation by ``theta`` about the x1 axis."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_about(axis: int, theta: float) -> np.ndarray:
    """Rotation by ``theta`` about coordinate axis 0, 1 or 2."""
    c, s = math.cos(theta), math.sin(theta)
    i, j = [k for k in range(3) if k != axis]
    R = np.eye(3)
    R[i, i] = R[j, j] = c
    R[i, j], R[j, i] = -s, s
    return R


def rotation_lift_x1(theta: float) -> np.ndarray:
    """Closed form of ``lift_transform(rotation_x1(theta))``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, c * c, s * s, 0.0, 0.0, -math.sin(2 * theta)],
            [0.0, s * s, c * c, 0.0, 0.0, math.sin(2 * theta)],
            [0.0, 0.0, 0.0, c, -s, 0.0],
            [0.0, 0.0, 0.0, s, c, 0.0],
            [0.0, s * c, -s * c, 0.0, 0.0, math.cos(2 * theta)],
        ]
    )


#: reflections through the coordinate planes x1 = 0, x2 = 0, x3 = 0
REFLECTIONS = tuple(np.diag(d) for d in ([-1.0, 1, 1], [1.0, -1, 1], [1.0, 1, -1]))


def _rel_norm(C) -> float:
    return float(np.abs(C).max())


def check_energy_symmetric(C, tol: float = STRUCTURAL_TOL) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.shape != (6, 6):
        raise ValueError(f"expected a 6x6 matrix, got shape {C.shape}")
    WC = SHEAR_WEIGHTS[:, None] * C
    if np.abs(WC - WC.T).max() > tol * _rel_norm(WC):
        raise MaterialError("stiffness matrix has no energy potential (W C is not symmetric)")
    return C


def transform_stiffness(C, A) -> np.ndarray:
    """Stiffness matrix in the coordinates ``x' = A x``: ``AA C AA^-1``."""
    C = check_energy_symmetric(C)
    T = lift_transform(A)
    # the lift of A^T is the exact inverse of the lift of A
    return T @ C @ lift_transform(np.asarray(A, dtype=float).T)


@dataclass(frozen=True)
class OrthotropyCheck:
    orthotropic: bool
    residual: float
    """max |entry| outside the orthotropic pattern, relative to max |C|"""
    reflection_residual: float
    """max over the three reflections of |AA_i C AA_i^-1 - C|, relative"""


def is_orthotropic(C, tol: float = STRUCTURAL_TOL) -> OrthotropyCheck:
    """Sparsity test for orthotropy, with the reflection-commutation residual.

    Both residuals are reported; ``orthotropic`` uses the pattern residual.
    The lifted reflections are diagonal +-1 matrices, so the two residuals
    differ at most by the factor 2 from ``C_ab - (-C_ab)``.
    """
    C = np.asarray(C, dtype=float)
    scale = _rel_norm(C)
    pattern = float(np.abs(np.where(ORTHOTROPIC_PATTERN, 0.0, C)).max()) / scale
    refl = 0.0
    for A in REFLECTIONS:
        T = lift_transform(A)
        refl = max(refl, float(np.abs(T @ C @ np.linalg.inv(T) - C).max()) / scale)
    return OrthotropyCheck(pattern <= tol, pattern, refl)


def commutes_with_reflections(C, tol: float = STRUCTURAL_TOL) -> bool:
    return is_orthotropic(C, tol).reflection_residual <= 2.0 * tol


def rotation_residual(C, A) -> float:
    """Relative change of C under the coordinate change A."""
    C = np.asarray(C, dtype=float)
    return float(np.abs(transform_stiffness(C, A) - C).max()) / _rel_norm(C)


def c2323_residual(C) -> float:
    """Relative defect of ``C2323 = (C2222 - C2233 - C3322 + C3333) / 2``.

    Vanishes for orthotropic materials that are invariant under rotations
    about the x1 axis.
    """
    C = np.asarray(C, dtype=float)
    target = 0.5 * (C[1, 1] - C[1, 2] - C[2, 1] + C[2, 2])
    return abs(C[5, 5] - target) / _rel_norm(C)


# ---------------------------------------------------------------------------
# engineering constants
# ---------------------------------------------------------------------------

_RECIPROCITY = (
    ("nu21", "E2", "nu12", "E1"),
    ("nu31", "E3", "nu13", "E1"),
    ("nu32", "E3", "nu23", "E2"),
)


@dataclass(frozen=True)
class OrthotropicConstants:
    """Young moduli (Pa), Poisson ratios and shear moduli (Pa).

    ``nu_ij`` is the transverse contraction along j under uniaxial stress
    along i.  Use :meth:`from_mapping` to fill in missing reciprocal ratios.
    """

    E1: float
    E2: float
    E3: float
    nu12: float
    nu13: float
    nu21: float
    nu23: float
    nu31: float
    nu32: float
    mu12: float
    mu13: float
    mu23: float

    def __post_init__(self):
        for name in ("E1", "E2", "E3", "mu12", "mu13", "mu23"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise MaterialError(f"{name} must be positive, got {v!r}")
        for nu_ji, E_j, nu_ij, E_i in _RECIPROCITY:
            lhs = getattr(self, nu_ji) / getattr(self, E_j)
            rhs = getattr(self, nu_ij) / getattr(self, E_i)
            if abs(lhs - rhs) > STRUCTURAL_TOL * max(abs(lhs), abs(rhs)):
                raise MaterialError(
                    f"reciprocity violated: {nu_ji}/{E_j} = {nu_ij}/{E_i} "
                    f"({lhs:.6e} != {rhs:.6e})"
                )

    @classmethod
    def from_mapping(cls, values) -> "OrthotropicConstants":
        """Build from a mapping; reciprocal Poisson ratios may be omitted."""
        v = {k: float(x) for k, x in dict(values).items()}
        for nu_ji, E_j, nu_ij, E_i in _RECIPROCITY:
            if nu_ji not in v and nu_ij in v:
                v[nu_ji] = v[nu_ij] * v[E_j] / v[E_i]
            elif nu_ij not in v and nu_ji in v:
                v[nu_ij] = v[nu_ji] * v[E_i] / v[E_j]
        missing = [f for f in cls.__dataclass_fields__ if f not in v]
        if missing:
            raise MaterialError(f"missing elastic constants: {', '.join(missing)}")
        unknown = sorted(set(v) - set(cls.__dataclass_fields__))
        if unknown:
            raise MaterialError(f"unknown elastic constants: {', '.join(unknown)}")
        return cls(**v)

    @classmethod
    def isotropic(cls, E: float, nu: float) -> "OrthotropicConstants":
        mu = E / (2.0 * (1.0 + nu))
        return cls(E, E, E, nu, nu, nu, nu, nu, nu, mu, mu, mu)


@dataclass(frozen=True)
class TransverselyIsotropicConstants:
    """Material reinforced along x1 and isotropic in the x2-x3 plane."""

    E1: float
    E2: float
    nu12: float
    nu23: float
    mu12: float

    def __post_init__(self):
        if not (self.E2 > 0 and self.E1 > self.E2):
            raise MaterialError(f"reinforcement requires E1 > E2 > 0 (E1={self.E1}, E2={self.E2})")
        if not 0.0 < self.nu12 < 0.5:
            raise MaterialError(f"nu12 must lie in (0, 1/2), got {self.nu12}")
        if not -1.0 < self.nu23 < 1.0:
            raise MaterialError(f"nu23 must lie in (-1, 1), got {self.nu23}")
        if not self.mu12 > 0:
            raise MaterialError(f"mu12 must be positive, got {self.mu12}")

    @property
    def nu21(self) -> float:
        return self.nu12 * self.E2 / self.E1

    def expand(self) -> OrthotropicConstants:
        """Nine orthotropic constants; mu23 from the x1 rotation invariance."""
        base = dict(
            E1=self.E1, E2=self.E2, E3=self.E2,
            nu12=self.nu12, nu13=self.nu12, nu21=self.nu21, nu31=self.nu21,
            nu23=self.nu23, nu32=self.nu23,
            mu12=self.mu12, mu13=self.mu12,
        )
        # C2222 and C2233 do not involve the shear moduli
        provisional = OrthotropicConstants(**base, mu23=1.0)
        C = stiffness_closed_form(provisional)
        return replace(provisional, mu23=0.5 * (C[1, 1] - C[1, 2]))


# ---------------------------------------------------------------------------
# Hooke's law
# ---------------------------------------------------------------------------


def compliance_matrix(k: OrthotropicConstants) -> np.ndarray:
    """Strain-from-stress matrix S in tensor-component convention."""
    S = np.zeros((6, 6))
    S[0, :3] = 1.0 / k.E1, -k.nu21 / k.E2, -k.nu31 / k.E3
    S[1, :3] = -k.nu12 / k.E1, 1.0 / k.E2, -k.nu32 / k.E3
    S[2, :3] = -k.nu13 / k.E1, -k.nu23 / k.E2, 1.0 / k.E3
    S[3, 3] = 1.0 / (2.0 * k.mu12)
    S[4, 4] = 1.0 / (2.0 * k.mu13)
    S[5, 5] = 1.0 / (2.0 * k.mu23)
    return S


def delta_determinant(k: OrthotropicConstants) -> float:
    """Determinant of the normal 3x3 compliance block, evaluated directly."""
    return float(np.linalg.det(compliance_matrix(k)[:3, :3]))


def delta(k: OrthotropicConstants) -> float:
    """Closed-form determinant of the normal compliance block (Pa^-3).

    Raises
    ------
    MaterialError
        If the determinant is not positive (inadmissible material).
    """
    num = 1.0 - k.nu12 * k.nu21 - k.nu13 * k.nu31 - k.nu23 * k.nu32 - 2.0 * k.nu12 * k.nu23 * k.nu31
    d = num / (k.E1 * k.E2 * k.E3)
    if not d > 0:
        raise MaterialError(f"inadmissible material: delta = {d:.6e} <= 0")
    return d


def stiffness_closed_form(k: OrthotropicConstants) -> np.ndarray:
    """Inverse of :func:`compliance_matrix` written entry by entry."""
    d = delta(k)
    E1, E2, E3 = k.E1, k.E2, k.E3
    n12, n13, n21, n23, n31, n32 = k.nu12, k.nu13, k.nu21, k.nu23, k.nu31, k.nu32
    C = np.zeros((6, 6))
    C[0, :3] = (
        (1 - n23 * n32) / (d * E2 * E3),
        (n12 + n13 * n32) / (d * E1 * E3),
        (n13 + n12 * n23) / (d * E1 * E2),
    )
    C[1, :3] = (
        (n21 + n31 * n23) / (d * E2 * E3),
        (1 - n13 * n31) / (d * E1 * E3),
        (n23 + n13 * n21) / (d * E1 * E2),
    )
    C[2, :3] = (
        (n31 + n21 * n32) / (d * E2 * E3),
        (n32 + n31 * n12) / (d * E1 * E3),
        (1 - n12 * n21) / (d * E1 * E2),
    )
    C[3, 3] = 2.0 * k.mu12
    C[4, 4] = 2.0 * k.mu13
    C[5, 5] = 2.0 * k.mu23
    return C


def check_admissible(C) -> None:
    """Positive definiteness of the energy form (Cholesky of W C)."""
    WC = SHEAR_WEIGHTS[:, None] * np.asarray(C, dtype=float)
    try:
        np.linalg.cholesky(0.5 * (WC + WC.T))
    except np.linalg.LinAlgError:
        raise MaterialError("stiffness matrix is not positive definite") from None


def reinforced_stiffness(k5: TransverselyIsotropicConstants) -> np.ndarray:
    """Stiffness of the x1-reinforced, x2-x3 isotropic material."""
    E1, E2, n12, n23 = k5.E1, k5.E2, k5.nu12, k5.nu23
    d = delta(k5.expand())
    a = (1 - n23**2) / (d * E2**2)
    b = n12 * (1 + n23) / (d * E1 * E2)
    c = (E1 - E2 * n12**2) / (d * E1**2 * E2)
    e = (E1 * n23 + E2 * n12**2) / (d * E1**2 * E2)
    C = np.zeros((6, 6))
    C[:3, :3] = [[a, b, b], [b, c, e], [b, e, c]]
    C[3, 3] = C[4, 4] = 2.0 * k5.mu12
    C[5, 5] = (E1 * (1 - n23) - 2 * E2 * n12**2) / (d * E1**2 * E2)
    return C


def stress(C, e) -> np.ndarray:
    """Stress coefficients from strain coefficients (both 6-vectors)."""
    return np.asarray(C, dtype=float) @ np.asarray(e, dtype=float)


def stiffness_tensor(C) -> np.ndarray:
    """Fourth-order tensor C_ijkl with both minor and major symmetries.

    Off-diagonal strain slots appear twice in the double contraction, so
    shear columns of the 6x6 matrix are split evenly between ``kl`` and
    ``lk``.  For orthotropic C this yields C_1212 = C[3, 3] / 2 = mu12.
    """
    C = np.asarray(C, dtype=float)
    T = np.empty((3, 3, 3, 3))
    pos = {}
    for a, (i, j) in enumerate(SYM_INDEX):
        pos[i, j] = pos[j, i] = a
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    b = pos[k, l]
                    T[i, j, k, l] = C[pos[i, j], b] / SHEAR_WEIGHTS[b]
    return T


def energy_density(C, e) -> float:
    """Elastic energy per unit volume, ``0.5 * sum C_ijkl e_ij e_kl`` (J/m^3).

    ``e`` is either a 6-vector of tensor coefficients or a full 3x3 array.
    A 3x3 input need not be symmetric, which lets finite differences
    perturb ``e_ij`` and ``e_ji`` independently.
    """
    e = np.asarray(e, dtype=float)
    if e.shape == (6,):
        e = coeffs_to_sym(e)
    elif e.shape != (3, 3):
        raise ValueError(f"strain must be a 6-vector or 3x3, got shape {e.shape}")
    return 0.5 * float(np.einsum("ijkl,ij,kl->", stiffness_tensor(C), e, e))


def energy_density_orthotropic(C, e) -> float:
    """Block form of the energy for orthotropic C and a strain 6-vector."""
    C = np.asarray(C, dtype=float)
    e = np.asarray(e, dtype=float)
    ed = e[:3]
    return 0.5 * ed @ C[:3, :3] @ ed + C[3, 3] * e[3] ** 2 + C[4, 4] * e[4] ** 2 + C[5, 5] * e[5] ** 2


def matrix_to_csv(C) -> str:
    """Six comma-separated rows at full double precision."""
    return "".join(",".join("%.17g" % v for v in row) + "\n" for row in np.asarray(C, dtype=float))

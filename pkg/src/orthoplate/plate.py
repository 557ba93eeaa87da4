"""Plate with a one-dimensional reinforcement along x.

The plate occupies ``(0, L) x (-ell, ell) x (-d/2, d/2)``, is hinged on the
short edges ``x = 0, L`` and free on the long edges ``y = +-ell``.  All energy
integrals are evaluated by composite Simpson quadrature on the field's grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import MaterialError
from .fields import DisplacementField, GridError, simpson_2d

SECOND = ("xx", "xy", "yy")
FOURTH = ("xxxx", "xxyy", "yyyy")


class PlateError(ValueError):
    pass


@dataclass(frozen=True)
class PlateGeometry:
    L: float
    ell: float
    d: float

    def __post_init__(self):
        for name in ("L", "ell", "d"):
            if not getattr(self, name) > 0:
                raise PlateError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def width(self) -> float:
        return 2.0 * self.ell


@dataclass(frozen=True)
class PlateMaterial:
    """Moduli ``E1 >= E2`` along and across the reinforcement, ``nu = nu12``.

    Everything else is derived.  ``E1 == E2`` is only accepted by
    :func:`derive_material` with ``allow_isotropic=True``.
    """

    E1: float
    E2: float
    nu: float

    def __post_init__(self):
        if not (self.E2 > 0 and self.E1 >= self.E2):
            raise MaterialError(f"reinforcement requires E1 > E2 > 0 (E1={self.E1}, E2={self.E2})")
        if not 0.0 < self.nu < 0.5:
            raise MaterialError(f"nu must lie in (0, 1/2), got {self.nu}")

    @property
    def nu21(self) -> float:
        return self.nu * self.E2 / self.E1

    @property
    def Kcal(self) -> float:
        return self.E2 / (1.0 - self.nu * self.nu21)

    @property
    def kappa(self) -> float:
        return (self.E1 - self.E2) / self.E2

    @property
    def mu12(self) -> float:
        return self.Kcal * (1.0 - self.nu) / 2.0


def derive_material(E1: float, E2: float, nu: float, *, allow_isotropic: bool = False) -> PlateMaterial:
    if E1 == E2 and not allow_isotropic:
        raise MaterialError("reinforcement requires E1 > E2; pass allow_isotropic=True for the kappa = 0 limit")
    if E1 < E2:
        raise MaterialError(f"reinforcement requires E1 > E2 (E1={E1}, E2={E2})")
    return PlateMaterial(float(E1), float(E2), float(nu))


def rigidity_thickness(material: PlateMaterial, d: float | None = None, R: float | None = None):
    """Return ``(d, R)`` from whichever one is given, using ``R = d^3 K / 12``."""
    if (d is None) == (R is None):
        raise PlateError("supply exactly one of thickness d or rigidity R")
    if d is not None:
        if not d > 0:
            raise PlateError(f"thickness must be positive, got {d}")
        return float(d), d**3 * material.Kcal / 12.0
    if not R > 0:
        raise PlateError(f"rigidity must be positive, got {R}")
    return float(np.cbrt(12.0 * R / material.Kcal)), float(R)


@dataclass(frozen=True)
class PlateModel:
    geometry: PlateGeometry
    material: PlateMaterial
    M: float
    R: float
    nu23: float = 0.2

    def __post_init__(self):
        if not self.M > 0:
            raise PlateError(f"mass density M must be positive, got {self.M}")
        if not self.R > 0:
            raise PlateError(f"rigidity R must be positive, got {self.R}")
        if not -1.0 < self.nu23 < 1.0:
            raise MaterialError(f"nu23 must lie in (-1, 1), got {self.nu23}")
        R_geo = self.geometry.d**3 * self.material.Kcal / 12.0
        if abs(R_geo - self.R) > 1e-12 * self.R:
            raise PlateError("rigidity and thickness are inconsistent with R = d^3 K / 12")

    @classmethod
    def build(cls, L, ell, material: PlateMaterial, M, *, d=None, R=None, nu23: float = 0.2) -> "PlateModel":
        d, R = rigidity_thickness(material, d=d, R=R)
        return cls(PlateGeometry(float(L), float(ell), d), material, float(M), R, float(nu23))

    @property
    def L(self) -> float:
        return self.geometry.L

    @property
    def ell(self) -> float:
        return self.geometry.ell

    @property
    def d(self) -> float:
        return self.geometry.d

    @property
    def nu(self) -> float:
        return self.material.nu

    @property
    def kappa(self) -> float:
        return self.material.kappa

    @property
    def energy_prefactor(self) -> float:
        """``d^3 K / 24``, i.e. ``R / 2``."""
        return self.R / 2.0

    def with_kappa(self, kappa: float) -> "PlateModel":
        """Same plate with ``E1`` changed so that the reinforcement ratio is ``kappa``."""
        mat = derive_material(self.material.E2 * (1.0 + kappa), self.material.E2, self.material.nu,
                              allow_isotropic=True)
        return PlateModel.build(self.L, self.ell, mat, self.M, d=self.d, nu23=self.nu23)


# ---------------------------------------------------------------------------
# Thickness reconstruction
# ---------------------------------------------------------------------------


def midplane_strains(material: PlateMaterial, uxx, uyy, uxy, z, nu23: float = 0.2):
    """Strains at height ``z`` for the given curvatures.

    Returns ``(e11, e22, e12, e13, e23, e33)``; ``e33`` enforces the vanishing
    of the normal stress through the thickness.
    """
    E1, E2, nu12 = material.E1, material.E2, material.nu
    e11 = -z * np.asarray(uxx, dtype=float)
    e22 = -z * np.asarray(uyy, dtype=float)
    e12 = -z * np.asarray(uxy, dtype=float)
    zero = np.zeros_like(e11)
    den = E1 - E2 * nu12**2
    e33 = -(nu12 * E1 * (1.0 + nu23) * e11 + (E1 * nu23 + E2 * nu12**2) * e22) / den
    return e11, e22, e12, zero, zero.copy(), e33


@dataclass(frozen=True)
class EnergyCoefficients:
    K11: float
    K22: float
    K1122: float
    K1212: float


def energy_coefficients_raw(E1, E2, nu12, nu23, mu12) -> EnergyCoefficients:
    """Coefficients of the plane-stress energy density in the curvatures."""
    if not -1.0 < nu23 < 1.0:
        raise MaterialError(f"nu23 must lie in (-1, 1), got {nu23}")
    nu21 = nu12 * E2 / E1
    delta = (1.0 + nu23) * (1.0 - nu23 - 2.0 * nu12 * nu21) / (E1 * E2**2)
    if not delta > 0:
        raise MaterialError(f"material inadmissible: delta = {delta:.6g} <= 0")
    num = (1.0 + nu23) * (E1 * (1.0 - nu23) - 2.0 * E2 * nu12**2)
    den = E1 - E2 * nu12**2
    return EnergyCoefficients(
        K11=num / (delta * E2**2 * den),
        K22=num / (delta * E1 * E2 * den),
        K1122=nu12 * num / (delta * E1 * E2 * den),
        K1212=2.0 * mu12,
    )


def energy_coefficients(material: PlateMaterial, nu23: float = 0.2) -> EnergyCoefficients:
    return energy_coefficients_raw(material.E1, material.E2, material.nu, nu23, material.mu12)


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------


def _second(field: DisplacementField):
    try:
        return field.d("xx"), field.d("xy"), field.d("yy")
    except KeyError as exc:
        raise PlateError(f"bending energy needs second derivatives: {exc}") from None


def bending_density(model: PlateModel, field: DisplacementField, form: str = "compact") -> np.ndarray:
    """Pointwise integrand of the bending energy, without the ``d^3 K/24`` factor.

    ``form`` selects an algebraically equivalent expression: ``"compact"``
    (Laplacian, Hessian and reinforcement terms), ``"expanded"`` (the four
    curvature products with ``E1/E2``) or ``"coefficients"`` (built from the
    plane-stress coefficients ``K11 ... K1212`` and divided by ``K``).
    """
    uxx, uxy, uyy = _second(field)
    nu, kappa = model.nu, model.kappa
    if form == "compact":
        lap = uxx + uyy
        hess = uxx**2 + 2.0 * uxy**2 + uyy**2
        return nu * lap**2 + (1.0 - nu) * hess + kappa * uxx**2
    if form == "expanded":
        mat = model.material
        return (mat.E1 / mat.E2) * uxx**2 + uyy**2 + 2.0 * nu * uxx * uyy + 2.0 * (1.0 - nu) * uxy**2
    if form == "coefficients":
        k = energy_coefficients(model.material, model.nu23)
        dens = k.K11 * uxx**2 + k.K22 * uyy**2 + 2.0 * k.K1122 * uxx * uyy + 2.0 * k.K1212 * uxy**2
        return dens / model.material.Kcal
    raise ValueError(f"unknown energy form {form!r}")


def bending_energy(model: PlateModel, field: DisplacementField, form: str = "compact") -> float:
    return model.energy_prefactor * simpson_2d(bending_density(model, field, form), field.x, field.y)


def isotropic_bending_energy(E: float, nu: float, d: float, field: DisplacementField) -> float:
    """Kirchhoff-Love energy of an isotropic plate, the ``kappa = 0`` reference."""
    uxx, uxy, uyy = _second(field)
    dens = nu * (uxx + uyy) ** 2 + (1.0 - nu) * (uxx**2 + 2.0 * uxy**2 + uyy**2)
    return E * d**3 / (24.0 * (1.0 - nu**2)) * simpson_2d(dens, field.x, field.y)


def _load_values(field: DisplacementField, f) -> np.ndarray:
    if callable(f):
        X, Y = np.meshgrid(field.x, field.y, indexing="ij")
        return np.asarray(f(X, Y), dtype=float) * np.ones(field.u.shape)
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(field.u.shape, float(f))
    if f.shape != field.u.shape:
        raise GridError(f"load has shape {f.shape}, field grid is {field.u.shape}")
    return f


def load_work(field: DisplacementField, f) -> float:
    return simpson_2d(_load_values(field, f) * field.u, field.x, field.y)


def total_energy(model: PlateModel, field: DisplacementField, f) -> float:
    """Bending energy minus the work of the vertical load ``f``.

    ``f`` may be a scalar, an array on the field grid or a callable ``f(x, y)``.
    """
    return bending_energy(model, field) - load_work(field, f)


def check_hinged(field: DisplacementField, tol: float = 1e-10) -> None:
    scale = max(np.abs(field.u).max(), 1e-300)
    edge = max(np.abs(field.u[0]).max(), np.abs(field.u[-1]).max())
    if edge > tol * scale:
        raise PlateError(f"field does not vanish on the hinged edges x = 0, L (max |u| = {edge:.3e})")


def h2star_inner(model: PlateModel, u: DisplacementField, v: DisplacementField, *, tol: float = 1e-10) -> float:
    """Energy inner product on fields vanishing at ``x = 0`` and ``x = L``."""
    if not u.same_grid(v):
        raise GridError("fields live on different grids")
    for w in (u, v):
        check_hinged(w, tol)
    uxx, uxy, uyy = _second(u)
    vxx, vxy, vyy = _second(v)
    nu, kappa = model.nu, model.kappa
    dens = (
        nu * (uxx + uyy) * (vxx + vyy)
        + (1.0 - nu) * (uxx * vxx + 2.0 * uxy * vxy + uyy * vyy)
        + kappa * uxx * vxx
    )
    return simpson_2d(dens, u.x, u.y)


def l2_inner(u: DisplacementField, v: DisplacementField) -> float:
    return simpson_2d(u.u * v.u, u.x, u.y)


# ---------------------------------------------------------------------------
# Equilibrium operator and boundary conditions
# ---------------------------------------------------------------------------


def plate_operator(model: PlateModel, field: DisplacementField, form: str = "model") -> np.ndarray:
    """Fourth-order operator applied to ``field`` on every node.

    ``form="model"`` evaluates ``R (Laplacian^2 u + kappa u_xxxx)``;
    ``form="familiar"`` uses the orthotropic plate coefficients
    ``E1 d^3 / (12 (1 - nu12 nu21))``, ``E2 d^3 / (6 ...)`` and ``E2 d^3 / (12 ...)``.
    """
    try:
        uxxxx, uxxyy, uyyyy = (field.d(k) for k in FOURTH)
    except KeyError as exc:
        raise PlateError(f"operator needs fourth derivatives: {exc}") from None
    if form == "model":
        return model.R * (uxxxx + 2.0 * uxxyy + uyyyy + model.kappa * uxxxx)
    if form == "familiar":
        mat, d = model.material, model.d
        den = 1.0 - mat.nu * mat.nu21
        D1 = mat.E1 * d**3 / (12.0 * den)
        D12 = mat.E2 * d**3 / (6.0 * den)
        D2 = mat.E2 * d**3 / (12.0 * den)
        return D1 * uxxxx + D12 * uxxyy + D2 * uyyyy
    raise ValueError(f"unknown operator form {form!r}")


def interior_residual(model: PlateModel, field: DisplacementField, f=0.0, form: str = "model") -> np.ndarray:
    """``A u - f`` at the interior nodes (array of shape ``(nx-2, ny-2)``)."""
    r = plate_operator(model, field, form) - _load_values(field, f)
    return r[1:-1, 1:-1]


@dataclass(frozen=True)
class BoundaryResiduals:
    """Max-norm of each boundary-condition family."""

    navier_value: float
    navier_curvature: float
    free_moment: float
    free_shear: float

    def max(self) -> float:
        return max(self.navier_value, self.navier_curvature, self.free_moment, self.free_shear)

    def as_dict(self) -> dict:
        return dict(
            navier_value=self.navier_value,
            navier_curvature=self.navier_curvature,
            free_moment=self.free_moment,
            free_shear=self.free_shear,
        )


def boundary_residuals(model: PlateModel, field: DisplacementField) -> BoundaryResiduals:
    """Hinged conditions on ``x = 0, L`` and free-edge conditions on ``y = +-ell``."""
    nu = model.nu
    u, uxx = field.u, field.d("xx")
    uyy, uyyy, uxxy = field.d("yy"), field.d("yyy"), field.d("xxy")
    x_edges = (0, -1)
    y_edges = (0, -1)
    moment = np.concatenate([uyy[:, j] + nu * uxx[:, j] for j in y_edges])
    shear = np.concatenate([uyyy[:, j] + (2.0 - nu) * uxxy[:, j] for j in y_edges])
    return BoundaryResiduals(
        navier_value=float(max(np.abs(u[i]).max() for i in x_edges)),
        navier_curvature=float(max(np.abs(uxx[i]).max() for i in x_edges)),
        free_moment=float(np.abs(moment).max()),
        free_shear=float(np.abs(shear).max()),
    )

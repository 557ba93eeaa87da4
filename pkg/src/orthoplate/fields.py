"""Tensor-product grids over the plate and displacement fields sampled on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

#: derivative keys a field may carry; letters name the differentiation variables
DERIVATIVE_KEYS = ("x", "y", "xx", "xy", "yy", "xxy", "yyy", "xxxx", "xxyy", "yyyy")


class GridError(ValueError):
    pass


class MissingDerivativeError(KeyError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform ``nx x ny`` node grid on ``[0, L] x [-ell, ell]``.

    Both sizes must be odd and at least 5 so composite Simpson applies.
    """

    L: float
    ell: float
    nx: int = 201
    ny: int = 41

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if n < 5 or n % 2 == 0:
                raise GridError(f"{name} must be odd and >= 5 for Simpson quadrature, got {n}")
        if not (self.L > 0 and self.ell > 0):
            raise GridError("grid extents must be positive")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(-self.ell, self.ell, self.ny)

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")


def simpson_2d(values, x, y) -> float:
    """Composite Simpson over a tensor grid; ``values`` is indexed ``[ix, iy]``."""
    values = np.asarray(values, dtype=float)
    if len(x) % 2 == 0 or len(y) % 2 == 0:
        raise GridError("Simpson quadrature needs odd node counts in both directions")
    return float(simpson(simpson(values, x=y, axis=1), x=x))


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Vertical displacement ``u`` on a grid, with optional derivatives.

    Arrays are indexed ``[ix, iy]``.  ``exact`` marks fields whose derivatives
    come from a closed-form (modal) representation rather than stencils.
    """

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    derivs: dict = field(default_factory=dict)
    exact: bool = False

    def __post_init__(self):
        shape = (len(self.x), len(self.y))
        if self.u.shape != shape:
            raise GridError(f"u has shape {self.u.shape}, grid is {shape}")
        for k, v in self.derivs.items():
            if k not in DERIVATIVE_KEYS:
                raise KeyError(f"unknown derivative key {k!r}")
            if v.shape != shape:
                raise GridError(f"derivative {k!r} has shape {v.shape}, grid is {shape}")

    def d(self, key: str) -> np.ndarray:
        if key == "":
            return self.u
        try:
            return self.derivs[key]
        except KeyError:
            raise MissingDerivativeError(f"field carries no {key!r} derivative") from None

    def has(self, *keys: str) -> bool:
        return all(k in self.derivs for k in keys)

    @property
    def grid_shape(self):
        return self.u.shape

    def same_grid(self, other: "DisplacementField") -> bool:
        return (
            self.u.shape == other.u.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    @classmethod
    def zeros(cls, grid: Grid) -> "DisplacementField":
        z = np.zeros((grid.nx, grid.ny))
        return cls(grid.x, grid.y, z, {k: z for k in DERIVATIVE_KEYS}, exact=True)

    @classmethod
    def from_samples(cls, x, y, u) -> "DisplacementField":
        """Differentiate nodal samples numerically.

        Second-order centred differences inside, second-order one-sided at
        the edges (``numpy.gradient`` with ``edge_order=2``).  Higher
        derivatives are obtained by repeated application and lose accuracy
        near the boundary.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)

        def dx(a):
            return np.gradient(a, x, axis=0, edge_order=2)

        def dy(a):
            return np.gradient(a, y, axis=1, edge_order=2)

        d = {"x": dx(u), "y": dy(u)}
        d["xx"] = dx(d["x"])
        d["yy"] = dy(d["y"])
        d["xy"] = dy(d["x"])
        d["xxy"] = dy(d["xx"])
        d["yyy"] = dy(d["yy"])
        d["xxxx"] = dx(dx(d["xx"]))
        d["xxyy"] = dy(dy(d["xx"]))
        d["yyyy"] = dy(dy(d["yy"]))
        return cls(x, y, u, d, exact=False)

    def _combine(self, other, a: float, b: float) -> "DisplacementField":
        if not self.same_grid(other):
            raise GridError("fields live on different grids")
        keys = set(self.derivs) & set(other.derivs)
        d = {k: a * self.derivs[k] + b * other.derivs[k] for k in keys}
        return DisplacementField(self.x, self.y, a * self.u + b * other.u, d, self.exact and other.exact)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, c):
        c = float(c)
        return DisplacementField(self.x, self.y, c * self.u, {k: c * v for k, v in self.derivs.items()}, self.exact)

    __rmul__ = __mul__

    def to_csv(self, path) -> None:
        write_grid_csv(path, self.x, self.y, self.u)


def write_grid_csv(path, x, y, values, name: str = "u") -> None:
    """``x,y,<name>`` rows, x-major with y varying fastest, full precision."""
    X, Y = np.meshgrid(x, y, indexing="ij")
    data = np.column_stack([X.ravel(), Y.ravel(), np.asarray(values, dtype=float).ravel()])
    with open(path, "w", newline="\n") as fh:
        fh.write(f"x,y,{name}\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_grid_csv(path, grid: Grid | None = None):
    """Read an ``x,y,value`` CSV written in :func:`write_grid_csv` order.

    Returns ``(x, y, values)``.  When ``grid`` is given the node coordinates
    must match it to 1e-9 relative, otherwise :class:`GridError` is raised.
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 3 or header[:2] != ["x", "y"]:
            raise GridError(f"{path}: expected header 'x,y,<value>', got {','.join(header)!r}")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise GridError(f"{path}: {exc}") from None
    if data.shape[1] != 3:
        raise GridError(f"{path}: expected 3 columns")
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    if len(x) * len(y) != len(data):
        raise GridError(f"{path}: rows do not form a tensor grid")
    values = data[:, 2].reshape(len(x), len(y))
    if not (np.array_equal(data[:, 0].reshape(len(x), len(y))[:, 0], x)):
        raise GridError(f"{path}: rows are not in x-major, y-fastest order")
    if grid is not None:
        if (len(x), len(y)) != (grid.nx, grid.ny):
            raise GridError(f"{path}: grid {len(x)}x{len(y)} does not match {grid.nx}x{grid.ny}")
        scale = max(grid.L, grid.ell)
        if np.abs(x - grid.x).max() > 1e-9 * scale or np.abs(y - grid.y).max() > 1e-9 * scale:
            raise GridError(f"{path}: node coordinates do not match the configured grid")
    return x, y, values


def _sine_nodes(mu: float, x: np.ndarray) -> np.ndarray:
    """``sin(mu x)`` with exact zeros where ``mu x`` is a multiple of pi (the hinged edges)."""
    s = np.sin(mu * x)
    k = mu * x / np.pi
    s[np.abs(k - np.round(k)) <= 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(k))] = 0.0
    return s


def modal_field(x, y, terms) -> DisplacementField:
    """Field ``sum_m amp * sin(mu x) Y(y)`` with exact derivatives.

    ``terms`` yields ``(mu, amp, D)`` where ``D`` has shape ``(5, len(y))``
    holding ``Y, Y', Y'', Y''', Y''''`` at the nodes ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = (len(x), len(y))
    u = np.zeros(shape)
    d = {k: np.zeros(shape) for k in DERIVATIVE_KEYS}
    for mu, amp, D in terms:
        s = amp * _sine_nodes(mu, x)[:, None]
        c = amp * np.cos(mu * x)[:, None]
        Y0, Y1, Y2, Y3, Y4 = (np.asarray(row)[None, :] for row in D)
        mu2 = mu * mu
        u += s * Y0
        d["x"] += mu * c * Y0
        d["y"] += s * Y1
        d["xx"] += -mu2 * s * Y0
        d["xy"] += mu * c * Y1
        d["yy"] += s * Y2
        d["xxy"] += -mu2 * s * Y1
        d["yyy"] += s * Y3
        d["xxxx"] += mu2 * mu2 * s * Y0
        d["xxyy"] += -mu2 * s * Y2
        d["yyyy"] += s * Y4
    return DisplacementField(x, y, u, d, exact=True)

"""Periodic torus grids, unitary DFTs, quadrature and discrete norms.

Every continuous object in the package lives on a flat torus
``[0, length)^dim`` sampled at ``n`` points per axis.  Fourier coefficients use
the unitary ("ortho") normalisation, so Parseval holds exactly in the sense

    sum_j |f(x_j)|^2 == sum_k |f_hat(k)|^2

and the continuous L2 norm is recovered by the quadrature weight
``(length / n) ** dim``.  Spectral arrays are kept in numpy FFT order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "FieldPair",
    "make_grid",
    "transform",
    "inverse_transform",
    "norm_hk",
    "norm_lp",
    "inner",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus ``[0, length)^dim``.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1, 2 or 3.
    n : int
        Points per dimension; a power of two, at least 8.
    length : float
        Period of the torus along every axis.
    """

    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not isinstance(self.n, (int, np.integer)) or not _is_power_of_two(int(self.n)):
            raise ValueError(f"n must be a power of two, got {self.n!r}")
        if self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length!r}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def weight(self) -> float:
        """Quadrature weight of one grid cell."""
        return self.dx**self.dim

    @property
    def volume(self) -> float:
        return self.length**self.dim

    @cached_property
    def mode_indices(self) -> np.ndarray:
        """Integer mode offsets in ``[-n/2, n/2)`` along one axis, FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)

    @cached_property
    def axis_wavenumbers(self) -> np.ndarray:
        """Wavenumbers ``2 pi k / length`` along one axis, FFT order."""
        return 2.0 * np.pi / self.length * self.mode_indices

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Wavevector table of shape ``(dim, n, ..., n)``."""
        k = self.axis_wavenumbers
        return np.array(np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        """``|xi|^2`` per mode."""
        return np.sum(self.wavenumbers**2, axis=0)

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def nyquist(self) -> np.ndarray:
        """Boolean mask of modes with a Nyquist index along some axis."""
        idx = np.array(np.meshgrid(*([self.mode_indices] * self.dim), indexing="ij"))
        return np.any(idx == -self.n // 2, axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keeps modes with ``|index| < n/3`` on every axis."""
        idx = np.array(np.meshgrid(*([self.mode_indices] * self.dim), indexing="ij"))
        return np.all(np.abs(idx) < self.n / 3.0, axis=0)

    @cached_property
    def points(self) -> np.ndarray:
        """Physical coordinates of shape ``(dim, n, ..., n)``."""
        x = np.arange(self.n) * self.dx
        return np.array(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def derivative_symbol(self, alpha: tuple[int, ...]) -> np.ndarray:
        """Symbol of ``d^alpha`` (one order per axis), Nyquist zeroed for odd orders."""
        sym = np.ones(self.shape, dtype=complex)
        for axis, order in enumerate(alpha):
            if order:
                sym = sym * (1j * self.wavenumbers[axis]) ** order
        if sum(alpha) % 2:
            sym = np.where(self.nyquist, 0.0, sym)
        return sym

    def compatible(self, other: "Grid") -> bool:
        return self == other


def make_grid(dim: int, n: int, length: float = 2.0 * np.pi) -> Grid:
    """Build a :class:`Grid`; validates ``dim``, ``n`` and ``length``."""
    return Grid(int(dim), int(n), float(length))


def transform(values: np.ndarray) -> np.ndarray:
    """Unitary forward DFT over all axes."""
    return np.fft.fftn(values, norm="ortho")


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT over all axes."""
    return np.fft.ifftn(coeffs, norm="ortho")


class Field:
    """Complex field on a grid, with a lazily cached spectral view.

    The physical samples are the source of truth unless the field was built
    with :meth:`from_spectral`, in which case the physical view is computed on
    first access.  Treat instances as values: arithmetic returns new fields.
    """

    __slots__ = ("grid", "_values", "_spectral")

    def __init__(self, grid: Grid, values=None, *, spectral=None):
        self.grid = grid
        if values is None and spectral is None:
            raise ValueError("need physical values or spectral coefficients")
        self._values = None if values is None else np.asarray(values, dtype=complex)
        self._spectral = None if spectral is None else np.asarray(spectral, dtype=complex)
        arr = self._values if self._values is not None else self._spectral
        if arr.shape != grid.shape:
            raise ValueError(f"shape {arr.shape} does not match grid shape {grid.shape}")

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs) -> "Field":
        return cls(grid, spectral=coeffs)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        """Sample ``func(*coords)`` on the grid points."""
        return cls(grid, func(*grid.points))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = inverse_transform(self._spectral)
        return self._values

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            self._spectral = transform(self._values)
        return self._spectral

    @property
    def consistent(self) -> bool:
        """True when both views are materialised (they then describe one field)."""
        return self._values is not None and self._spectral is not None

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values))

    def copy(self) -> "Field":
        out = Field.__new__(Field)
        out.grid = self.grid
        out._values = None if self._values is None else self._values.copy()
        out._spectral = None if self._spectral is None else self._spectral.copy()
        return out

    def _check(self, other: "Field"):
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            self._check(scalar)
            return Field(self.grid, self.values * scalar.values)
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__
    __radd__ = __add__

    def __repr__(self):
        return f"Field(grid={self.grid!r})"


@dataclass
class FieldPair:
    """Two-component state ``(psi, phi)`` sharing one grid."""

    psi: Field
    phi: Field

    def __post_init__(self):
        if self.psi.grid != self.phi.grid:
            raise ValueError("psi and phi must share one grid")

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    def __iter__(self):
        yield self.psi
        yield self.phi


def norm_lp(field: Field, p: float = 2.0) -> float:
    """L^p norm by grid quadrature of ``|f|^p``."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    g = field.grid
    return float((g.weight * np.sum(np.abs(field.values) ** p)) ** (1.0 / p))


def norm_hk(field: Field, k: float = 0.0) -> float:
    """Sobolev norm with weight ``<xi>^(2k)``, ``<xi> = (1 + |xi|^2)^(1/2)``.

    Scaled by the quadrature weight so that ``norm_hk(f, 0) == norm_lp(f, 2)``.
    """
    g = field.grid
    weight = (1.0 + g.k2) ** k
    return float(np.sqrt(g.weight * np.sum(weight * np.abs(field.spectral) ** 2)))


def inner(f: Field, g: Field) -> complex:
    """Bilinear pairing ``int f g dx`` (no conjugation) by quadrature."""
    f._check(g)
    return complex(f.grid.weight * np.sum(f.values * g.values))

"""Fourier multipliers: relativistic operators, smoothing, Littlewood-Paley.

A multiplier acts diagonally on spectral coefficients.  Symbols are written in
overflow-safe forms (``hypot``) so that ``c`` up to ~1e6 is harmless.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Field, Grid

__all__ = [
    "Multiplier",
    "PhysicalParams",
    "japc",
    "smoothing",
    "japc_apply",
    "smoothing_apply",
    "norm_hck",
    "norm_wckp",
    "bump",
    "lp_symbol",
    "lp_projector",
    "lp_cutoff",
    "sharp_projector",
    "square_function_constants",
    "cutoff_bound",
    "to_complex",
    "from_complex",
    "real_hamiltonian",
    "complex_hamiltonian",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Speed of light ``c``, coupling ``lam`` and nonlinearity power ``l``."""

    c: float
    lam: float = 1.0
    l: int = 2

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if int(self.l) != self.l or self.l < 2:
            raise ValueError(f"l must be an integer >= 2, got {self.l!r}")

    @property
    def eps(self) -> float:
        return 1.0 / self.c**2


@dataclass(frozen=True)
class Multiplier:
    """Diagonal Fourier operator ``m(D)``.

    ``symbol`` maps a :class:`Grid` to the array ``m(xi)`` over its modes.
    """

    name: str
    symbol: Callable[[Grid], np.ndarray]
    params: dict = field(default_factory=dict, compare=False)

    def on(self, grid: Grid) -> np.ndarray:
        return np.broadcast_to(self.symbol(grid), grid.shape)

    def apply(self, f: Field) -> Field:
        return Field.from_spectral(f.grid, self.on(f.grid) * f.spectral)

    __call__ = apply

    def __matmul__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(
            f"{self.name}*{other.name}",
            lambda g, a=self, b=other: a.on(g) * b.on(g),
            {**other.params, **self.params},
        )

    def __pow__(self, power: float) -> "Multiplier":
        return Multiplier(f"({self.name})^{power}", lambda g, a=self: a.on(g) ** power, dict(self.params))


def japc(c: float, k: float = 1.0) -> Multiplier:
    """``<nabla>_c^k = (c^2 - Delta)^(k/2)``."""
    return Multiplier("japc", lambda g: np.hypot(c, g.kabs) ** k, {"c": c, "k": k})


def smoothing(c: float, k: float = 1.0) -> Multiplier:
    """``(c / <nabla>_c)^k``; equals 1 on the zero mode."""
    return Multiplier("smoothing", lambda g: (c / np.hypot(c, g.kabs)) ** k, {"c": c, "k": k})


def japc_apply(f: Field, c: float, k: float = 1.0) -> Field:
    return japc(c, k).apply(f)


def smoothing_apply(f: Field, c: float, k: float = 1.0) -> Field:
    return smoothing(c, k).apply(f)


def norm_hck(f: Field, c: float, k: float) -> float:
    """Relativistic Sobolev norm ``|| c^-k <nabla>_c^k f ||_{L2}`` (exact spectral sum)."""
    g = f.grid
    sym = (np.hypot(c, g.kabs) / c) ** k
    return float(np.sqrt(g.weight * np.sum(np.abs(sym * f.spectral) ** 2)))


def norm_wckp(f: Field, c: float, k: float, p: float) -> float:
    """``W_c^{k,p}`` norm by quadrature of the multiplier output."""
    from .grid import norm_lp

    out = Multiplier("rel", lambda g: (np.hypot(c, g.kabs) / c) ** k).apply(f)
    return norm_lp(out, p)


# -- Littlewood-Paley -------------------------------------------------------


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, from exp(-1/t)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        s = 1.0 - t
        b = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return a / (a + b)


def bump(r: np.ndarray) -> np.ndarray:
    """Radial bump ``phi_0``: 1 for ``r <= 1/2``, 0 for ``r >= 1``, smooth between."""
    return _smooth_step(2.0 * (1.0 - np.asarray(r, dtype=float)))


def lp_symbol(j: int, r: np.ndarray) -> np.ndarray:
    """Dyadic piece ``phi_j`` evaluated at radius ``r``."""
    if j < 0:
        raise ValueError("j must be non-negative")
    if j == 0:
        return bump(r)
    s = np.asarray(r, dtype=float) * 2.0 ** (1 - j)
    return bump(s / 2.0) - bump(s)


def lp_projector(f: Field, j: int) -> Field:
    return Field.from_spectral(f.grid, lp_symbol(j, f.grid.kabs) * f.spectral)


def lp_cutoff(f: Field, N: int) -> Field:
    """``Pi_N = sum_{j <= N} phi_j(D)``, which telescopes to ``phi_0(2^-N D)``."""
    total = sum(lp_symbol(j, f.grid.kabs) for j in range(N + 1))
    return Field.from_spectral(f.grid, total * f.spectral)


def sharp_projector(f: Field, N: float) -> Field:
    """Zero every mode with ``|xi| > N``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    g = f.grid
    return Field.from_spectral(g, np.where(g.kabs <= N, f.spectral, 0.0))


def square_function_constants(grid: Grid, J: int | None = None) -> tuple[float, float]:
    """Constants ``(K1, K2)`` of the discrete L2 square-function equivalence.

    ``K1 (sum_j ||pi_j f||^2)^(1/2) <= ||f|| <= K2 (sum_j ||pi_j f||^2)^(1/2)``.
    """
    if J is None:
        J = int(np.ceil(np.log2(max(grid.kabs.max(), 1.0)))) + 2
    s = sum(lp_symbol(j, grid.kabs) ** 2 for j in range(J + 1))
    return float(1.0 / np.sqrt(s.max())), float(1.0 / np.sqrt(s.min()))


def cutoff_bound(grid: Grid, J: int | None = None) -> float:
    """Computed ``sup_xi |Pi_j(xi)|`` over ``j <= J`` (the L2 operator bound ``K'``)."""
    if J is None:
        J = int(np.ceil(np.log2(max(grid.kabs.max(), 1.0)))) + 2
    return float(max(np.abs(sum(lp_symbol(i, grid.kabs) for i in range(j + 1))).max() for j in range(J + 1)))


# -- symplectic change of variables -----------------------------------------


def to_complex(u: Field, v: Field, c: float) -> Field:
    """``psi = [(<nabla>_c/c)^(1/2) u - i (c/<nabla>_c)^(1/2) v] / sqrt(2)``."""
    _require_real(u, "u")
    _require_real(v, "v")
    g = u.grid
    a = np.sqrt(np.hypot(c, g.kabs) / c)
    return Field.from_spectral(g, (a * u.spectral - 1j * v.spectral / a) / np.sqrt(2.0))


def from_complex(psi: Field, c: float, tol: float = 1e-10) -> tuple[Field, Field]:
    """Inverse of :func:`to_complex`; returns real ``(u, v)``."""
    g = psi.grid
    a = np.sqrt(np.hypot(c, g.kabs) / c)
    p = psi.values
    pbar_hat = np.fft.fftn(np.conj(p), norm="ortho")
    u = np.fft.ifftn((psi.spectral + pbar_hat) / a, norm="ortho") / np.sqrt(2.0)
    v = 1j * np.fft.ifftn(a * (psi.spectral - pbar_hat), norm="ortho") / np.sqrt(2.0)
    for name, arr in (("u", u), ("v", v)):
        scale = max(np.abs(arr).max(), 1.0)
        if np.abs(arr.imag).max() > tol * scale:
            raise ValueError(f"recovered {name} has an imaginary residue above {tol}")
    return Field(g, u.real), Field(g, v.real)


def _require_real(f: Field, name: str, tol: float = 1e-10):
    scale = max(np.abs(f.values).max(), 1.0)
    if np.abs(f.values.imag).max() > tol * scale:
        raise ValueError(f"{name} must be real-valued")


def real_hamiltonian(u: Field, v: Field, params: PhysicalParams) -> float:
    """``c^2/2 <v,v> + 1/2 <u, <nabla>_c^2 u> + lam int u^(2l) / (2l)``."""
    g = u.grid
    c, lam, l = params.c, params.lam, params.l
    kin = 0.5 * c**2 * g.weight * np.sum(v.values.real**2)
    pot = 0.5 * g.weight * np.sum((c**2 + g.k2) * np.abs(u.spectral) ** 2)
    nl = lam / (2 * l) * g.weight * np.sum(u.values.real ** (2 * l))
    return float(kin + pot + nl)


def complex_hamiltonian(psi: Field, params: PhysicalParams) -> float:
    """``<psi_bar, c <nabla>_c psi> + lam/(2l) int [S (psi + psi_bar)/sqrt 2]^(2l)``."""
    g = psi.grid
    c, lam, l = params.c, params.lam, params.l
    quad = g.weight * np.sum(c * np.hypot(c, g.kabs) * np.abs(psi.spectral) ** 2)
    s = np.sqrt(c / np.hypot(c, g.kabs))
    w = np.fft.ifftn(s * psi.spectral, norm="ortho").real * np.sqrt(2.0)
    nl = lam / (2 * l) * g.weight * np.sum(w ** (2 * l))
    return float(quad + nl)

"""Compile symbolic Hamiltonians into grid functionals and vector fields.

A Gram variable ``xi_i . xi_j`` becomes ``sum_a (-i d_a f_i)(-i d_a f_j)``, so a
symbol monomial with ``E`` Gram variables evaluates to
``(-1)^E sum_{axes} prod_i d^{alpha_i} f_i``.  Derivatives are spectral, products
pointwise.  Compiled objects are pure: they cache only per-call derivative
tables.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import product

import numpy as np

from ..grid import Field, Grid
from .poly import PHI, PHIBAR, PSI, PSIBAR, HamPoly, grade
from .symbols import substitute_out

__all__ = [
    "CompiledHamiltonian",
    "compile_hamiltonian",
    "compile_vector_field",
    "evaluate",
    "numeric_gauge_average_oracle",
    "quadratic_symbol",
]


def _alpha_table(types, mono, dim):
    """Expand one Gram monomial into ``{alphas: multiplicity}`` over axis choices."""
    n = len(types)
    out: dict = defaultdict(int)
    for axes in product(range(dim), repeat=len(mono)):
        alpha = [[0] * dim for _ in range(n)]
        for (i, j), a in zip(mono, axes):
            alpha[i][a] += 1
            alpha[j][a] += 1
        out[tuple(tuple(x) for x in alpha)] += 1
    return out


def _as_terms(H) -> list[tuple[HamPoly, float]]:
    if isinstance(H, HamPoly):
        return [(H, 1.0)]
    return [(h, float(w)) for h, w in H]


class CompiledHamiltonian:
    """Numeric evaluator for ``sum_k w_k H_k`` on a fixed grid.

    Parameters
    ----------
    H : HamPoly or iterable of (HamPoly, weight)
        Symbolic Hamiltonian(s); weights are real scalars (e.g. powers of eps).
    grid : Grid
    lam : float
        Numerical value substituted for the coupling.
    dealias : bool
        Apply the 2/3 mask to derivative inputs and to gradients.
    """

    def __init__(self, H, grid: Grid, lam: float = 1.0, dealias: bool = True):
        self.grid = grid
        self.lam = float(lam)
        self.dealias = dealias
        self.types_present: set = set()
        # energy: list of (coeff, ((type, alpha), ...))
        energy: dict = defaultdict(complex)
        grads: dict = {t: defaultdict(complex) for t in (PSIBAR, PHIBAR, PSI, PHI)}
        for h, w in _as_terms(H):
            for types, ldeg, poly in h.items():
                self.types_present.update(types)
                scale = w * self.lam**ldeg
                for mono, q in poly.items():
                    c = complex(q) * scale * (-1) ** len(mono)
                    for alphas, mult in _alpha_table(types, mono, grid.dim).items():
                        key = tuple(sorted(zip(types, alphas)))
                        energy[key] += c * mult
                for t in set(types):
                    count = types.count(t)
                    p = types.index(t)
                    rest = types[:p] + types[p + 1:]
                    sub = substitute_out(poly, len(types), p)
                    for mono, q in sub.items():
                        c = complex(q) * scale * count * (-1) ** len(mono)
                        for alphas, mult in _alpha_table(rest, mono, grid.dim).items():
                            key = tuple(sorted(zip(rest, alphas)))
                            grads[t][key] += c * mult
        self._energy = [(c, k) for k, c in energy.items() if c != 0]
        self._grads = {t: [(c, k) for k, c in g.items() if c != 0] for t, g in grads.items()}
        self.two_component = any(t[0] == 2 for t in self.types_present)

    # -- evaluation helpers -------------------------------------------------

    def _tables(self, psi_hat: np.ndarray, phi_hat: np.ndarray | None):
        g = self.grid
        mask = g.dealias_mask if self.dealias else None
        base = {}
        for t, s in ((PSI, psi_hat), (PHI, phi_hat)):
            if s is None:
                continue
            sb = np.fft.fftn(np.conj(np.fft.ifftn(s, norm="ortho")), norm="ortho")
            if mask is not None:
                s, sb = s * mask, sb * mask
            base[t] = s
            base[(t[0], True)] = sb
        cache: dict = {}

        def get(t, alpha):
            key = (t, alpha)
            if key not in cache:
                if not any(alpha):
                    cache[key] = np.fft.ifftn(base[t], norm="ortho")
                else:
                    cache[key] = np.fft.ifftn(g.derivative_symbol(alpha) * base[t], norm="ortho")
            return cache[key]

        return get

    @staticmethod
    def _sum(terms, get, shape):
        out = np.zeros(shape, dtype=complex)
        for c, factors in terms:
            prod = c
            for t, alpha in factors:
                prod = prod * get(t, alpha)
            out = out + prod
        return out

    def _spectra(self, state):
        if isinstance(state, Field):
            if self.two_component:
                raise ValueError("this Hamiltonian needs a two-component state")
            return state.spectral, None
        psi, phi = state
        return psi.spectral, (None if phi is None else phi.spectral)

    # -- array API (spectral in, spectral out) -------------------------------

    def energy_arrays(self, psi_hat, phi_hat=None) -> complex:
        get = self._tables(psi_hat, phi_hat)
        dens = self._sum(self._energy, get, self.grid.shape)
        return complex(self.grid.weight * np.sum(dens))

    def gradient_arrays(self, psi_hat, phi_hat=None, wrt=PSIBAR) -> np.ndarray:
        get = self._tables(psi_hat, phi_hat)
        return self._gradient_from(get, wrt)

    def _gradient_from(self, get, wrt):
        out = np.fft.fftn(self._sum(self._grads[wrt], get, self.grid.shape), norm="ortho")
        if self.dealias:
            out = out * self.grid.dealias_mask
        return out

    def vector_field_arrays(self, psi_hat, phi_hat=None):
        get = self._tables(psi_hat, phi_hat)
        vpsi = 1j * self._gradient_from(get, PSIBAR)
        if phi_hat is None:
            return vpsi, None
        return vpsi, -1j * self._gradient_from(get, PHIBAR)

    # -- public API ---------------------------------------------------------

    def energy(self, state) -> complex:
        """``H(state)`` by quadrature."""
        return self.energy_arrays(*self._spectra(state))

    def gradient(self, state, wrt=PSIBAR) -> Field:
        """Variational derivative ``dH/d(wrt)`` as a field (L2 pairing, no conjugation)."""
        return Field.from_spectral(self.grid, self.gradient_arrays(*self._spectra(state), wrt=wrt))

    def vector_field(self, state):
        """``X_H``: ``i dH/dpsi_bar`` (and ``-i dH/dphi_bar`` for component 2)."""
        psi_hat, phi_hat = self._spectra(state)
        vpsi, vphi = self.vector_field_arrays(psi_hat, phi_hat)
        if vphi is None:
            return Field.from_spectral(self.grid, vpsi)
        return Field.from_spectral(self.grid, vpsi), Field.from_spectral(self.grid, vphi)

    __call__ = vector_field


def compile_hamiltonian(H, grid: Grid, lam: float = 1.0, dealias: bool = True) -> CompiledHamiltonian:
    return CompiledHamiltonian(H, grid, lam, dealias)


def compile_vector_field(H, grid: Grid, lam: float = 1.0, dealias: bool = True):
    """Evaluator ``state -> X_H(state)`` for a symbolic Hamiltonian."""
    return CompiledHamiltonian(H, grid, lam, dealias).vector_field


def evaluate(H, state, lam: float = 1.0) -> complex:
    """Evaluate ``H`` at a field (or ``(psi, phi)`` pair) without dealiasing."""
    grid = state.grid if isinstance(state, Field) else state[0].grid
    return CompiledHamiltonian(H, grid, lam, dealias=False).energy(state)


def _rotate(state, t: float):
    if isinstance(state, Field):
        return Field(state.grid, np.exp(1j * t) * state.values)
    psi, phi = state
    return Field(psi.grid, np.exp(1j * t) * psi.values), Field(phi.grid, np.exp(-1j * t) * phi.values)


def numeric_gauge_average_oracle(H: HamPoly, state, Q: int | None = None, lam: float = 1.0) -> complex:
    """Trapezoid average of ``H`` along the gauge orbit over ``[0, 2 pi)``.

    Exact for ``Q >= 2 * max|grade| + 1``.
    """
    gmax = max((abs(grade(t)) for t, _, _ in H.items()), default=0)
    if Q is None:
        Q = 2 * gmax + 1
    if Q < 2 * gmax + 1:
        raise ValueError(f"need at least {2 * gmax + 1} quadrature points, got {Q}")
    grid = state.grid if isinstance(state, Field) else state[0].grid
    comp = CompiledHamiltonian(H, grid, lam, dealias=False)
    ts = 2.0 * np.pi * np.arange(Q) / Q
    return complex(np.mean([comp.energy(_rotate(state, t)) for t in ts]))


def quadratic_symbol(H: HamPoly, grid: Grid, comp: int = 1, lam: float = 1.0) -> np.ndarray:
    """Multiplier ``m(xi)`` with ``dH_2/dpsi_bar = m(D) psi`` for the quadratic part of ``H``.

    Only grade-zero quadratic terms ``psi psi_bar`` are allowed.
    """
    out = np.zeros(grid.shape)
    for types, ldeg, poly in H.quadratic_part().items():
        if grade(types) != 0 or types[0][0] != types[1][0]:
            raise ValueError("quadratic part must be a sum of gauge-invariant psi psi_bar terms")
        if types[0][0] != comp:
            continue
        for mono, q in poly.items():
            if any(p != (0, 0) for p in mono):
                raise ValueError("unexpected canonical quadratic symbol")
            if q.im:
                raise ValueError("quadratic symbol must be real")
            out = out + float(q.re) * lam**ldeg * grid.k2 ** len(mono)
    return out

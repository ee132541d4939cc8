"""Poisson brackets, gauge averaging and the order-r normal form.

Bracket convention: ``{F, G} = dG . X_F`` with
``X_F = (i dF/dpsi_bar, -i dF/dpsi)`` on component 1 and the opposite sign on
component 2, so that

    {F, G} = i int (dF/dpsi_bar dG/dpsi - dF/dpsi dG/dpsi_bar)
           - i int (dF/dphi_bar dG/dphi - dF/dphi dG/dphi_bar).

With ``h0 = int |psi|^2 (+ int |phi|^2)`` every monomial ``M`` of gauge grade
``n`` satisfies ``{M, h0} = -i n M``, so the homological equation
``{chi, h0} + F = <F>`` is solved by dividing coefficients by ``i n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb, factorial

from .gaussian import QI
from .poly import PHI, PHIBAR, PSI, PSIBAR, Factor, HamPoly, Monomial, grade
from .symbols import contract, poly_add, poly_scale

__all__ = [
    "binomial",
    "DispersionCoeffs",
    "dispersion_coeffs",
    "h0",
    "poisson_bracket",
    "gauge_average",
    "solve_homological",
    "expand_dispersion",
    "expand_nonlinearity",
    "NormalForm",
    "normal_form",
    "MAX_ORDER",
]

MAX_ORDER = 3


def binomial(alpha: Fraction, j: int) -> Fraction:
    """Generalised binomial coefficient ``alpha choose j``."""
    out = Fraction(1)
    for k in range(j):
        out *= (alpha - k) / Fraction(k + 1)
    return out


@dataclass(frozen=True)
class DispersionCoeffs:
    """``a_j = (-1)^j binom(1/2, j)`` and ``b_j = (-1)^j binom(-1/4, j)``, j = 1..r."""

    a: tuple[Fraction, ...]
    b: tuple[Fraction, ...]


def dispersion_coeffs(r: int) -> DispersionCoeffs:
    if r < 1:
        raise ValueError("r must be at least 1")
    a = tuple((-1) ** j * binomial(Fraction(1, 2), j) for j in range(1, r + 1))
    b = tuple((-1) ** j * binomial(Fraction(-1, 4), j) for j in range(1, r + 1))
    return DispersionCoeffs(a, b)


def h0(complex_case: bool = False) -> HamPoly:
    """Gauge generator ``int psi_bar psi`` (plus ``int phi_bar phi``)."""
    monos = [Monomial(QI(1), (Factor(1, False), Factor(1, True)))]
    if complex_case:
        monos.append(Monomial(QI(1), (Factor(2, False), Factor(2, True))))
    return HamPoly.from_monomials(monos, tag="h0", order=0)


# -- bracket ------------------------------------------------------------------

_PAIRINGS = (
    # (type differentiated in F, type differentiated in G, sign)
    (PSIBAR, PSI, QI(0, 1)),
    (PSI, PSIBAR, QI(0, -1)),
    (PHIBAR, PHI, QI(0, -1)),
    (PHI, PHIBAR, QI(0, 1)),
)


def poisson_bracket(F: HamPoly, G: HamPoly) -> HamPoly:
    """``{F, G}`` (see module docstring for the sign convention)."""
    out: dict = {}
    for (ta, la), a in F.terms.items():
        for (tb, lb), b in G.terms.items():
            for tf, tg, sign in _PAIRINGS:
                na, nb = ta.count(tf), tb.count(tg)
                if not (na and nb):
                    continue
                types, poly = contract(ta, a, ta.index(tf), tb, b, tb.index(tg))
                if not types:
                    continue
                key = (types, la + lb)
                acc = poly_add(out.get(key, {}), poly_scale(poly, sign * (na * nb)))
                if acc:
                    out[key] = acc
                else:
                    out.pop(key, None)
    return HamPoly(out)


def gauge_average(F: HamPoly) -> HamPoly:
    """Keep exactly the grade-zero (resonant) terms."""
    return F.by_grade(0).with_tag(f"<{F.tag}>" if F.tag else "", F.order)


def solve_homological(F: HamPoly) -> HamPoly:
    """``chi`` with ``{chi, h0} + F = <F>``: grade-n coefficients divided by ``i n``."""
    out = {}
    for (types, lam), poly in F.terms.items():
        n = grade(types)
        if n:
            out[(types, lam)] = poly_scale(poly, QI(1) / QI(0, n))
    return HamPoly(out, tag="chi" if not F.tag else f"chi[{F.tag}]", order=F.order)


# -- expansions ---------------------------------------------------------------


def expand_dispersion(r: int, complex_case: bool = False) -> tuple[list[HamPoly], DispersionCoeffs]:
    """``h_j = a_j int psi_bar Delta^j psi`` for ``j = 1..r``."""
    coeffs = dispersion_coeffs(r)
    hs = []
    for j, a in enumerate(coeffs.a, start=1):
        monos = [Monomial(QI(a), (Factor(1, False, j), Factor(1, True)))]
        if complex_case:
            monos.append(Monomial(QI(a), (Factor(2, False, j), Factor(2, True))))
        hs.append(HamPoly.from_monomials(monos, tag=f"h{j}", order=j))
    return hs, coeffs


def _smoothing_symbol(n: int, total: int) -> dict:
    """Coefficient of ``eps^total`` in ``prod_k S(xi_k)``, ``S = sum_j binom(-1/4, j) (eps |xi|^2)^j``."""
    beta = [binomial(Fraction(-1, 4), j) for j in range(total + 1)]
    out: dict = {}
    for powers in product(range(total + 1), repeat=n):
        if sum(powers) != total:
            continue
        coeff = Fraction(1)
        for p in powers:
            coeff *= beta[p]
        mono = tuple(sorted(pair for i, p in enumerate(powers) for pair in [(i, i)] * p))
        out[mono] = out.get(mono, QI(0)) + QI(coeff)
    return {m: v for m, v in out.items() if v}


def expand_nonlinearity(l: int, r: int, complex_case: bool = False) -> list[HamPoly]:
    """``F_1..F_r`` from ``lam/(2^(l+1) l) int [S(psi+psi_bar)]^(2l)``.

    In the two-component case the density is
    ``lam/(2^(l+1) l) int [(S(psi+psi_bar))^2 + (S(phi+phi_bar))^2]^l``.
    """
    if l < 2 or r < 1:
        raise ValueError("need l >= 2 and r >= 1")
    pref = Fraction(1, 2 ** (l + 1) * l)
    n = 2 * l
    out = []
    for j in range(1, r + 1):
        sym = _smoothing_symbol(n, j - 1)
        terms: dict = {}
        for types, mult in _type_expansion(l, complex_case):
            key = (types, 1)
            terms[key] = poly_add(terms.get(key, {}), poly_scale(sym, QI(pref * mult)))
        out.append(HamPoly._from_raw(terms, tag=f"F{j}", order=j))
    return out


def _type_expansion(l: int, complex_case: bool):
    """Sorted factor types of the expanded power with their multiplicities."""
    if not complex_case:
        for q in range(2 * l + 1):
            yield (PSI,) * (2 * l - q) + (PSIBAR,) * q, comb(2 * l, q)
        return
    for m in range(l + 1):
        for q1 in range(2 * m + 1):
            for q2 in range(2 * (l - m) + 1):
                types = (PSI,) * (2 * m - q1) + (PSIBAR,) * q1 + (PHI,) * (2 * (l - m) - q2) + (PHIBAR,) * q2
                yield types, comb(l, m) * comb(2 * m, q1) * comb(2 * (l - m), q2)


# -- normal form --------------------------------------------------------------


@dataclass(frozen=True)
class NormalForm:
    """Result of :func:`normal_form`.

    ``Z[j]`` and ``chi[j]`` are keyed by the eps-order ``j = 1..r``;
    ``residuals[j]`` is ``{chi_j, h0} + K_j - Z_j`` (the zero HamPoly when the
    homological equation was solved exactly).
    """

    l: int
    r: int
    complex_case: bool
    Z: dict
    chi: dict
    residuals: dict

    @property
    def certified(self) -> bool:
        return all(res.is_zero for res in self.residuals.values())

    def hamiltonian(self) -> dict:
        """Normal-form Hamiltonian as ``{order: HamPoly}`` including ``h0`` at order 0."""
        return {0: h0(self.complex_case), **self.Z}


def _lie_push(H: dict, chi: HamPoly, m: int, r: int, hom: HamPoly) -> dict:
    """``exp(eps^m ad_chi)`` applied to ``h0 + sum eps^j H[j]``, truncated at ``eps^r``.

    ``hom = {chi, h0}`` is supplied so ``h0`` itself never enters a bracket.
    """
    out = {j: p for j, p in H.items()}

    def add(order, poly):
        if order <= r and not poly.is_zero:
            out[order] = out.get(order, HamPoly.zero()) + poly

    # terms from h0: sum_k eps^{km}/k! ad^{k-1} hom
    term = hom
    k = 1
    while k * m <= r:
        add(k * m, term * QI(Fraction(1, factorial(k))))
        k += 1
        if k * m <= r:
            term = poisson_bracket(chi, term)
    for j, G in H.items():
        term = G
        k = 1
        while j + k * m <= r:
            term = poisson_bracket(chi, term)
            add(j + k * m, term * QI(Fraction(1, factorial(k))))
            k += 1
    return out


def normal_form(l: int, r: int, complex_case: bool = False) -> NormalForm:
    """Gauge normal form ``H o T = h0 + sum_{j<=r} eps^j Z_j + O(eps^(r+1))``."""
    if not 1 <= r <= MAX_ORDER:
        raise ValueError(f"r must be in 1..{MAX_ORDER}, got {r}")
    if complex_case and r != 1:
        raise ValueError("the two-component normal form is supported at r = 1 only")
    if l < 2:
        raise ValueError("l must be at least 2")
    hs, _ = expand_dispersion(r, complex_case)
    fs = expand_nonlinearity(l, r, complex_case)
    H = {j: hs[j - 1] + fs[j - 1] for j in range(1, r + 1)}
    base = h0(complex_case)
    Z, chis, residuals = {}, {}, {}
    for m in range(1, r + 1):
        K = H[m]
        Zm = gauge_average(K).with_tag(f"Z{m}", m)
        chi = solve_homological(K).with_tag(f"chi{m}", m)
        hom = poisson_bracket(chi, base)
        residuals[m] = hom + K - Zm
        Z[m], chis[m] = Zm, chi
        if m < r:
            H = _lie_push(H, chi, m, r, hom)
    return NormalForm(l, r, complex_case, Z, chis, residuals)

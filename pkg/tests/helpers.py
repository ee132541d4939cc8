"""Random generators and hypothesis strategies shared by the tests."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from nrlimit.grid import Field
from nrlimit.hamalg import QI, Factor, HamPoly, Monomial
from nrlimit.harness.experiments import random_bandlimited


# -- random symbolic Hamiltonians ----------------------------------------------


def random_monomial(rng, max_degree=6, max_lap=2, two_component=False, max_lam=2) -> Monomial:
    """Random monomial with at most ``max_lap`` Laplacians in total."""
    deg = int(rng.integers(2, max_degree + 1))
    comps = (1, 2) if two_component else (1,)
    laps = [0] * deg
    for _ in range(int(rng.integers(max_lap + 1))):
        laps[int(rng.integers(deg))] += 1
    facs = tuple(Factor(int(rng.choice(comps)), bool(rng.integers(2)), laps[i]) for i in range(deg))
    re = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 9)))
    im = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 9))) if rng.random() < 0.5 else 0
    if not re and not im:
        re = Fraction(1)
    return Monomial(QI(re, im), facs, int(rng.integers(max_lam + 1)))


def random_hampoly(rng, terms=4, **kw) -> HamPoly:
    """Non-zero HamPoly of degree <= ``max_degree`` built from random Laplacian monomials."""
    while True:
        H = HamPoly.from_monomials([random_monomial(rng, **kw) for _ in range(terms)])
        if not H.is_zero:
            return H


def random_state(grid, rng, two_component=False, kmax=3, amplitude=0.5):
    psi = random_bandlimited(grid, rng, kmax, amplitude)
    if not two_component:
        return psi
    return psi, random_bandlimited(grid, rng, kmax, amplitude)


def numeric_bracket(F: HamPoly, G: HamPoly, state, grid) -> complex:
    """``{F, G}`` from compiled variational derivatives, independent of the symbolic bracket."""
    from nrlimit.hamalg import PHI, PHIBAR, PSI, PSIBAR
    from nrlimit.hamalg.compile import CompiledHamiltonian

    cf = CompiledHamiltonian(F, grid, dealias=False)
    cg = CompiledHamiltonian(G, grid, dealias=False)
    two = not isinstance(state, Field)
    total = 1j * np.sum(cf.gradient(state, PSIBAR).values * cg.gradient(state, PSI).values
                        - cf.gradient(state, PSI).values * cg.gradient(state, PSIBAR).values)
    if two:
        total -= 1j * np.sum(cf.gradient(state, PHIBAR).values * cg.gradient(state, PHI).values
                             - cf.gradient(state, PHI).values * cg.gradient(state, PHIBAR).values)
    return complex(grid.weight * total)


# -- hypothesis strategies -----------------------------------------------------

small_fraction = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 6))


@st.composite
def monomials(draw, max_degree=4, max_lap=1, two_component=False, max_lam=1):
    """Monomial strategy; ``max_lap`` bounds the total number of Laplacians."""
    deg = draw(st.integers(2, max_degree))
    comps = st.sampled_from((1, 2)) if two_component else st.just(1)
    laps = [0] * deg
    for _ in range(draw(st.integers(0, max_lap))):
        laps[draw(st.integers(0, deg - 1))] += 1
    facs = tuple(Factor(draw(comps), draw(st.booleans()), laps[i]) for i in range(deg))
    re, im = draw(small_fraction), draw(st.one_of(st.just(Fraction(0)), small_fraction))
    if not re and not im:
        re = Fraction(1)
    return Monomial(QI(re, im), facs, draw(st.integers(0, max_lam)))


@st.composite
def hampolys(draw, max_terms=3, **kw):
    return HamPoly.from_monomials(draw(st.lists(monomials(**kw), min_size=1, max_size=max_terms)))


# -- acceptance reporting ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, name: str, ok: bool, detail: str = "") -> bool:
    """Store one ``PASS``/``FAIL`` line, printed again in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion:>2}: {name}" + (f" [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok

"""Symbolic Hamiltonians: sums of integrated monomials with exact coefficients.

A :class:`Monomial` is ``coeff * lam^d * int prod_i Delta^{m_i} u_i dx`` where
each ``u_i`` is ``psi``, ``psi_bar`` (component 1) or ``phi``, ``phi_bar``
(component 2).  A :class:`HamPoly` stores a canonical sum of such terms keyed
by the sorted factor types and the ``lam`` degree; the derivative structure
lives in a canonical Fourier symbol (see :mod:`.symbols`), so two HamPolys
compare equal exactly when they agree modulo integration by parts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, NamedTuple

from .gaussian import QI, as_qi
from .symbols import Poly, canonical, laplacian_symbol, poly_add, poly_scale

__all__ = ["Factor", "Monomial", "HamPoly", "PSI", "PSIBAR", "PHI", "PHIBAR", "grade"]


class Factor(NamedTuple):
    comp: int = 1
    conj: bool = False
    lap: int = 0

    @property
    def kind(self) -> tuple[int, bool]:
        return (self.comp, self.conj)


PSI = (1, False)
PSIBAR = (1, True)
PHI = (2, False)
PHIBAR = (2, True)


def grade(types: Iterable[tuple[int, bool]]) -> int:
    """Gauge grade: +1 per psi, -1 per psi_bar, reversed for component 2."""
    n = 0
    for comp, conj in types:
        s = -1 if conj else 1
        n += s if comp == 1 else -s
    return n


@dataclass(frozen=True)
class Monomial:
    """``coeff * lam^lam_degree * int prod(factors) dx``."""

    coeff: QI
    factors: tuple[Factor, ...]
    lam: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_qi(self.coeff))
        facs = tuple(sorted(Factor(*f) for f in self.factors))
        if not facs:
            raise ValueError("a monomial needs at least one factor")
        for f in facs:
            if f.comp not in (1, 2) or f.lap < 0:
                raise ValueError(f"bad factor {f!r}")
        object.__setattr__(self, "factors", facs)

    @property
    def types(self) -> tuple[tuple[int, bool], ...]:
        return tuple(f.kind for f in self.factors)

    @property
    def grade(self) -> int:
        return grade(self.types)

    def symbol(self) -> Poly:
        return laplacian_symbol([f.lap for f in self.factors])

    def __str__(self):
        return _format_term(self.coeff, self.lam, _factor_text(self.factors))


@dataclass(frozen=True, eq=False)
class HamPoly:
    """Canonical sum of integrated monomials.

    ``terms`` maps ``(types, lam_degree)`` to a canonical symbol.  Use the
    constructors rather than building ``terms`` by hand.
    """

    terms: dict = field(default_factory=dict)
    tag: str = ""
    order: int | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls) -> "HamPoly":
        return cls({})

    @classmethod
    def from_monomials(cls, monos: Iterable[Monomial], tag: str = "", order: int | None = None) -> "HamPoly":
        terms: dict = {}
        for m in monos:
            key = (m.types, m.lam)
            terms[key] = poly_add(terms.get(key, {}), poly_scale(m.symbol(), m.coeff))
        return cls._from_raw(terms, tag, order)

    @classmethod
    def monomial(cls, coeff, factors, lam: int = 0) -> "HamPoly":
        return cls.from_monomials([Monomial(as_qi(coeff), tuple(factors), lam)])

    @classmethod
    def from_symbol(cls, types, lam: int, poly: Poly) -> "HamPoly":
        types = tuple(types)
        order = sorted(range(len(types)), key=lambda k: types[k])
        if order != list(range(len(types))):
            from .symbols import relabel

            mapping = [0] * len(types)
            for new, old in enumerate(order):
                mapping[old] = new
            poly = relabel(poly, mapping)
            types = tuple(types[k] for k in order)
        return cls._from_raw({(types, lam): poly})

    @classmethod
    def _from_raw(cls, terms: dict, tag: str = "", order: int | None = None) -> "HamPoly":
        out = {}
        for (types, lam), poly in terms.items():
            cp = canonical(types, poly)
            if cp:
                out[(types, lam)] = cp
        return cls(out, tag, order)

    def with_tag(self, tag: str, order: int | None = None) -> "HamPoly":
        return HamPoly(self.terms, tag, order)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "HamPoly") -> "HamPoly":
        if not isinstance(other, HamPoly):
            return NotImplemented
        out = dict(self.terms)
        for key, poly in other.terms.items():
            s = poly_add(out.get(key, {}), poly)
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return HamPoly(out)

    def __neg__(self) -> "HamPoly":
        return HamPoly({k: poly_scale(p, QI(-1)) for k, p in self.terms.items()})

    def __sub__(self, other: "HamPoly") -> "HamPoly":
        return self + (-other)

    def __mul__(self, scalar) -> "HamPoly":
        s = as_qi(scalar)
        if not s:
            return HamPoly.zero()
        return HamPoly({k: poly_scale(p, s) for k, p in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "HamPoly":
        return self * (QI(1) / as_qi(scalar))

    def times_lam(self, power: int = 1) -> "HamPoly":
        return HamPoly({(t, lam + power): p for (t, lam), p in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, HamPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted((k, tuple(sorted(p.items()))) for k, p in self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def items(self):
        """Yield ``(types, lam_degree, symbol)``."""
        for (types, lam), poly in sorted(self.terms.items(), key=_key_order):
            yield types, lam, poly

    def filter(self, pred) -> "HamPoly":
        return HamPoly({k: p for k, p in self.terms.items() if pred(k[0], k[1], p)})

    def by_grade(self, n: int) -> "HamPoly":
        return self.filter(lambda t, lam, p: grade(t) == n)

    @property
    def grades(self) -> set[int]:
        return {grade(t) for (t, _) in self.terms}

    @property
    def max_degree(self) -> int:
        return max((len(t) for (t, _) in self.terms), default=0)

    @property
    def components(self) -> set[int]:
        return {c for (t, _) in self.terms for c, _ in t}

    def quadratic_part(self) -> "HamPoly":
        return self.filter(lambda t, lam, p: len(t) == 2)

    def nonquadratic_part(self) -> "HamPoly":
        return self.filter(lambda t, lam, p: len(t) != 2)

    # -- presentation -------------------------------------------------------

    def monomials(self) -> list[Monomial]:
        """Expand into Laplacian-only monomials.

        Raises ``ValueError`` for terms that need gradient contractions.
        """
        out = []
        for types, lam, poly in self.items():
            dec = _laplacian_decomposition(types, poly)
            if dec is None:
                raise ValueError(f"term over {types} is not a sum of Laplacian monomials")
            for powers, coeff in dec:
                facs = tuple(Factor(c, j, m) for (c, j), m in zip(types, powers))
                out.append(Monomial(coeff, facs, lam))
        return out

    def to_text(self) -> str:
        """Canonical text form, one term per line."""
        lines = []
        for types, lam, poly in self.items():
            dec = _laplacian_decomposition(types, poly)
            if dec is None:
                for mono, coeff in sorted(poly.items()):
                    lines.append(_format_term(coeff, lam, _symbol_text(types, mono)))
                continue
            for powers, coeff in dec:
                facs = tuple(Factor(c, j, m) for (c, j), m in zip(types, powers))
                lines.append(_format_term(coeff, lam, _factor_text(facs)))
        if not lines:
            return "0"
        return "\n".join(lines)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        tag = f" tag={self.tag!r}" if self.tag else ""
        return f"<HamPoly{tag} terms={len(self.terms)}>"


def _key_order(item):
    (types, lam), _ = item
    return (lam, len(types), types)


# -- Laplacian-basis decomposition for printing -------------------------------


def _block_partitions(size: int, total: int):
    """Non-increasing tuples of length ``size`` summing to ``total``."""
    def rec(remaining, slots, cap):
        if slots == 0:
            if remaining == 0:
                yield ()
            return
        for first in range(min(cap, remaining), -1, -1):
            for rest in rec(remaining - first, slots - 1, first):
                yield (first,) + rest

    yield from rec(total, size, total)


def _candidates(types, deg):
    blocks = []
    for t in types:
        if blocks and blocks[-1][0] == t:
            blocks[-1][1] += 1
        else:
            blocks.append([t, 1])
    sizes = [b[1] for b in blocks]

    def splits(i, remaining):
        if i == len(sizes):
            if remaining == 0:
                yield ()
            return
        for t in range(remaining, -1, -1):
            for rest in splits(i + 1, remaining - t):
                yield (t,) + rest

    out = []
    for split in splits(0, deg):
        for parts in product(*(list(_block_partitions(s, t)) for s, t in zip(sizes, split))):
            out.append(tuple(x for part in parts for x in part))
    return out


def _laplacian_decomposition(types, poly: Poly):
    """Write ``poly`` as a combination of canonical Laplacian monomials, or None."""
    by_deg: dict[int, Poly] = {}
    for mono, v in poly.items():
        by_deg.setdefault(len(mono), {})[mono] = v
    result = []
    for deg in sorted(by_deg):
        target = by_deg[deg]
        if deg == 0:
            result.append(((0,) * len(types), target[()]))
            continue
        basis = []  # rows: (pivot, vec, combo)
        for idx, powers in enumerate(_candidates(types, deg)):
            vec = canonical(types, laplacian_symbol(powers))
            combo = {idx: QI(1)}
            vec, combo = _reduce(vec, combo, basis)
            if vec:
                pivot = min(vec)
                inv = QI(1) / vec[pivot]
                basis.append((pivot, poly_scale(vec, inv), {k: v * inv for k, v in combo.items()}, powers))
        cands = _candidates(types, deg)
        rem, combo = _reduce(dict(target), {}, basis)
        if rem:
            return None
        # combo expresses -(target) in candidates; sign flipped by _reduce convention
        for idx in sorted(combo):
            coeff = -combo[idx]
            if coeff:
                result.append((cands[idx], coeff))
    return result


def _reduce(vec: Poly, combo: dict, basis):
    """Eliminate basis pivots from ``vec``; track ``vec_orig + sum combo = vec``."""
    vec = dict(vec)
    combo = dict(combo)
    for pivot, bvec, bcombo, _ in basis:
        a = vec.get(pivot)
        if a:
            vec = poly_add(vec, bvec, -a)
            for k, v in bcombo.items():
                s = combo.get(k, QI(0)) - a * v
                if s:
                    combo[k] = s
                else:
                    combo.pop(k, None)
    return vec, combo


# -- text -------------------------------------------------------------------

_NAMES = {(1, False): "ψ", (1, True): "ψ̄", (2, False): "φ", (2, True): "φ̄"}


def _factor_text(factors) -> str:
    parts = []
    run = None
    count = 0
    for f in factors:
        if f == run:
            count += 1
            continue
        if run is not None:
            parts.append(_one_factor(run, count))
        run, count = f, 1
    parts.append(_one_factor(run, count))
    return " ".join(parts)


def _one_factor(f: Factor, count: int) -> str:
    name = _NAMES[f.kind]
    if f.lap == 1:
        body = f"[Δ{name}]"
    elif f.lap > 1:
        body = f"[Δ^{f.lap} {name}]"
    else:
        body = f"[{name}]"
    return body if count == 1 else f"{body}^{count}"


def _symbol_text(types, mono) -> str:
    sym = " ".join(f"ξ{i}·ξ{j}" for i, j in mono)
    names = " ".join(f"{_NAMES[t]}{k}" for k, t in enumerate(types))
    return f"{{{sym}}} [{names}]"


def _coeff_text(q: QI) -> str:
    def frac(x: Fraction) -> str:
        return f"{x.numerator}" if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    if not q.im:
        return frac(q.re)
    if not q.re:
        return f"{frac(q.im)} i"
    return f"({frac(q.re)} + {frac(q.im)} i)" if q.im > 0 else f"({frac(q.re)} - {frac(-q.im)} i)"


def _format_term(coeff: QI, lam: int, body: str) -> str:
    lam_txt = "" if lam == 0 else (" λ" if lam == 1 else f" λ^{lam}")
    return f"{_coeff_text(coeff)}{lam_txt} * ∫ {body}"

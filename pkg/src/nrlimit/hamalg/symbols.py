"""Multilinear Fourier symbols in Gram variables.

A density ``int prod_i (P_i(D) f_i) dx`` over ``n`` factors is represented by
its symbol: a polynomial in the Gram variables ``g_ij = xi_i . xi_j``
(``i <= j``), with ``xi_i`` the wavevector carried by factor ``i`` and the
constraint ``sum_i xi_i = 0`` coming from integration over the torus.  A
Laplacian on factor ``i`` contributes ``-g_ii``; a Laplacian of a product of
factors ``S`` contributes ``-sum_{i,j in S} g_ij``.

Two symbols describe the same functional iff their symmetrisations over
permutations of identical factor types agree on the hyperplane
``sum xi = 0``.  :func:`canonical` picks the unique representative obtained by
symmetrising and then eliminating the last factor's wavevector, so equality
of canonical forms is equality modulo integration by parts (identities that
hold in every dimension).

Polynomials are plain dicts ``{monomial: QI}``; a monomial is a sorted tuple of
``(i, j)`` pairs with repetition for powers.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import factorial, lcm, prod

from .gaussian import QI

__all__ = [
    "Poly",
    "ONE",
    "poly_add",
    "poly_scale",
    "poly_mul",
    "relabel",
    "substitute_out",
    "canonical",
    "laplacian_symbol",
    "contract",
    "degree",
]

Mono = tuple  # tuple[tuple[int, int], ...]
Poly = dict  # dict[Mono, QI]

ONE: Poly = {(): QI(1)}


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


def _mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(sorted(a + b))


def poly_add(a: Poly, b: Poly, scale=1) -> Poly:
    out = dict(a)
    for m, v in b.items():
        s = out.get(m, QI(0)) + v * scale
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def poly_scale(a: Poly, s) -> Poly:
    if not s:
        return {}
    return {m: v * s for m, v in a.items()}


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ma, va in a.items():
        for mb, vb in b.items():
            _accumulate(out, _mono_mul(ma, mb), va * vb)
    return out


def degree(a: Poly) -> int:
    return max((len(m) for m in a), default=0)


def relabel(a: Poly, mapping) -> Poly:
    """Rename factor positions: position ``i`` becomes ``mapping[i]``."""
    out: Poly = {}
    for m, v in a.items():
        nm = tuple(sorted(_pair(mapping[i], mapping[j]) for i, j in m))
        s = out.get(nm, QI(0)) + v
        if s:
            out[nm] = s
        else:
            out.pop(nm, None)
    return out


@lru_cache(maxsize=None)
def _substituted_pair(pair: tuple[int, int], n: int, p: int) -> tuple:
    """Image of one Gram variable after ``xi_p -> -sum_{k != p} xi_k``.

    Positions above ``p`` are shifted down by one.  Returned as a frozen poly.
    """
    def new(k):
        return k - 1 if k > p else k

    i, j = pair
    others = [k for k in range(n) if k != p]
    if i != p and j != p:
        return (((_pair(new(i), new(j)),), QI(1)),)
    if i == p and j == p:
        terms: dict = {}
        for a in others:
            for b in others:
                key = (_pair(new(a), new(b)),)
                terms[key] = terms.get(key, QI(0)) + QI(1)
        return tuple(terms.items())
    q = j if i == p else i
    return tuple(((_pair(new(q), new(k)),), QI(-1)) for k in others)


@lru_cache(maxsize=None)
def _substituted_mono(mono: Mono, n: int, p: int) -> tuple:
    """Integer-coefficient image of a Gram monomial under the substitution."""
    acc: dict = {(): 1}
    for pair in mono:
        nxt: dict = {}
        for ma, va in acc.items():
            for mb, vb in _substituted_pair(pair, n, p):
                m = _mono_mul(ma, mb)
                nxt[m] = nxt.get(m, 0) + va * int(vb.re)
        acc = {m: v for m, v in nxt.items() if v}
        if not acc:
            break
    return tuple(acc.items())


def _scale_int(v: QI, k: int) -> QI:
    return QI(v.re * k, v.im * k)


def _accumulate(out: Poly, m: Mono, v: QI) -> None:
    s = out.get(m)
    s = v if s is None else s + v
    if s:
        out[m] = s
    else:
        out.pop(m, None)


def substitute_out(a: Poly, n: int, p: int) -> Poly:
    """Eliminate factor ``p`` of an ``n``-factor symbol using momentum conservation."""
    out: Poly = {}
    for m, v in a.items():
        for k, c in _substituted_mono(m, n, p):
            _accumulate(out, k, _scale_int(v, c))
    return out


def _blocks(types: tuple) -> list[list[int]]:
    blocks: list[list[int]] = []
    for idx, t in enumerate(types):
        if blocks and types[blocks[-1][0]] == t:
            blocks[-1].append(idx)
        else:
            blocks.append([idx])
    return blocks


def _orbit_size(types: tuple) -> int:
    return prod(factorial(len(b)) for b in _blocks(types))


@lru_cache(maxsize=None)
def _canonical_mono(types: tuple, mono: Mono) -> tuple:
    """Integer image of ``mono``: ``orbit_size * canonical(mono)``."""
    n = len(types)
    if not mono:
        return (((), _orbit_size(types)),)
    blocks = _blocks(types)
    orbit: dict = {}
    for choice in product(*(permutations(b) for b in blocks)):
        mapping = list(range(n))
        for block, perm in zip(blocks, choice):
            for src, dst in zip(block, perm):
                mapping[src] = dst
        nm = tuple(sorted(_pair(mapping[i], mapping[j]) for i, j in mono))
        orbit[nm] = orbit.get(nm, 0) + 1
    total: dict = {}
    for nm, mult in orbit.items():
        for k, c in _substituted_mono(nm, n, n - 1):
            total[k] = total.get(k, 0) + mult * c
    return tuple(sorted((k, v) for k, v in total.items() if v))


def canonical(types: tuple, a: Poly) -> Poly:
    """Canonical representative of symbol ``a`` for factors of the given (sorted) types."""
    types = tuple(types)
    if not a:
        return {}
    # clear denominators so the symmetrisation runs in integer arithmetic
    den = 1
    for v in a.values():
        den = lcm(den, v.re.denominator, v.im.denominator)
    re_acc: dict = {}
    im_acc: dict = {}
    for m, v in a.items():
        A = v.re.numerator * (den // v.re.denominator)
        B = v.im.numerator * (den // v.im.denominator)
        for k, c in _canonical_mono(types, m):
            if A:
                re_acc[k] = re_acc.get(k, 0) + A * c
            if B:
                im_acc[k] = im_acc.get(k, 0) + B * c
    scale = den * _orbit_size(types)
    out: Poly = {}
    for k in re_acc.keys() | im_acc.keys():
        r, i = re_acc.get(k, 0), im_acc.get(k, 0)
        if r or i:
            out[k] = QI._raw(Fraction(r, scale), Fraction(i, scale))
    return out


def laplacian_symbol(powers) -> Poly:
    """Symbol of ``prod_i Delta^{m_i}`` acting factor-wise."""
    mono = tuple(sorted(p for i, m in enumerate(powers) for p in [(i, i)] * m))
    total = sum(powers)
    return {mono: QI((-1) ** total)}


def contract(types_a: tuple, a: Poly, p: int, types_b: tuple, b: Poly, q: int):
    """Symbol of ``int (dA/df_p) (dB/df_q) dx``.

    ``dA/df_p`` is the variational derivative with respect to factor ``p``
    (the L2 pairing, no conjugation).  Returns ``(types, poly)`` with the
    types sorted and the poly canonical.
    """
    na, nb = len(types_a), len(types_b)
    pa = substitute_out(a, na, p)
    pb = substitute_out(b, nb, q)
    shift = na - 1
    pb = relabel(pb, [k + shift for k in range(nb - 1)])
    poly = poly_mul(pa, pb)
    types = [t for k, t in enumerate(types_a) if k != p] + [t for k, t in enumerate(types_b) if k != q]
    order = sorted(range(len(types)), key=lambda k: types[k])
    mapping = [0] * len(types)
    for new, old in enumerate(order):
        mapping[old] = new
    sorted_types = tuple(types[k] for k in order)
    return sorted_types, canonical(sorted_types, relabel(poly, mapping))


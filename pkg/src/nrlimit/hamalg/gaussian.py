"""Exact Gaussian rationals ``p + q i`` with ``p, q`` in Q."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["QI", "I", "as_qi"]


_ZERO = Fraction(0)


class QI:
    """Immutable Gaussian rational."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if type(re) is Fraction else Fraction(re))
        object.__setattr__(self, "im", im if type(im) is Fraction else Fraction(im))

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "QI":
        out = object.__new__(cls)
        object.__setattr__(out, "re", re)
        object.__setattr__(out, "im", im)
        return out

    def __setattr__(self, name, value):
        raise AttributeError("QI is immutable")

    def __add__(self, other):
        o = as_qi(other)
        if not (self.im or o.im):
            return QI._raw(self.re + o.re, _ZERO)
        return QI._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_qi(other)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return as_qi(other) - self

    def __mul__(self, other):
        o = as_qi(other)
        if not (self.im or o.im):
            return QI._raw(self.re * o.re, _ZERO)
        return QI._raw(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_qi(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QI((self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        return as_qi(other) / self

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return QI(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = as_qi(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_str(self.im)
        sign = "+" if self.im > 0 else "-"
        return f"({self.re} {sign} {_imag_str(abs(self.im))})"


def _imag_str(q: Fraction) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{q} i"


I = QI(0, 1)


def as_qi(x) -> QI:
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Rational)):
        return QI(x, 0)
    if isinstance(x, complex):
        raise TypeError("floating complex numbers are not exact; build a QI explicitly")
    raise TypeError(f"cannot convert {type(x).__name__} to QI")

"""Exact real constructible numbers.

Coefficients of Puiseux series live in the smallest subfield of the reals
containing the rationals and closed under square roots of positive elements.
Rationals are represented by plain :class:`gmpy2.mpq` values, which keeps the
common case fast.  Everything else is a :class:`Coefficient`.

A :class:`Coefficient` has one of two shapes:

* a *multiquadratic* normal form ``sum(q_r * sqrt(r))`` over distinct
  squarefree integers ``r``.  The square roots of distinct squarefree integers
  are linearly independent over Q, so a normal form is zero iff it has no
  terms; sums, products and quotients stay in normal form.
* a *generic* expression tree with nodes ``+ - * / sqrt``, produced when a
  square root is taken of a non-rational number.

Signs are decided by evaluating rational interval enclosures at increasing
binary precision.  For the multiquadratic shape the enclosure always separates
from zero eventually; for generic trees an undecided sign after the bit budget
raises :class:`~lambdatrees.errors.PrecisionExhausted`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import gmpy2
import mpmath
from gmpy2 import mpq
from sympy import factorint

from ..errors import DomainError, PrecisionExhausted

#: Largest number of bits used when refining an enclosure before giving up.
DEFAULT_SIGN_BITS = 4096
_START_BITS = 64

_ZERO = mpq(0)
_ONE = mpq(1)


def to_rational(value):
    """Convert ``int``/``Fraction``/``mpq``/numeric strings to ``mpq``.

    Returns ``None`` when ``value`` is not an exact rational.
    """
    if isinstance(value, type(_ZERO)):
        return value
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, Fraction)):
        return mpq(value)
    if isinstance(value, str):
        return mpq(Fraction(value))
    return None


def is_rational(value):
    return isinstance(value, type(_ZERO))


@lru_cache(maxsize=4096)
def _squarefree_split(n):
    """Write ``n > 0`` as ``s*s*r`` with ``r`` squarefree (best effort for huge ``n``)."""
    if gmpy2.is_square(n):
        return isqrt(n), 1
    s = 1
    r = 1
    factors = factorint(n, limit=1 << 20)
    for p, e in factors.items():
        s *= p ** (e // 2)
        if e % 2:
            r *= p
    if r > 1 and gmpy2.is_square(r):
        # the unfactored cofactor hid a square
        root = isqrt(r)
        s *= root
        r = 1
    return s, r


def _smallest_prime(n):
    return min(factorint(n, limit=1 << 20))


def _sqrt_bounds_int(r, bits):
    scaled = r << (2 * bits)
    root = isqrt(scaled)
    lo = mpq(root, 1 << bits)
    if root * root == scaled:
        return lo, lo
    return lo, mpq(root + 1, 1 << bits)


def _sqrt_bounds(lo, hi, bits):
    scale = 1 << (2 * bits)
    # exact integer floor/ceil; gmpy2.floor on mpq rounds through mpfr
    lo_int = max(int(lo.numerator) * scale // int(lo.denominator), 0)
    hi_int = -(-int(hi.numerator) * scale // int(hi.denominator))
    root_lo = isqrt(lo_int)
    root_hi = isqrt(hi_int)
    if root_hi * root_hi != hi_int:
        root_hi += 1
    return mpq(root_lo, 1 << bits), mpq(root_hi, 1 << bits)


def _iv_mul(a, b):
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(products), max(products)


class Coefficient:
    """Irrational constructible real number (see module docstring)."""

    __slots__ = ("_parts", "_expr", "_enclosures")

    def __init__(self, parts=None, expr=None):
        self._parts = parts
        self._expr = expr
        self._enclosures = {}

    # -- construction -------------------------------------------------------

    @staticmethod
    def _from_parts(parts):
        """Normalize ``{radicand: q}``; collapse to ``mpq`` when purely rational."""
        parts = {r: q for r, q in parts.items() if q != 0}
        if not parts:
            return _ZERO
        if len(parts) == 1 and 1 in parts:
            return parts[1]
        return Coefficient(parts=tuple(sorted(parts.items())))

    @staticmethod
    def sqrt(value):
        """Square root of a nonnegative coefficient, exact."""
        q = to_rational(value)
        if q is not None:
            if q < 0:
                raise DomainError(f"square root of negative rational {q}")
            if q == 0:
                return _ZERO
            num, den = int(q.numerator), int(q.denominator)
            s, r = _squarefree_split(num * den)
            return Coefficient._from_parts({r: mpq(s, den)})
        if not isinstance(value, Coefficient):
            raise TypeError(f"cannot take sqrt of {type(value).__name__}")
        sign = value.sign()
        if sign < 0:
            raise DomainError("square root of a negative coefficient")
        if sign == 0:
            return _ZERO
        return Coefficient(expr=("sqrt", value))

    @property
    def is_multiquadratic(self):
        return self._parts is not None

    def _parts_dict(self):
        return dict(self._parts)

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _lift(other):
        q = to_rational(other)
        if q is not None:
            return q
        if isinstance(other, Coefficient):
            return other
        return None

    @staticmethod
    def _as_parts(x):
        if is_rational(x):
            return {1: x} if x != 0 else {}
        return x._parts_dict() if x._parts is not None else None

    def _binary(self, other, op, swap=False):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        a, b = (other, self) if swap else (self, other)
        pa, pb = self._as_parts(a), self._as_parts(b)
        if pa is not None and pb is not None:
            if op == "+":
                return _add_parts(pa, pb)
            if op == "-":
                return _add_parts(pa, {r: -q for r, q in pb.items()})
            if op == "*":
                return _mul_parts(pa, pb)
            if op == "/":
                if not pb:
                    raise DomainError("division by zero coefficient")
                return _mul_parts(pa, _inverse_parts(pb))
        if op == "/" and is_rational(b) and b == 0:
            raise DomainError("division by zero coefficient")
        if op == "*" and ((is_rational(a) and a == 0) or (is_rational(b) and b == 0)):
            return _ZERO
        if op == "*" and a is b and a._expr[0] == "sqrt":
            return a._expr[1]
        if op == "/" and _is_zero(b):
            raise DomainError("division by zero coefficient")
        return Coefficient(expr=(op, a, b))

    def __add__(self, other):
        return self._binary(other, "+")

    def __radd__(self, other):
        return self._binary(other, "+", swap=True)

    def __sub__(self, other):
        return self._binary(other, "-")

    def __rsub__(self, other):
        return self._binary(other, "-", swap=True)

    def __mul__(self, other):
        return self._binary(other, "*")

    def __rmul__(self, other):
        return self._binary(other, "*", swap=True)

    def __truediv__(self, other):
        return self._binary(other, "/")

    def __rtruediv__(self, other):
        return self._binary(other, "/", swap=True)

    def __neg__(self):
        if self._parts is not None:
            return Coefficient(parts=tuple((r, -q) for r, q in self._parts))
        return Coefficient(expr=("-", _ZERO, self))

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return _ONE / (self ** -n)
        result = _ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order --------------------------------------------------------------

    def enclosure(self, bits):
        """Rational interval ``(lo, hi)`` containing the value, or ``None`` if unbounded."""
        cached = self._enclosures.get(bits)
        if cached is not None:
            return cached
        if self._parts is not None:
            lo = hi = _ZERO
            for r, q in self._parts:
                if r == 1:
                    lo += q
                    hi += q
                    continue
                s_lo, s_hi = _sqrt_bounds_int(r, bits)
                if q > 0:
                    lo += q * s_lo
                    hi += q * s_hi
                else:
                    lo += q * s_hi
                    hi += q * s_lo
            result = (lo, hi)
        else:
            result = _enclose_expr(self._expr, bits)
        if result is not None:
            self._enclosures[bits] = result
        return result

    def sign(self, max_bits=DEFAULT_SIGN_BITS):
        bits = _START_BITS
        while bits <= max_bits:
            box = self.enclosure(bits)
            if box is not None:
                lo, hi = box
                if lo > 0:
                    return 1
                if hi < 0:
                    return -1
                if lo == hi == 0:
                    return 0
            bits *= 2
        if self._parts is not None:
            raise PrecisionExhausted(f"sign of {self!s} undecided at {max_bits} bits")
        raise PrecisionExhausted(f"sign of constructible number {self!s} undecided at {max_bits} bits")

    def _cmp(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return sign(self - other)

    def __eq__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c == 0

    def __ne__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c != 0

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    __hash__ = None

    # -- conversion ---------------------------------------------------------

    def to_mpf(self, prec=113):
        """Approximate value as an ``mpmath.mpf`` with ``prec`` bits."""
        with mpmath.workprec(prec + 16):
            if self._parts is not None:
                total = mpmath.mpf(0)
                for r, q in self._parts:
                    total += _mpf(q) * mpmath.sqrt(r)
                return +total
            return _mpf_expr(self._expr)

    def __float__(self):
        return float(self.to_mpf(64))

    def __str__(self):
        if self._parts is not None:
            pieces = []
            for r, q in self._parts:
                pieces.append(str(q) if r == 1 else f"{q}*sqrt({r})")
            return " + ".join(pieces)
        op = self._expr[0]
        if op == "sqrt":
            return f"sqrt({self._expr[1]})"
        return f"({self._expr[1]} {op} {self._expr[2]})"

    def __repr__(self):
        return f"Coefficient({self!s})"


def _is_zero(x):
    return sign(x) == 0


def _add_dicts(pa, pb):
    out = dict(pa)
    for r, q in pb.items():
        out[r] = out.get(r, _ZERO) + q
    return {r: q for r, q in out.items() if q != 0}


def _mul_dicts(pa, pb):
    out = {}
    for r, q in pa.items():
        for s, p in pb.items():
            g = gcd(r, s)
            rad = (r // g) * (s // g)
            out[rad] = out.get(rad, _ZERO) + q * p * g
    return {r: q for r, q in out.items() if q != 0}


def _add_parts(pa, pb):
    return Coefficient._from_parts(_add_dicts(pa, pb))


def _mul_parts(pa, pb):
    return Coefficient._from_parts(_mul_dicts(pa, pb))


def _inverse_parts(parts):
    """Inverse of a nonzero multiquadratic element, by repeated conjugation."""
    radicands = [r for r in parts if r != 1]
    if not radicands:
        return {1: _ONE / parts[1]}
    p = _smallest_prime(radicands[0])
    # x = A + B*sqrt(p)  =>  1/x = (A - B*sqrt(p)) / (A^2 - p*B^2)
    a = {r: q for r, q in parts.items() if r % p}
    b = {r // p: q for r, q in parts.items() if r % p == 0}
    conj = _add_dicts(a, {r * p: -q for r, q in b.items()})
    norm = _add_dicts(_mul_dicts(a, a), {r: -p * q for r, q in _mul_dicts(b, b).items()})
    return _mul_dicts(conj, _inverse_parts(norm))


def _enclose_value(x, bits):
    if is_rational(x):
        return (x, x)
    return x.enclosure(bits)


def _enclose_expr(expr, bits):
    op = expr[0]
    if op == "sqrt":
        inner = _enclose_value(expr[1], bits)
        if inner is None:
            return None
        return _sqrt_bounds(inner[0], inner[1], bits)
    left = _enclose_value(expr[1], bits)
    right = _enclose_value(expr[2], bits)
    if left is None or right is None:
        return None
    if op == "+":
        return left[0] + right[0], left[1] + right[1]
    if op == "-":
        return left[0] - right[1], left[1] - right[0]
    if op == "*":
        return _iv_mul(left, right)
    if op == "/":
        if right[0] <= 0 <= right[1]:
            return None
        return _iv_mul(left, (_ONE / right[1], _ONE / right[0]))
    raise AssertionError(op)


def _mpf(q):
    return mpmath.mpf(int(q.numerator)) / int(q.denominator)


def _mpf_value(x):
    if is_rational(x):
        return _mpf(x)
    if x._parts is not None:
        return x.to_mpf(mpmath.mp.prec)
    return _mpf_expr(x._expr)


def _mpf_expr(expr):
    op = expr[0]
    if op == "sqrt":
        return mpmath.sqrt(_mpf_value(expr[1]))
    a, b = _mpf_value(expr[1]), _mpf_value(expr[2])
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a / b


def sign(x, max_bits=DEFAULT_SIGN_BITS):
    """Sign (-1, 0, +1) of a rational or :class:`Coefficient`."""
    if is_rational(x):
        return (x > 0) - (x < 0)
    if isinstance(x, Coefficient):
        return x.sign(max_bits)
    q = to_rational(x)
    if q is None:
        raise TypeError(f"not a coefficient: {x!r}")
    return (q > 0) - (q < 0)


def coefficient_sqrt(x):
    return Coefficient.sqrt(x)


def to_mpf(x, prec=113):
    """``mpmath.mpf`` approximation of a rational or :class:`Coefficient`."""
    if isinstance(x, Coefficient):
        return x.to_mpf(prec)
    q = to_rational(x)
    with mpmath.workprec(prec):
        return _mpf(q)

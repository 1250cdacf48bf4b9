"""Real Puiseux series in ``t`` with big element ``beta = 1/t``.

An element is either

* **exact** (``tail_zero``): a finite sum ``sum c_k t^(k/N)``.  Sums,
  differences and products of exact elements are exact, and so is division by
  a monomial.  All tree computations on Laurent-polynomial inputs stay here.
* **lazy**: the result of a general division, a square root, or any
  operation involving a lazy operand.  It keeps its operands and recomputes
  its terms to any requested horizon, so truncation never silently loses
  information.  A valuation query that finds no nonzero term before
  ``FieldConfig.max_steps`` exponent steps raises
  :class:`~lambdatrees.errors.PrecisionExhausted`.

Exponents are stored as integers over the ramification index ``N``; the
public API speaks :class:`fractions.Fraction`.  The order is the one where
an element is positive iff its leading coefficient is positive.
"""

from __future__ import annotations

import contextlib
import contextvars
import functools
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from ..errors import DomainError, PrecisionExhausted
from .coefficient import (
    DEFAULT_SIGN_BITS,
    Coefficient,
    coefficient_sqrt,
    is_rational,
    sign as coeff_sign,
    to_mpf,
    to_rational,
)

INF = math.inf
_ZERO = mpq(0)
_ONE = mpq(1)


@dataclass(frozen=True)
class FieldConfig:
    """Precision knobs for lazy series and coefficient signs.

    ``relative_steps`` is the default horizon width above the valuation, in
    units of ``1/N``; ``max_steps`` caps escalation when hunting for a
    nonzero term; ``sign_bits`` caps interval refinement of coefficients.
    """

    relative_steps: int = 24
    max_steps: int = 24 * 32
    sign_bits: int = DEFAULT_SIGN_BITS


_config = contextvars.ContextVar("lambdatrees_field_config", default=FieldConfig())


def field_config():
    return _config.get()


@contextlib.contextmanager
def using_config(**changes):
    """Temporarily override :class:`FieldConfig` fields in the current context."""
    token = _config.set(replace(_config.get(), **changes))
    try:
        yield _config.get()
    finally:
        _config.reset(token)


def _as_coefficient(value):
    q = to_rational(value)
    if q is not None:
        return q
    if isinstance(value, Coefficient):
        return value
    return None


def _nonzero(c):
    if is_rational(c):
        return c != 0
    return coeff_sign(c, field_config().sign_bits) != 0


def _frac(k, n):
    return Fraction(k, n)


def _normalize(terms, n):
    """Drop zero coefficients and reduce the ramification index."""
    terms = {k: c for k, c in terms.items() if not (is_rational(c) and c == 0)}
    g = n
    for k in terms:
        g = math.gcd(g, k)
        if g == 1:
            break
    if g > 1:
        terms = {k // g: c for k, c in terms.items()}
        n //= g
    return terms, n


def _rescale(terms, n, target):
    if n == target:
        return terms
    f = target // n
    return {k * f: c for k, c in terms.items()}


_MPQ = type(_ZERO)


@functools.lru_cache(maxsize=4096)
def _radical_product(r, s):
    """``sqrt(r) * sqrt(s) = g * sqrt(rad)`` for squarefree ``r, s``."""
    g = math.gcd(r, s)
    return (r // g) * (s // g), g


def _flatten(terms):
    """``(k, radicand, q)`` triples if all coefficients are multiquadratic, else None."""
    out = []
    for k, c in terms.items():
        if type(c) is _MPQ:
            out.append((k, 1, c))
        elif isinstance(c, Coefficient) and c._parts is not None:
            out.extend((k, r, q) for r, q in c._parts)
        else:
            return None
    return out


def _gather(flat):
    grouped = {}
    for (k, r), q in flat.items():
        if q:
            grouped.setdefault(k, {})[r] = q
    return {k: Coefficient._from_parts(parts) for k, parts in grouped.items()}


def _all_rational(terms):
    return all(type(c) is _MPQ for c in terms.values())


def _add_terms(ta, tb):
    out = dict(ta)
    for k, c in tb.items():
        v = out.get(k)
        out[k] = c if v is None else v + c
    return out


def _mul_terms(ta, tb, limit=None):
    if not (_all_rational(ta) and _all_rational(tb)):
        fa, fb = _flatten(ta), _flatten(tb)
        if fa is not None and fb is not None:
            return _mul_flat(fa, fb, limit)
    out = {}
    get = out.get
    for ka, ca in ta.items():
        for kb, cb in tb.items():
            k = ka + kb
            if limit is not None and k >= limit:
                continue
            v = get(k)
            out[k] = ca * cb if v is None else v + ca * cb
    return out


def _mul_flat(fa, fb, limit):
    acc = {}
    get = acc.get
    for ka, ra, qa in fa:
        for kb, rb, qb in fb:
            k = ka + kb
            if limit is not None and k >= limit:
                continue
            if ra == 1:
                key, q = (k, rb), qa * qb
            elif rb == 1:
                key, q = (k, ra), qa * qb
            else:
                rad, g = _radical_product(ra, rb)
                key, q = (k, rad), qa * qb * g
            v = get(key)
            acc[key] = q if v is None else v + q
    return _gather(acc)


def _ceil_index(h, n):
    """Smallest integer ``k`` with ``k/n >= h`` (``h`` a Fraction)."""
    return -((-h.numerator * n) // h.denominator)


class PuiseuxElement:
    """Element of the field of real Puiseux series (see module docstring)."""

    __slots__ = ("_n", "_terms", "_node", "_horizon", "_lb", "_val")

    def __init__(self, terms=None, n=1, *, _node=None, _lb=None):
        if _node is None:
            terms, n = _normalize(dict(terms or {}), n)
            self._terms = terms
            self._n = n
            self._node = None
            self._horizon = INF
            self._val = _frac(min(terms), n) if terms else INF
            self._lb = self._val
        else:
            self._terms = {}
            self._n = n
            self._node = _node
            self._horizon = _lb if _lb is not INF else Fraction(0)
            self._lb = _lb
            self._val = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_terms(cls, mapping):
        """Exact element from ``{exponent: coefficient}``."""
        if not mapping:
            return cls()
        exps = {Fraction(e): c for e, c in mapping.items()}
        n = math.lcm(*(e.denominator for e in exps))
        terms = {}
        for e, c in exps.items():
            coeff = _as_coefficient(c)
            if coeff is None:
                raise TypeError(f"unsupported coefficient {c!r}")
            k = e.numerator * (n // e.denominator)
            terms[k] = terms.get(k, _ZERO) + coeff
        return cls(terms, n)

    @classmethod
    def constant(cls, c):
        return cls.from_terms({0: c})

    @classmethod
    def monomial(cls, c, exponent):
        return cls.from_terms({exponent: c})

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        coeff = _as_coefficient(value)
        if coeff is None:
            raise TypeError(f"cannot interpret {value!r} as a Puiseux series")
        return cls.constant(coeff)

    @classmethod
    def _lazy(cls, node, n, lb):
        return cls(_node=node, n=n, _lb=lb)

    # -- structure ----------------------------------------------------------

    @property
    def tail_zero(self):
        """True when the element is a finite sum known completely."""
        return self._node is None

    @property
    def ramification(self):
        return self._n

    @property
    def horizon(self):
        """Exponents strictly below this value are currently determined."""
        return self._horizon

    def is_exact_zero(self):
        return self._node is None and not self._terms

    def _ensure(self, h):
        """Make every term with exponent below ``h`` available in the cache."""
        if self._node is None or h <= self._horizon:
            return
        self._terms = _compute_node(self._node, self._n, h)
        self._horizon = h

    def _terms_below(self, h):
        """``(terms, n)`` holding at least every term of exponent ``< h``."""
        if self._node is not None:
            if h is INF:
                raise PrecisionExhausted("lazy element has no finite expansion")
            self._ensure(h)
        return self._terms, self._n

    def lower_bound(self):
        """A rational lower bound for the valuation (``inf`` for exact zero)."""
        return self._lb

    def valuation(self):
        """Least exponent with nonzero coefficient, as a Fraction."""
        if self._val is None:
            self._val = self._find_valuation()
        if self._val is INF:
            raise DomainError("valuation of zero")
        return self._val

    def _find_valuation(self):
        op = self._node[0]
        if op == "mul":
            return self._node[1].valuation() + self._node[2].valuation()
        if op == "inv":
            return -self._node[1].valuation()
        if op == "sqrt":
            return self._node[1].valuation() / 2
        if op == "shift":
            return self._node[1].valuation() + self._node[3]
        if op == "subst":
            return self._node[1].valuation() * self._node[2]
        cfg = field_config()
        steps = max(cfg.relative_steps, 1)
        while True:
            h = self._lb + Fraction(steps, self._n)
            self._ensure(h)
            found = [k for k, c in self._terms.items() if _frac(k, self._n) < h and _nonzero(c)]
            if found:
                return _frac(min(found), self._n)
            if steps >= cfg.max_steps:
                raise PrecisionExhausted(
                    f"no nonzero term below t^{h}; element may be zero or need a larger horizon"
                )
            steps = min(steps * 2, cfg.max_steps)

    def coefficient(self, exponent):
        """Coefficient of ``t^exponent`` (zero when absent)."""
        e = Fraction(exponent)
        if self._node is not None:
            self._ensure(e + Fraction(1, self._n))
        k = e * self._n
        if k.denominator != 1:
            return _ZERO
        return self._terms.get(int(k), _ZERO)

    def leading_coefficient(self):
        return self.coefficient(self.valuation())

    def terms(self, horizon=None):
        """Sorted ``{exponent: coefficient}`` of computed nonzero terms below ``horizon``.

        Exact elements return every term when ``horizon`` is omitted; lazy
        elements default to ``valuation + relative_steps/N``.
        """
        if horizon is None:
            if self._node is None:
                return {_frac(k, self._n): c for k, c in sorted(self._terms.items())}
            horizon = self.default_horizon()
        h = Fraction(horizon)
        terms, n = self._terms_below(h)
        out = {}
        for k in sorted(terms):
            e = _frac(k, n)
            if e < h and not (is_rational(terms[k]) and terms[k] == 0):
                out[e] = terms[k]
        return out

    def default_horizon(self):
        try:
            base = self.valuation()
        except DomainError:
            return INF
        return base + Fraction(field_config().relative_steps, self._n)

    # -- order --------------------------------------------------------------

    def sign(self):
        if self.is_exact_zero():
            return 0
        return coeff_sign(self.leading_coefficient(), field_config().sign_bits)

    def is_zero(self):
        """Exact zero test; lazy elements that look zero raise PrecisionExhausted."""
        if self._node is None:
            return not self._terms
        self.valuation()
        return False

    def _cmp(self, other):
        try:
            other = PuiseuxElement.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).sign()

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

    def __bool__(self):
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        try:
            other = PuiseuxElement.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_exact_zero():
            return self
        if self.is_exact_zero():
            return other
        if self._node is None and other._node is None:
            n = math.lcm(self._n, other._n)
            return PuiseuxElement(
                _add_terms(_rescale(self._terms, self._n, n), _rescale(other._terms, other._n, n)), n
            )
        return PuiseuxElement._lazy(("add", self, other), math.lcm(self._n, other._n), min(self._lb, other._lb))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = PuiseuxElement.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return PuiseuxElement.coerce(other) - self

    def __mul__(self, other):
        coeff = _as_coefficient(other)
        if coeff is not None:
            return self.scale(coeff)
        if not isinstance(other, PuiseuxElement):
            return NotImplemented
        if self.is_exact_zero() or other.is_exact_zero():
            return PuiseuxElement()
        if self._node is None and other._node is None:
            n = math.lcm(self._n, other._n)
            return PuiseuxElement(
                _mul_terms(_rescale(self._terms, self._n, n), _rescale(other._terms, other._n, n)), n
            )
        if self._node is None and len(self._terms) == 1:
            ((k, c),) = self._terms.items()
            return other.scale(c, _frac(k, self._n))
        if other._node is None and len(other._terms) == 1:
            ((k, c),) = other._terms.items()
            return self.scale(c, _frac(k, other._n))
        return PuiseuxElement._lazy(("mul", self, other), math.lcm(self._n, other._n), self._lb + other._lb)

    __rmul__ = __mul__

    def scale(self, c, exponent=0):
        """``c * t^exponent * self`` for a coefficient ``c``."""
        coeff = _as_coefficient(c)
        e = Fraction(exponent)
        if is_rational(coeff) and coeff == 0:
            return PuiseuxElement()
        if self._node is None:
            n = math.lcm(self._n, e.denominator)
            shift = int(e * n)
            f = n // self._n
            return PuiseuxElement({k * f + shift: coeff * v for k, v in self._terms.items()}, n)
        n = math.lcm(self._n, e.denominator)
        return PuiseuxElement._lazy(("shift", self, coeff, e), n, self._lb + e)

    def inverse(self):
        if self.is_exact_zero():
            raise DomainError("division by exact zero")
        v = self.valuation()
        lead = self.leading_coefficient()
        if self._node is None and len(self._terms) == 1:
            return PuiseuxElement.monomial(_ONE / lead, -v)
        if coeff_sign(lead, field_config().sign_bits) == 0:
            raise DomainError("leading coefficient vanishes")
        return PuiseuxElement._lazy(("inv", self), self._n, -v)

    def __truediv__(self, other):
        coeff = _as_coefficient(other)
        if coeff is not None:
            if is_rational(coeff) and coeff == 0:
                raise DomainError("division by exact zero")
            return self.scale(_ONE / coeff)
        if not isinstance(other, PuiseuxElement):
            return NotImplemented
        if self.is_exact_zero():
            if other.is_exact_zero():
                raise DomainError("division by exact zero")
            return PuiseuxElement()
        return self * other.inverse()

    def __rtruediv__(self, other):
        return PuiseuxElement.coerce(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, int):
            if exponent < 0:
                return (self ** -exponent).inverse()
            result = PuiseuxElement.constant(1)
            base = self
            while exponent:
                if exponent & 1:
                    result = result * base
                base = base * base
                exponent >>= 1
            return result
        return NotImplemented

    def sqrt(self):
        """Square root of a positive element (positive branch)."""
        if self.is_exact_zero():
            return PuiseuxElement()
        s = self.sign()
        if s < 0:
            raise DomainError("square root of a negative element")
        v = self.valuation()
        lead = self.leading_coefficient()
        k = v * self._n
        n = self._n if (k.numerator % 2 == 0) else 2 * self._n
        if self._node is None and len(self._terms) == 1:
            return PuiseuxElement.monomial(coefficient_sqrt(lead), v / 2)
        return PuiseuxElement._lazy(("sqrt", self), n, v / 2)

    def substitute(self, q):
        """Apply the order-preserving field morphism ``t -> t^q`` (``q > 0`` rational)."""
        q = Fraction(q)
        if q <= 0:
            raise DomainError("exponent substitution needs q > 0")
        n = self._n * q.denominator
        if self._node is None:
            return PuiseuxElement({k * q.numerator: c for k, c in self._terms.items()}, n)
        return PuiseuxElement._lazy(("subst", self, q), n, self._lb * q)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, t0, prec=113):
        """Real value at ``t = t0`` as an ``mpmath.mpf`` carrying ``prec`` bits.

        Exact elements are summed term by term.  Lazy elements are evaluated
        through their construction (quotients and square roots of the
        evaluated operands), so the result is the value of the algebraic
        function the series expands.
        """
        with mpmath.workprec(prec + 32):
            q = to_rational(t0)
            t = mpmath.mpf(t0) if q is None else to_mpf(q, prec + 32)
            if not 0 < t < 1:
                raise DomainError(f"evaluation point {t0} outside (0, 1)")
            value = _evaluate(self, t, prec + 32, {})
        return +value

    def __float__(self):
        raise TypeError("use evaluate(t0) to obtain a real number")

    # -- text ---------------------------------------------------------------

    def __str__(self):
        if self.is_exact_zero():
            return "0"
        try:
            items = self.terms()
        except PrecisionExhausted:
            return "O(?)"
        pieces = [_format_term(c, e) for e, c in items.items()]
        text = " + ".join(pieces).replace("+ -", "- ") if pieces else "0"
        if self._node is not None:
            text += f" + O(t^{_fmt_exp(self._horizon)})"
        return text

    def __repr__(self):
        return f"PuiseuxElement({self!s})"

    def __reduce__(self):
        if self._node is None:
            return (PuiseuxElement, (self._terms, self._n))
        return (PuiseuxElement._lazy, (self._node, self._n, self._lb))


def _fmt_exp(e):
    e = Fraction(e)
    return str(e) if e.denominator == 1 and e >= 0 else f"({e})"


def _format_term(c, e):
    if e == 0:
        return str(c)
    mono = "t" if e == 1 else f"t^{_fmt_exp(e)}"
    if is_rational(c) and c == 1:
        return mono
    if is_rational(c) and c == -1:
        return "-" + mono
    if is_rational(c):
        return f"{c}*{mono}"
    return f"({c})*{mono}"


def _compute_node(node, n, h):
    """Terms (over denominator ``n``) of a lazy node for every exponent below ``h``."""
    op = node[0]
    limit = _ceil_index(h, n)
    if op == "add":
        a, b = node[1], node[2]
        ta, na = a._terms_below(h)
        tb, nb = b._terms_below(h)
        out = _add_terms(_rescale(ta, na, n), _rescale(tb, nb, n))
        return {k: c for k, c in out.items() if k < limit and not (is_rational(c) and c == 0)}
    if op == "mul":
        a, b = node[1], node[2]
        ta, na = a._terms_below(h - b._lb)
        tb, nb = b._terms_below(h - a._lb)
        out = _mul_terms(_rescale(ta, na, n), _rescale(tb, nb, n), limit)
        return {k: c for k, c in out.items() if not (is_rational(c) and c == 0)}
    if op == "shift":
        a, c, e = node[1], node[2], node[3]
        ta, na = a._terms_below(h - e)
        shift = int(e * n)
        out = {}
        for k, v in _rescale(ta, na, n).items():
            kk = k + shift
            if kk < limit:
                out[kk] = c * v
        return out
    if op == "subst":
        a, q = node[1], node[2]
        ta, na = a._terms_below(h / q)
        f = n // (na * q.denominator)
        out = {}
        for k, v in ta.items():
            kk = k * q.numerator * f
            if kk < limit:
                out[kk] = v
        return out
    if op == "inv":
        return _inverse_terms(node[1], n, h)
    if op == "sqrt":
        return _sqrt_terms(node[1], n, h)
    raise AssertionError(op)


def _relative_coefficients(a, v, count, n):
    """Coefficients of ``a`` at ``v + i/n`` for ``i < count``."""
    ta, na = a._terms_below(v + Fraction(count, n))
    ta = _rescale(ta, na, n) if n % na == 0 else None
    if ta is None:
        raise AssertionError("ramification mismatch")
    base = int(v * n)
    return [ta.get(base + i, _ZERO) for i in range(count)]


def _inverse_terms(b, n, h):
    v = b.valuation()
    # r has exponents -v + j/n; need those below h
    count = _ceil_index(h + v, n)
    if count <= 0:
        return {}
    bs = _relative_coefficients(b, v, count, n)
    inv_lead = _ONE / bs[0]
    rs = [inv_lead]
    for j in range(1, count):
        acc = _ZERO
        for i in range(1, j + 1):
            bi = bs[i]
            if is_rational(bi) and bi == 0:
                continue
            acc = acc + bi * rs[j - i]
        rs.append(-acc * inv_lead)
    base = int(-v * n)
    return {base + j: c for j, c in enumerate(rs) if not (is_rational(c) and c == 0)}


def _sqrt_terms(a, n, h):
    v = a.valuation()
    na = a._n
    half = v / 2
    count = _ceil_index(h - half, na)
    if count <= 0:
        return {}
    coeffs = _relative_coefficients(a, v, count, na)
    root = coefficient_sqrt(coeffs[0])
    two_root = 2 * root
    rs = [root]
    for j in range(1, count):
        acc = coeffs[j]
        for i in range(1, j):
            acc = acc - rs[i] * rs[j - i]
        rs.append(acc / two_root)
    f = n // na
    base = int(half * n)
    return {base + j * f: c for j, c in enumerate(rs) if not (is_rational(c) and c == 0)}


def _power(t, e):
    if e.denominator == 1:
        return t ** int(e)
    return mpmath.root(t, e.denominator) ** e.numerator


def _evaluate(x, t, prec, memo):
    key = id(x)
    if key in memo:
        return memo[key]
    node = x._node
    if node is None:
        total = mpmath.mpf(0)
        for k, c in x._terms.items():
            total += to_mpf(c, prec) * _power(t, Fraction(k, x._n))
        value = total
    else:
        op = node[0]
        if op == "add":
            value = _evaluate(node[1], t, prec, memo) + _evaluate(node[2], t, prec, memo)
        elif op == "mul":
            value = _evaluate(node[1], t, prec, memo) * _evaluate(node[2], t, prec, memo)
        elif op == "shift":
            value = to_mpf(node[2], prec) * _power(t, node[3]) * _evaluate(node[1], t, prec, memo)
        elif op == "subst":
            value = _evaluate(node[1], _power(t, node[2]), prec, {})
        elif op == "inv":
            d = _evaluate(node[1], t, prec, memo)
            if d == 0:
                raise DomainError(f"pole at t = {mpmath.nstr(t, 8)}")
            value = 1 / d
        elif op == "sqrt":
            d = _evaluate(node[1], t, prec, memo)
            if d < 0:
                raise DomainError(f"square root of negative value at t = {mpmath.nstr(t, 8)}")
            value = mpmath.sqrt(d)
        else:
            raise AssertionError(op)
    memo[key] = value
    return value


T = PuiseuxElement.monomial(1, 1)
BETA = PuiseuxElement.monomial(1, -1)
ZERO = PuiseuxElement()
ONE = PuiseuxElement.constant(1)


# -- operation-level API ------------------------------------------------------


def arith(a, b, op):
    """Apply ``op`` in ``{'+', '-', '*', '/'}`` to two elements."""
    a = PuiseuxElement.coerce(a)
    b = PuiseuxElement.coerce(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def series_sqrt(a):
    return PuiseuxElement.coerce(a).sqrt()


def valuation(a):
    return PuiseuxElement.coerce(a).valuation()


def log_beta(a):
    """``log_beta(a) = -val(a)`` for ``a > 0``."""
    a = PuiseuxElement.coerce(a)
    if a.is_exact_zero() or a.sign() <= 0:
        raise DomainError("log_beta needs a positive element")
    return -a.valuation()


def residue(a):
    """Image of ``a`` in the residue field (its ``t^0`` coefficient)."""
    a = PuiseuxElement.coerce(a)
    if a.is_exact_zero():
        return _ZERO
    if a.lower_bound() < 0 and a.valuation() < 0:
        raise DomainError("residue of an element with negative valuation")
    return a.coefficient(0)


def substitute_exponent(a, q):
    return PuiseuxElement.coerce(a).substitute(q)


def evaluate_real(a, t0, precision=113):
    return PuiseuxElement.coerce(a).evaluate(t0, precision)

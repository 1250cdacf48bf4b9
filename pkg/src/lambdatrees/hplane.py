"""The non-Archimedean hyperbolic disk over real Puiseux series.

Points are stored projectively as ``z = N / D`` with ``N, D`` in F[i].
Möbius maps then act by polynomial operations only, so Laurent-polynomial
inputs never leave exact arithmetic; ``x``/``y`` are available as quotients
when wanted.  Distances and orientations are computed from valuations of
squared norms and need no square roots.

The PSL2 action is the half-plane action ``w -> (aw+b)/(cw+d)`` transported
to the disk by the Cayley map ``C(w) = (w - i)/(w + i)``.  A disk automorphism
is stored as the pair ``(alpha, beta)`` acting by
``z -> (alpha z + beta) / (conj(beta) z + conj(alpha))``.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

from .errors import DomainError, ValidationError
from .field import PuiseuxElement

_HALF = mpq(1, 2)


def _el(value):
    return PuiseuxElement.coerce(value)


class ComplexF:
    """Element ``re + i*im`` of F[i]."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = _el(re)
        self.im = _el(im)

    def __add__(self, other):
        return ComplexF(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return ComplexF(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return ComplexF(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, ComplexF):
            return ComplexF(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        other = _el(other)
        return ComplexF(self.re * other, self.im * other)

    __rmul__ = __mul__

    def conj(self):
        return ComplexF(self.re, -self.im)

    def norm2(self):
        return self.re * self.re + self.im * self.im

    def is_exact_zero(self):
        return self.re.is_exact_zero() and self.im.is_exact_zero()

    def is_zero(self):
        return self.re.is_zero() and self.im.is_zero()

    def __repr__(self):
        return f"ComplexF({self.re}, {self.im})"


def norm2_valuation(re, im):
    """Valuation of ``re^2 + im^2`` (twice the smaller valuation of the parts)."""
    if re.tail_zero and im.tail_zero:
        vals = [p.valuation() for p in (re, im) if not p.is_exact_zero()]
        if not vals:
            raise DomainError("valuation of zero")
        return 2 * min(vals)
    return (re * re + im * im).valuation()


def leading_pair(re, im):
    """Coefficients of ``re`` and ``im`` at their common leading exponent."""
    m = norm2_valuation(re, im) / 2
    return re.coefficient(m), im.coefficient(m), m


class DiskPoint:
    """Point of the hyperbolic disk ``x^2 + y^2 < 1`` over F.

    Stored as a quotient ``z = N / D`` of two elements of F[i].  Möbius maps
    act linearly on ``(N, D)``, so the size of the coordinates grows
    additively along a word.
    """

    __slots__ = ("N", "D", "_depth", "_den_val")

    def __init__(self, x=0, y=0, *, check=True):
        x, y = _el(x), _el(y)
        if check and (x * x + y * y - 1).sign() >= 0:
            raise ValidationError(f"point ({x}, {y}) is not inside the unit disk")
        self.N = ComplexF(x, y)
        self.D = ComplexF(1, 0)
        self._depth = None
        self._den_val = Fraction(0)

    @classmethod
    def projective(cls, num, den):
        """Point ``num / den`` for ``num, den`` in F[i] (``den`` may be real)."""
        if not isinstance(den, ComplexF):
            den = ComplexF(den, 0)
        self = cls.__new__(cls)
        self._depth = None
        self._den_val = None
        if den.re.tail_zero and den.im.tail_zero and not den.is_exact_zero():
            m = norm2_valuation(den.re, den.im) / 2
            if den.im.is_exact_zero():
                inv = 1 / den.re.leading_coefficient()
            else:
                inv = 1
            num = ComplexF(num.re.scale(inv, -m), num.im.scale(inv, -m))
            den = ComplexF(den.re.scale(inv, -m), den.im.scale(inv, -m))
            self._den_val = Fraction(0)
        self.N, self.D = num, den
        return self

    def _denominator_valuation(self):
        if self._den_val is None:
            self._den_val = norm2_valuation(self.D.re, self.D.im)
        return self._den_val

    @property
    def numerator(self):
        """``N * conj(D)``, the numerator over the real denominator ``|D|^2``."""
        return self.N * self.D.conj()

    @property
    def X(self):
        return self.numerator.re

    @property
    def Y(self):
        return self.numerator.im

    @property
    def S(self):
        return self.D.norm2()

    @property
    def x(self):
        return self.X / self.S

    @property
    def y(self):
        return self.Y / self.S

    def depth(self):
        """Pseudo-distance from the origin, ``log_beta(1 / (1 - |z|^2))``."""
        if self._depth is None:
            gap = self.D.norm2() - self.N.norm2()
            self._depth = gap.valuation() - self._denominator_valuation()
        return self._depth

    def same_point(self, other):
        """Exact equality in the disk (not in the tree)."""
        return (self.N * other.D - other.N * self.D).is_zero()

    def substitute(self, q):
        """Image under the field morphism ``t -> t^q``."""
        return DiskPoint.projective(
            ComplexF(self.N.re.substitute(q), self.N.im.substitute(q)),
            ComplexF(self.D.re.substitute(q), self.D.im.substitute(q)),
        )

    def __repr__(self):
        d = self.D
        if d.im.is_exact_zero() and d.re.tail_zero and d.re.terms() == {Fraction(0): 1}:
            return f"DiskPoint({self.N.re}, {self.N.im})"
        return f"DiskPoint(({self.N.re}, {self.N.im}) / ({d.re}, {d.im}))"


ORIGIN = DiskPoint(0, 0)


class DiskMap:
    """Disk automorphism ``z -> (alpha z + beta) / (conj(beta) z + conj(alpha))``."""

    __slots__ = ("alpha", "beta")

    def __init__(self, alpha, beta):
        self.alpha = alpha
        self.beta = beta

    def _image(self, z):
        num = self.alpha * z.N + self.beta * z.D
        den = self.beta.conj() * z.N + self.alpha.conj() * z.D
        return num, den

    def __call__(self, z):
        return DiskPoint.projective(*self._image(z))

    def leading_direction(self, z):
        """Leading complex coefficient of the image of ``z``, up to positive scale.

        The image is ``num / den``; its leading coefficient is that of
        ``num * conj(den)``, i.e. ``lead(num) * conj(lead(den))``.
        """
        num, den = self._image(z)
        n1, n2, _ = leading_pair(num.re, num.im)
        d1, d2, _ = leading_pair(den.re, den.im)
        return n1 * d1 + n2 * d2, n2 * d1 - n1 * d2

    def compose(self, other):
        """``self ∘ other``."""
        a1, b1, a2, b2 = self.alpha, self.beta, other.alpha, other.beta
        return DiskMap(a1 * a2 + b1 * b2.conj(), a1 * b2 + b1 * a2.conj())

    def inverse(self):
        return DiskMap(self.alpha.conj(), -self.beta)


class RepMatrix:
    """Element of PSL2(F) given by entries ``[[a, b], [c, d]]`` with ``ad - bc = 1``."""

    __slots__ = ("a", "b", "c", "d", "_disk")

    def __init__(self, a, b, c, d, *, check=True):
        self.a, self.b, self.c, self.d = _el(a), _el(b), _el(c), _el(d)
        self._disk = None
        if check and not (self.determinant() - 1).is_zero():
            raise ValidationError("matrix determinant is not exactly 1")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1, check=False)

    def determinant(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        return RepMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            check=False,
        )

    def inverse(self):
        return RepMatrix(self.d, -self.b, -self.c, self.a, check=False)

    def trace(self):
        return self.a + self.d

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def equals(self, other):
        """Equality in PSL2, i.e. up to a global sign."""
        mine, theirs = self.entries(), other.entries()
        if all((p - q).is_zero() for p, q in zip(mine, theirs)):
            return True
        return all((p + q).is_zero() for p, q in zip(mine, theirs))

    def substitute(self, q):
        return RepMatrix(*(e.substitute(q) for e in self.entries()), check=False)

    def disk_map(self):
        """Cayley conjugate of the half-plane action."""
        if self._disk is None:
            a, b, c, d = self.entries()
            alpha = ComplexF((a + d) * _HALF, (b - c) * _HALF)
            beta = ComplexF((a - d) * _HALF, -(b + c) * _HALF)
            self._disk = DiskMap(alpha, beta)
        return self._disk

    def __repr__(self):
        return f"RepMatrix([[{self.a}, {self.b}], [{self.c}, {self.d}]])"


def mobius_apply(m, z):
    """Act on a disk point by a PSL2(F) matrix."""
    return m.disk_map()(z)


def pseudo_dist(z, w):
    """``log_beta(|1 - conj(z) w|^2 / ((1 - |z|^2)(1 - |w|^2)))`` as an exact rational."""
    # 1 - conj(z) w = (conj(D) D' - conj(N) N') / (conj(D) D')
    cross = z.D.conj() * w.D - z.N.conj() * w.N
    val = norm2_valuation(cross.re, cross.im)
    val -= z._denominator_valuation() + w._denominator_valuation()
    return z.depth() + w.depth() - val


def translate_to_origin(p):
    """Automorphism ``w -> (w - p)/(1 - conj(p) w)`` sending ``p`` to 0."""
    # alpha = |D|^2 and beta = -N conj(D) give exactly this map for p = N / D
    return DiskMap(ComplexF(p.D.norm2(), 0), -(p.N * p.D.conj()))


def segment_frame(x, y, s):
    """``(T, m)`` with ``T`` the translation sending ``x`` to 0 and ``m = T(point_on_segment(x, y, s))``."""
    to_origin = translate_to_origin(x)
    w = to_origin(y)
    c = 1 - PuiseuxElement.monomial(1, s)
    return to_origin, DiskPoint.projective(w.N * c, w.D)


def point_on_segment(x, y, s):
    """Point at pseudo-distance ``s`` from ``x`` on the segment towards ``y``.

    ``y`` is moved to ``w`` by the translation taking ``x`` to 0 and scaled
    radially by ``1 - t^s``; for ``0 < s <= d(0, w)`` the scaled point lies
    on the geodesic through 0 and ``w`` with ``1 - |c w|^2`` of valuation
    exactly ``s``.  The result is pulled back by the inverse translation.
    """
    s = Fraction(s)
    d = pseudo_dist(x, y)
    if s < 0 or s > d:
        raise DomainError(f"parameter {s} outside [0, {d}]")
    if s == 0:
        return x
    if s == d:
        return y
    to_origin, scaled = segment_frame(x, y, s)
    return to_origin.inverse()(scaled)

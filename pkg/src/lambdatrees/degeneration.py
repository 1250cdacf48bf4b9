"""Comparison of the exact tree with the real hyperbolic plane at small ``t``.

A representation over the Puiseux field is specialized at real ``t0`` in
``(0, 1)``; orbit distances in the real disk, divided by ``ln(1/t0)``, are
compared with exact tree distances, and orientations of real tripods (read
at the point minimizing the sum of distances) with exact tree orientations.
All real computations use mpmath at a configurable binary precision.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import ConvergenceError, DegenerateTripod, DomainError, ValidationError
from .hplane import ORIGIN, mobius_apply, norm2_valuation
from .lambda_tree import TreePoint, tree_dist, tripod_orientation
from .rep_actions import IDENTITY_WORD, evaluate_word

DELTA0 = 0.8814  # hyperbolicity constant of the real plane, about arcsinh(1)

DEFAULT_SCHEDULE = tuple(Fraction(1, 10**k) for k in range(2, 9))


@dataclass(frozen=True)
class RealConfig:
    """Settings for the real-side sweeps.

    Parameters
    ----------
    schedule : tuple of Fraction
        Strictly decreasing values of ``t`` in ``(0, 1)``.
    precision : int
        Binary precision of the floating point evaluation.
    eta : float
        Gradient-norm tolerance for tripod centers.
    delta0 : float
        Hyperbolicity constant of the real plane.
    epsilon : float
        Tolerance of the ε-approximation check.
    q_radius : int
        Radius of the word ball ``Q``.
    max_iter : int
        Iteration cap of the center search.
    """

    schedule: tuple = DEFAULT_SCHEDULE
    precision: int = 512
    eta: float = 1e-30
    delta0: float = DELTA0
    epsilon: float = 0.05
    q_radius: int = 2
    max_iter: int = 500

    def __post_init__(self):
        sched = tuple(Fraction(t) for t in self.schedule)
        object.__setattr__(self, "schedule", sched)
        for t in sched:
            if not 0 < t < 1:
                raise ValidationError(f"t = {t} is not in (0, 1)")
        if any(a <= b for a, b in zip(sched, sched[1:])):
            raise ValidationError("t-schedule must be strictly decreasing")
        if not self.eta > 0:
            raise ValidationError("eta must be positive")
        if self.precision < 53:
            raise ValidationError("precision must be at least 53 bits")


@dataclass
class LimitRow:
    """One line of a limit table."""

    kind: str
    id: str
    t: Fraction
    rescaled: object
    exact: object
    gap: object

    def cells(self):
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, (Fraction, int)):
                return str(x)
            return mpmath.nstr(mpmath.mpf(x), 12, min_fixed=-4, max_fixed=8)

        return [self.kind, self.id, str(self.t), fmt(self.rescaled), fmt(self.exact), fmt(self.gap)]


CSV_HEADER = ("kind", "id", "t", "rescaled", "exact", "gap")


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def rescale_factor(t0):
    """``λ(t0) = ln(1/t0)``."""
    return -mpmath.log(_mpf(t0))


def _mpf(q):
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


# --------------------------------------------------------------------------
# real disk geometry


def real_disk_map(m):
    """``(alpha, beta)`` of a real 2x2 matrix (Cayley conjugate of its half-plane action)."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    alpha = mpmath.mpc(a + d, b - c) / 2
    beta = mpmath.mpc(a - d, -(b + c)) / 2
    return alpha, beta


def real_apply(m, z):
    alpha, beta = real_disk_map(m)
    den = mpmath.conj(beta) * z + mpmath.conj(alpha)
    if den == 0:
        raise DomainError("pole in real Möbius action")
    return (alpha * z + beta) / den


def real_cosh2_half(z, w):
    """``cosh^2(d/2) = |1 - conj(z) w|^2 / ((1 - |z|^2)(1 - |w|^2))``."""
    num = abs(1 - mpmath.conj(z) * w) ** 2
    den = (1 - abs(z) ** 2) * (1 - abs(w) ** 2)
    if den <= 0:
        raise DomainError("point outside the real disk (increase precision)")
    return num / den


def real_distance(z, w):
    """Hyperbolic distance in the real unit disk."""
    c2 = real_cosh2_half(z, w)
    if c2 < 1:
        c2 = mpmath.mpf(1)
    return 2 * mpmath.acosh(mpmath.sqrt(c2))


def _translate(x, z):
    return (z - x) / (1 - mpmath.conj(x) * z)


def _untranslate(x, z):
    return (z + x) / (1 + mpmath.conj(x) * z)


def real_gromov(x, y, p):
    return (real_distance(x, p) + real_distance(p, y) - real_distance(x, y)) / 2


def _unit_directions(c, points):
    out = []
    for p in points:
        q = _translate(c, p)
        r = abs(q)
        out.append(None if r == 0 else q / r)
    return out


def tripod_center_real(p1, p2, p3, eta=1e-30, max_iter=500):
    """Minimizer of ``x -> sum d(x, p_i)`` in the real disk.

    A vertex is returned when the other two points subtend an angle of at
    least 120 degrees there. Otherwise a damped Riemannian Newton iteration
    is run from the real analogue of the tree median until the gradient norm
    is at most ``eta``. The Hessian of ``d(., p)`` is ``coth d (I - u u^T)``
    with ``u`` the unit direction towards ``p``; steps are halved until the
    objective does not increase. ``eta`` is floored at ``2**(16 - prec)`` of
    the current mpmath working precision.
    """
    pts = (p1, p2, p3)
    for i in range(3):
        if any(i != j and abs(pts[i] - pts[j]) == 0 for j in range(3)):
            raise DegenerateTripod("tripod points must be distinct")
    for i in range(3):
        dirs = [u for j, u in enumerate(_unit_directions(pts[i], pts)) if j != i]
        if abs(dirs[0] + dirs[1]) <= 1:
            return pts[i]

    def objective(z):
        return sum(real_distance(z, p) for p in pts)

    seeds = [_geodesic_point(p1, p2, real_gromov(p2, p3, p1))]
    seeds += [_vertex_seed(i, pts) for i in range(3)]
    x = min(seeds, key=objective)
    fx = objective(x)
    slack = mpmath.ldexp(1, 8 - mpmath.mp.prec)
    eta = max(mpmath.mpf(eta), mpmath.ldexp(1, 16 - mpmath.mp.prec))
    for _ in range(max_iter):
        units = _unit_directions(x, pts)
        # x sits on a vertex at working precision
        if any(u is None for u in units) or any(real_distance(x, p) == 0 for p in pts):
            return x
        v = units[0] + units[1] + units[2]
        if abs(v) <= eta:
            return x
        delta = _newton_step(x, pts, units, v)
        length = abs(delta)
        direction = delta / length
        for _ in range(60):
            y = _untranslate(x, mpmath.tanh(length / 2) * direction)
            fy = objective(y)
            if fy <= fx * (1 + slack):
                break
            length /= 2
        else:
            raise ConvergenceError("tripod center line search failed")
        x, fx = y, fy
    raise ConvergenceError(f"tripod center not found in {max_iter} iterations")


def _vertex_seed(i, pts):
    # minimizer of the local model |h| - s.h + h.H.h/2 near the vertex p_i
    p = pts[i]
    others = [q for j, q in enumerate(pts) if j != i]
    units = [_translate(p, q) / abs(_translate(p, q)) for q in others]
    s = units[0] + units[1]
    direction = s / abs(s)
    kappa = 0
    for q, u in zip(others, units):
        cross = mpmath.re(u) * mpmath.im(direction) - mpmath.im(u) * mpmath.re(direction)
        kappa += mpmath.coth(real_distance(p, q)) * cross**2
    cap = min(real_distance(p, q) for q in others) / 2
    r = min((abs(s) - 1) / kappa, cap) if kappa > 0 else cap
    return _untranslate(p, mpmath.tanh(r / 2) * direction)


def _newton_step(x, pts, units, v):
    # Hessian sum coth(d_i) (I - u_i u_i^T) in the frame centred at x
    h11 = h12 = h22 = mpmath.mpf(0)
    for p, u in zip(pts, units):
        c = mpmath.coth(real_distance(x, p))
        ux, uy = mpmath.re(u), mpmath.im(u)
        h11 += c * (1 - ux * ux)
        h12 -= c * ux * uy
        h22 += c * (1 - uy * uy)
    det = h11 * h22 - h12 * h12
    if det <= 0:
        return v
    vx, vy = mpmath.re(v), mpmath.im(v)
    return mpmath.mpc((h22 * vx - h12 * vy) / det, (h11 * vy - h12 * vx) / det)


def _geodesic_point(x, y, s):
    w = _translate(x, y)
    r = abs(w)
    if r == 0:
        return x
    return _untranslate(x, mpmath.tanh(s / 2) * w / r)


def _ccw(u, v):
    cross = mpmath.re(u) * mpmath.im(v) - mpmath.im(u) * mpmath.re(v)
    return (cross > 0) - (cross < 0)


def angular_sign(u1, u2, u3):
    """Angular comparator ``sgn(ccw(u1,u2) + ccw(u2,u3) + ccw(u3,u1))`` on floats."""
    total = _ccw(u1, u2) + _ccw(u2, u3) + _ccw(u3, u1)
    return (total > 0) - (total < 0)


def in_v_set(p1, p2, p3, r):
    """Whether all three Gromov products of the tripod exceed ``r``."""
    pts = (p1, p2, p3)
    return all(real_gromov(pts[j], pts[k], pts[i]) > r for i, j, k in ((0, 1, 2), (1, 0, 2), (2, 0, 1)))


def real_tripod_orientation(p1, p2, p3, eta=1e-30, r=6 * DELTA0, *, require=True, max_iter=500):
    """Orientation of a real tripod from unit tangents at its center.

    Raises :class:`DegenerateTripod` when ``require`` is set and the tripod
    is not in ``V(r)``.
    """
    if require and not in_v_set(p1, p2, p3, r):
        raise DegenerateTripod(f"tripod not in V({r})")
    c = tripod_center_real(p1, p2, p3, eta, max_iter)
    u = _unit_directions(c, (p1, p2, p3))
    if any(v is None for v in u):
        return 0
    return angular_sign(*u)


# --------------------------------------------------------------------------
# orbit caches


class ExactOrbit:
    """Exact word matrices and orbit points of the base point 0, cached by word."""

    def __init__(self, rep):
        self.rep = rep
        self._mats = {IDENTITY_WORD: None}
        self._points = {}
        self._depth = {}

    def matrix(self, w):
        m = self._mats.get(w)
        if m is None:
            if not w.letters:
                m = evaluate_word(self.rep, w)
            else:
                head = self.rep.letter_matrix(*w.letters[0])
                m = head @ self.matrix(type(w)(w.letters[1:]))
            self._mats[w] = m
        return m

    def point(self, w):
        if w not in self._points:
            if not w.letters:
                p = ORIGIN
            else:
                head = self.rep.letter_matrix(*w.letters[0])
                p = mobius_apply(head, self.point(type(w)(w.letters[1:])).lift)
            self._points[w] = TreePoint(p, self.rep.format(w))
        return self._points[w]

    def depth(self, w):
        """Tree distance from 0 to ``w . 0``, read off the disk coefficient of the word."""
        if w not in self._depth:
            if not w.letters:
                self._depth[w] = Fraction(0)
            else:
                a, b, c, d = self.matrix(w).entries()
                self._depth[w] = -norm2_valuation(a + d, b - c)
        return self._depth[w]

    def dist(self, u, v):
        """``d(u.0, v.0) = d(0, u^-1 v . 0)``."""
        return self.depth(u.inverse() * v)


class RealOrbit:
    """Real word matrices and orbit points at a fixed ``t0``."""

    def __init__(self, rep, t0, precision):
        self.rep = rep
        self.t0 = Fraction(t0)
        self.precision = precision
        with mpmath.workprec(precision):
            gens = rep.evaluate(self.t0, precision)
            self._letters = {}
            for i, m in enumerate(gens):
                self._letters[(i, 1)] = m
                self._letters[(i, -1)] = mpmath.matrix([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
            self.lam = rescale_factor(self.t0)
        self._points = {IDENTITY_WORD: mpmath.mpc(0)}

    def point(self, w):
        if w not in self._points:
            with mpmath.workprec(self.precision):
                inner = self.point(type(w)(w.letters[1:]))
                self._points[w] = real_apply(self._letters[w.letters[0]], inner)
        return self._points[w]

    def distance(self, u, v):
        with mpmath.workprec(self.precision):
            return real_distance(self.point(u), self.point(v))

    def rescaled(self, u, v):
        with mpmath.workprec(self.precision):
            return self.distance(u, v) / self.lam


def rescaled_distance(rep, t0, w1, w2, precision=512):
    """Real distance between ``w1 . 0`` and ``w2 . 0`` at ``t0``, divided by ``ln(1/t0)``."""
    t0 = Fraction(t0)
    if not 0 < t0 < 1:
        raise ValidationError(f"t0 = {t0} is not in (0, 1)")
    return RealOrbit(rep, t0, precision).rescaled(w1, w2)


# --------------------------------------------------------------------------
# tables and checks


def _pair_id(rep, u, v):
    return f"{rep.format(u)}|{rep.format(v)}"


_EVAL_ERRORS = (DomainError, ZeroDivisionError, OverflowError)


def _real_orbits(rep, config):
    """``(t, RealOrbit or None)`` along the schedule; ``None`` marks a failed evaluation."""
    out = []
    for t in config.schedule:
        try:
            out.append((Fraction(t), RealOrbit(rep, t, config.precision)))
        except _EVAL_ERRORS:
            out.append((Fraction(t), None))
    return out


def limit_table(rep, pairs, config=None):
    """Rows ``(pair, t)`` comparing rescaled real distances with tree distances.

    A schedule point where the family cannot be evaluated (a pole, an
    overflow) yields a ``pair_error`` row carrying the exact value only.
    """
    config = config or RealConfig()
    exact = ExactOrbit(rep)
    rows = []
    orbits = _real_orbits(rep, config) if pairs else []
    for u, v in pairs:
        d = exact.dist(u, v)
        ident = _pair_id(rep, u, v)
        for t, real in orbits:
            try:
                if real is None:
                    raise DomainError(f"cannot evaluate at t = {t}")
                with mpmath.workprec(config.precision):
                    value = real.rescaled(u, v)
                    gap = abs(value - _mpf(d))
            except _EVAL_ERRORS:
                rows.append(LimitRow("pair_error", ident, Fraction(t), None, d, None))
                continue
            rows.append(LimitRow("pair", ident, real.t0, value, d, gap))
    return rows


@dataclass
class ConvergenceReport:
    """Outcome of the ``gap <= C / ln(1/t)`` check."""

    constants: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def convergence_check(rows, slack=1.5, floor=1e-30):
    """Fit ``C`` on the two largest ``t`` of each pair and verify it on the rest.

    ``floor`` is an absolute allowance for pairs whose real distance is
    exactly proportional to the tree distance, where the fitted ``C`` is
    rounding noise.
    """
    report = ConvergenceReport()
    by_id = {}
    for row in rows:
        if row.kind == "pair_error":
            report.failures.append((row.id, row.t, None, None))
        elif row.kind == "pair":
            by_id.setdefault(row.id, []).append(row)
    for ident, group in by_id.items():
        group.sort(key=lambda r: r.t, reverse=True)
        scaled = [mpmath.mpf(r.gap) * rescale_factor(r.t) for r in group]
        c = max(scaled[:2]) if scaled else 0
        report.constants[ident] = c
        for row, value in zip(group, scaled):
            if value > slack * c + floor:
                report.failures.append((ident, row.t, value, c))
    return report


@dataclass
class OrientationReport:
    """Per-tripod comparison of real and exact orientation signs."""

    rows: list = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    disagreements: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)

    def disagreements_below(self, t_max):
        return [d for d in self.disagreements if d[1] <= t_max]


def orientation_compare(rep, tripods, config=None, r=None):
    """Compare real tripod orientations along the schedule with the exact sign.

    Rows for schedule points where the real tripod is outside ``V(6 δ0)``
    carry the kind ``orient_outside``; their signs are still reported.  The
    threshold of a tripod is the largest ``t`` from which on all smaller
    schedule points agree with the exact sign.
    """
    config = config or RealConfig()
    r = 6 * config.delta0 if r is None else r
    exact = ExactOrbit(rep)
    report = OrientationReport()
    orbits = _real_orbits(rep, config) if tripods else []
    for words in tripods:
        ident = "|".join(rep.format(w) for w in words)
        sign = tripod_orientation(*(exact.point(w) for w in words))
        if sign == 0:
            report.degenerate.append(ident)
            for t, _ in orbits:
                report.rows.append(LimitRow("orient_degenerate", ident, t, None, 0, None))
            continue
        agree = []
        for t, real in orbits:
            try:
                if real is None:
                    raise DomainError(f"cannot evaluate at t = {t}")
                with mpmath.workprec(config.precision):
                    pts = [real.point(w) for w in words]
                    inside = in_v_set(*pts, r)
                    s = real_tripod_orientation(
                        *pts, config.eta, r, require=False, max_iter=config.max_iter
                    )
            except _EVAL_ERRORS:
                report.rows.append(LimitRow("orient_error", ident, t, None, sign, None))
                report.disagreements.append((ident, t, None, sign, False))
                agree.append(False)
                continue
            kind = "orient" if inside else "orient_outside"
            report.rows.append(LimitRow(kind, ident, t, s, sign, abs(s - sign)))
            agree.append(s == sign)
            if s != sign:
                report.disagreements.append((ident, t, s, sign, inside))
        threshold = None
        for t, ok in zip(reversed(config.schedule), reversed(agree)):
            if not ok:
                break
            threshold = t
        report.thresholds[ident] = threshold
    return report


@dataclass
class ApproximationResult:
    """Details of an oriented ε-approximation check."""

    ok: bool
    max_gap: float
    distance_failures: list = field(default_factory=list)
    orientation_failures: list = field(default_factory=list)
    tripods_checked: int = 0

    def __bool__(self):
        return self.ok


def oriented_approximation_check(rep, t0, K, Q, epsilon, config=None, *, delta0=None):
    """Whether the orbit map is an oriented ``Q``-equivariant ε-approximation of ``K``.

    (a) every ``|d(g k, h k') / λ - d_T(g k, h k')|`` is at most ``epsilon``
    for ``g, h`` in ``Q`` and ``k, k'`` in ``K``; (b) every triple of
    ``K``-points whose rescaled real tripod lies in ``V(6 δ(t0) + 9 ε)``,
    ``δ(t0) = δ0 / ln(1/t0)``, has the exact orientation sign.
    """
    config = config or RealConfig()
    delta0 = config.delta0 if delta0 is None else delta0
    t0 = Fraction(t0)
    real = RealOrbit(rep, t0, config.precision)
    exact = ExactOrbit(rep)
    eps = mpmath.mpf(epsilon)
    points = sorted({g * k for g in Q for k in K}, key=lambda w: w.sort_key())
    result = ApproximationResult(True, 0.0)
    worst = mpmath.mpf(0)
    with mpmath.workprec(config.precision):
        for u, v in itertools.combinations(points, 2):
            gap = abs(real.rescaled(u, v) - _mpf(exact.dist(u, v)))
            worst = max(worst, gap)
            if gap > eps:
                result.distance_failures.append((_pair_id(rep, u, v), float(gap)))
        lam = real.lam
        r = (6 * mpmath.mpf(delta0) / lam + 9 * eps) * lam  # back in unscaled units
        kpts = sorted(set(K), key=lambda w: w.sort_key())
        for tri in itertools.combinations(kpts, 3):
            pts = [real.point(w) for w in tri]
            if not in_v_set(*pts, r):
                continue
            result.tripods_checked += 1
            s_real = real_tripod_orientation(*pts, config.eta, r, require=False)
            s_exact = tripod_orientation(*(exact.point(w) for w in tri))
            if s_real != s_exact:
                result.orientation_failures.append(("|".join(rep.format(w) for w in tri), s_real, s_exact))
    result.max_gap = float(worst)
    result.ok = not result.distance_failures and not result.orientation_failures
    return result

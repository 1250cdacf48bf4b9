"""Finitely generated groups acting on the disk and on its Λ-tree.

The group is treated as free on its generators; words are freely reduced
sequences of ``(generator index, ±1)`` letters.  Representation files are
sectioned text read with :mod:`configparser`::

    [group]
    generators = [a, b]
    det_tolerance = exact
    normalize = sqrt          ; optional

    [a]
    m11 = t^(-1/2)
    m12 = 0
    m21 = 0
    m22 = t^(1/2)
"""

from __future__ import annotations

import configparser
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from .errors import DegenerateAction, DomainError, ParseError, ValidationError
from .field import parse_element
from .hplane import ORIGIN, DiskPoint, RepMatrix, mobius_apply, point_on_segment
from .lambda_tree import TreePoint, realize_tree, tree_dist

_ENTRY_KEYS = ("m11", "m12", "m21", "m22")


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word in the generators.

    Parameters
    ----------
    letters : tuple of (int, int)
        ``(generator index, exponent)`` pairs with exponent ``±1``; reduced on
        construction.
    """

    letters: tuple = ()

    def __post_init__(self):
        reduced = []
        for gen, exp in self.letters:
            if exp not in (1, -1):
                raise ValueError("letter exponents must be +1 or -1")
            if reduced and reduced[-1] == (gen, -exp):
                reduced.pop()
            else:
                reduced.append((int(gen), exp))
        object.__setattr__(self, "letters", tuple(reduced))

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other):
        return GroupWord(self.letters + other.letters)

    def inverse(self):
        return GroupWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        return GroupWord(self.letters * n)

    def format(self, names):
        if not self.letters:
            return "e"
        return ".".join(names[g] if e == 1 else f"{names[g]}^-1" for g, e in self.letters)

    def sort_key(self):
        return (len(self.letters), tuple((g, 0 if e == 1 else 1) for g, e in self.letters))


IDENTITY_WORD = GroupWord()

_WORD_TOKEN = re.compile(
    r"\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*"
    r"(?:(?P<inv>⁻¹)|\^\s*(?P<pow>\(\s*[-+]?\d+\s*\)|[-+]?\d+))?\s*[.*]?"
)


def parse_word(text, names):
    """Parse ``"a b^-1"``, ``"a.b⁻¹"``, ``"ab"`` or ``"e"`` into a :class:`GroupWord`."""
    index = {n: i for i, n in enumerate(names)}
    letters = []
    pos = 0
    text_end = len(text.rstrip())
    while pos < text_end:
        m = _WORD_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError("malformed word", text, pos)
        name = m.group("name")
        power = -1 if m.group("inv") else int(m.group("pow").strip("() ")) if m.group("pow") else 1
        if name in index:
            pieces = [index[name]]
        elif name == "e":
            pieces = []
        elif all(ch in index for ch in name):
            pieces = [index[ch] for ch in name]
        else:
            raise ParseError(f"unknown generator {name!r}", text, m.start("name"))
        chunk = [(g, 1) for g in pieces]
        if power < 0:
            chunk = [(g, -1) for g, _ in reversed(chunk)]
        letters.extend(chunk * abs(power))
        pos = m.end()
    return GroupWord(tuple(letters))


class Representation:
    """Generator-indexed matrices in PSL2 over the Puiseux field.

    Parameters
    ----------
    names : sequence of str
        Generator names.
    matrices : sequence of RepMatrix
        One matrix per generator, determinant exactly 1.
    """

    def __init__(self, names, matrices, *, source=None):
        if len(names) != len(matrices):
            raise ValidationError("one matrix per generator is required")
        if len(set(names)) != len(names):
            raise ValidationError("generator names must be distinct")
        self.names = list(names)
        self.matrices = list(matrices)
        self.source = source
        self._inverses = [m.inverse() for m in self.matrices]

    @property
    def rank(self):
        return len(self.names)

    def letter_matrix(self, gen, exp):
        return self.matrices[gen] if exp == 1 else self._inverses[gen]

    def word(self, text):
        return parse_word(text, self.names)

    def format(self, word):
        return word.format(self.names)

    def conjugate(self, m):
        """Representation ``g -> m g m^-1``."""
        inv = m.inverse()
        return Representation(self.names, [m @ g @ inv for g in self.matrices])

    def substitute(self, q):
        """Apply ``t -> t^q`` to every entry."""
        return Representation(self.names, [g.substitute(q) for g in self.matrices])

    def evaluate(self, t0, prec=256):
        """Generator matrices at ``t = t0`` as mpmath matrices."""
        out = []
        with mpmath.workprec(prec):
            for g in self.matrices:
                vals = [e.evaluate(t0, prec) for e in g.entries()]
                out.append(mpmath.matrix([[vals[0], vals[1]], [vals[2], vals[3]]]))
        return out

    def words(self, radius):
        """All reduced words of length at most ``radius``, shortlex ordered."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        letters = [(g, e) for g in range(self.rank) for e in (1, -1)]
        out = [IDENTITY_WORD]
        layer = [IDENTITY_WORD]
        for _ in range(radius):
            nxt = []
            for w in layer:
                for letter in letters:
                    if w.letters and w.letters[-1] == (letter[0], -letter[1]):
                        continue
                    nxt.append(GroupWord(w.letters + (letter,)))
            layer = nxt
            out.extend(layer)
        return out

    def __repr__(self):
        return f"Representation({self.names})"


def load_representation(path_or_text, *, normalize=None):
    """Read a representation file (or its text).

    ``normalize="sqrt"`` (or ``normalize = sqrt`` in the file) divides every
    matrix by the square root of its determinant when that determinant is
    positive but not 1.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    source = None
    text = path_or_text
    if isinstance(path_or_text, Path) or (
        isinstance(path_or_text, str) and "\n" not in path_or_text and "[" not in path_or_text
    ):
        source = Path(path_or_text)
        text = source.read_text()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"unreadable representation file: {exc}") from exc
    if not parser.has_section("group"):
        raise ValidationError("missing [group] section")
    group = parser["group"]
    raw = group.get("generators", "").strip()
    if raw.startswith("[") and raw.endswith("]"):
        raw = raw[1:-1]
    names = [n.strip() for n in raw.split(",") if n.strip()]
    if not names:
        raise ValidationError("no generators declared")
    tolerance = group.get("det_tolerance", "exact").strip()
    if tolerance != "exact":
        raise ValidationError(f"unsupported det_tolerance {tolerance!r}")
    mode = normalize or group.get("normalize", "").strip() or None
    if mode not in (None, "sqrt"):
        raise ValidationError(f"unsupported normalize option {mode!r}")
    matrices = []
    for name in names:
        if not parser.has_section(name):
            raise ValidationError(f"missing section [{name}]")
        section = parser[name]
        entries = []
        for key in _ENTRY_KEYS:
            if key not in section:
                raise ValidationError(f"[{name}] lacks entry {key}")
            entries.append(parse_element(section[key]))
        m = RepMatrix(*entries, check=False)
        det = m.determinant()
        if not (det - 1).is_zero():
            if mode != "sqrt":
                raise ValidationError(f"determinant of {name} is {det}, not 1")
            if det.sign() <= 0:
                raise ValidationError(f"determinant of {name} is not positive")
            root = det.sqrt()
            m = RepMatrix(*(e / root for e in entries), check=False)
        matrices.append(m)
    return Representation(names, matrices, source=source)


SHIPPED_FAMILIES = ("rank1_diagonal", "schottky_rank2", "elliptic_rank2")
_FAMILY_DIR = Path(__file__).resolve().parent / "families"


def family_path(name):
    """Path of a representation file shipped with the package."""
    path = _FAMILY_DIR / f"{name}.rep"
    if not path.is_file():
        known = ", ".join(available_families())
        raise ValidationError(f"unknown family {name!r}; shipped: {known}")
    return path


def available_families():
    """Names of every representation file shipped with the package."""
    return sorted(p.stem for p in _FAMILY_DIR.glob("*.rep"))


def load_family(name):
    return load_representation(family_path(name))


def evaluate_word(rep, word):
    """Matrix of a word (product of generator matrices and inverses)."""
    result = RepMatrix.identity()
    for gen, exp in word.letters:
        result = result @ rep.letter_matrix(gen, exp)
    return result


def act(rep, word, point):
    """``word . point`` for a disk point, applying letters right to left."""
    for gen, exp in reversed(word.letters):
        point = mobius_apply(rep.letter_matrix(gen, exp), point)
    return point


def orbit(rep, base=ORIGIN, radius=2):
    """Tree points ``w . base`` for reduced words of length at most ``radius``.

    Words are visited in shortlex order; a word whose point coincides in the
    tree with an earlier one is dropped.
    """
    points = {IDENTITY_WORD: base}
    kept = [(IDENTITY_WORD, TreePoint(base, "e"))]
    for w in rep.words(radius)[1:]:
        head, tail = w.letters[0], GroupWord(w.letters[1:])
        p = mobius_apply(rep.letter_matrix(*head), points[tail])
        points[w] = p
        tp = TreePoint(p, rep.format(w))
        if all(tree_dist(tp, q) != 0 for _, q in kept):
            kept.append((w, tp))
    return kept


def displacement(rep, p):
    """Largest tree displacement of ``p`` by a generator."""
    if isinstance(p, DiskPoint):
        p = TreePoint(p)
    return max(
        (tree_dist(p, TreePoint(mobius_apply(g, p.lift))) for g in rep.matrices),
        default=Fraction(0),
    )


def translation_length(rep, word, base=ORIGIN):
    """Translation length by the midpoint rule.

    With ``x`` the base point and ``m`` the midpoint of ``[x, g x]``, the
    translation length of ``g`` is ``d(m, g m)``.
    """
    g = evaluate_word(rep, word) if isinstance(word, GroupWord) else word
    gx = mobius_apply(g, base)
    d = tree_dist(TreePoint(base), TreePoint(gx))
    if d == 0:
        return Fraction(0)
    m = point_on_segment(base, gx, d / 2)
    return tree_dist(TreePoint(m), TreePoint(mobius_apply(g, m)))


def trace_length(rep, word):
    """``2 max(0, log_beta |tr g|)``; zero trace gives 0."""
    g = evaluate_word(rep, word) if isinstance(word, GroupWord) else word
    tr = g.trace()
    if tr.is_exact_zero():
        return Fraction(0)
    return max(Fraction(0), -2 * tr.valuation())


def axis_midpoints(rep, radius, base=ORIGIN):
    """Midpoints of ``[x, w x]`` for hyperbolic words of length at most ``radius``."""
    out = []
    for w in rep.words(radius)[1:]:
        g = evaluate_word(rep, w)
        if trace_length(rep, g) == 0:
            continue
        gx = mobius_apply(g, base)
        d = tree_dist(TreePoint(base), TreePoint(gx))
        out.append((w, TreePoint(point_on_segment(base, gx, d / 2), f"mid({rep.format(w)})")))
    return out


def orbit_sample(rep, radius=2, base=ORIGIN):
    """Orbit points plus axis midpoints, deduplicated as tree points."""
    points = [p for _, p in orbit(rep, base, radius)]
    for _, m in axis_midpoints(rep, radius, base):
        if all(tree_dist(m, q) != 0 for q in points):
            points.append(m)
    return points


def minimal_subtree_sample(rep, radius=2, base=ORIGIN):
    """Finite oriented tree spanned by the orbit and sampled axis midpoints."""
    if not axis_midpoints(rep, radius, base):
        raise DegenerateAction(f"no word of length <= {radius} acts hyperbolically")
    points = orbit_sample(rep, radius, base)
    return realize_tree(points, labels=[p.label for p in points])


def _adjoint(a):
    inv = np.linalg.inv(a)
    return np.kron(a, inv.T)


def min_vector_defect(rep, t0, prec=113):
    """Frobenius norm of ``sum_i [Ad(A_i), Ad(A_i)^T]`` at ``t = t0``.

    ``Ad(A)`` is the conjugation action ``X -> A X A^-1`` on 2x2 matrices,
    written in the row-major basis, so that ``Ad(A) = A ⊗ A^{-T}``.
    """
    total = np.zeros((4, 4))
    for m in rep.evaluate(t0, prec):
        a = np.array([[float(m[i, j]) for j in range(2)] for i in range(2)])
        if not np.all(np.isfinite(a)):
            raise DomainError(f"generator entries not finite at t = {t0}")
        ad = _adjoint(a)
        total += ad @ ad.T - ad.T @ ad
    return float(np.linalg.norm(total, "fro"))


def pairs_upto(rep, radius):
    """Unordered pairs of distinct reduced words of length at most ``radius``."""
    return list(itertools.combinations(rep.words(radius), 2))

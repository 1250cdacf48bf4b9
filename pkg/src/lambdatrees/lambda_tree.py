"""The Λ-tree obtained from the disk by collapsing pseudo-distance zero.

Points of the tree are classes of disk points; germs of segments at a point
are read off as residue directions (points of the circle over the residue
field) after translating the point to the origin.  Everything here is exact:
distances are rationals and every sign goes through exact coefficient sign
determination.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, FourPointViolation
from .field import sign
from .hplane import (
    ORIGIN,
    DiskPoint,
    point_on_segment,
    segment_frame,
    pseudo_dist,
    translate_to_origin,
)


class TreePoint:
    """Class of a disk point modulo pseudo-distance zero.

    Parameters
    ----------
    lift : DiskPoint
        Any representative; it is kept as the canonical lift.
    label : str, optional
        Free-form name used in exports.
    """

    __slots__ = ("lift", "label")

    def __init__(self, lift, label=None):
        if not isinstance(lift, DiskPoint):
            raise TypeError("lift must be a DiskPoint")
        self.lift = lift
        self.label = label

    def __eq__(self, other):
        if not isinstance(other, TreePoint):
            return NotImplemented
        return tree_dist(self, other) == 0

    __hash__ = None

    def substitute(self, q):
        return TreePoint(self.lift.substitute(q), self.label)

    def __repr__(self):
        name = f" {self.label}" if self.label is not None else ""
        return f"TreePoint({self.lift!r}{name})"


def _cross(u, v):
    return sign(u[0] * v[1] - u[1] * v[0])


def _dot(u, v):
    return sign(u[0] * v[0] + u[1] * v[1])


class ResidueDirection:
    """Nonzero residue vector ``(c1, c2)`` up to positive scaling."""

    __slots__ = ("c1", "c2")

    def __init__(self, c1, c2):
        if sign(c1) == 0 and sign(c2) == 0:
            raise DomainError("residue direction must be nonzero")
        self.c1 = c1
        self.c2 = c2

    @property
    def vector(self):
        return (self.c1, self.c2)

    def parallel(self, other):
        """Positive parallelism, the equality of points on the residue circle."""
        return _cross(self.vector, other.vector) == 0 and _dot(self.vector, other.vector) > 0

    def __eq__(self, other):
        if not isinstance(other, ResidueDirection):
            return NotImplemented
        return self.parallel(other)

    __hash__ = None

    def _half(self):
        s2 = sign(self.c2)
        return 0 if s2 > 0 or (s2 == 0 and sign(self.c1) > 0) else 1

    def __float__(self):  # angle in radians, for display only
        return math.atan2(float(self.c2), float(self.c1))

    def __repr__(self):
        return f"ResidueDirection({self.c1}, {self.c2})"


def angular_compare(u, v):
    """Comparator ordering directions by angle in ``[0, 2*pi)``."""
    hu, hv = u._half(), v._half()
    if hu != hv:
        return -1 if hu < hv else 1
    return -_cross(u.vector, v.vector)


def ccw(u, v):
    """Sign of the cross determinant of two directions."""
    return _cross(u.vector, v.vector)


def cyclic_order(d1, d2, d3):
    """Cyclic order of three points of the residue circle, in ``{-1, 0, 1}``."""
    if d1.parallel(d2) or d2.parallel(d3) or d1.parallel(d3):
        return 0
    total = ccw(d1, d2) + ccw(d2, d3) + ccw(d3, d1)
    return (total > 0) - (total < 0)


def tree_dist(p, q):
    """Tree distance between two points (pseudo-distance of the lifts)."""
    return pseudo_dist(p.lift, q.lift)


def gromov_product(x, y, p):
    """``(x, y)_p``, the distance from ``p`` to the segment ``[x, y]``."""
    return (tree_dist(x, p) + tree_dist(p, y) - tree_dist(x, y)) / 2


def median(x, y, z):
    """Center of the tripod spanned by three tree points."""
    s = gromov_product(y, z, x)
    return TreePoint(point_on_segment(x.lift, y.lift, s))


def germ_direction(p, x):
    """Residue direction of the germ of ``[p, x]`` at ``p``."""
    if tree_dist(p, x) == 0:
        raise DomainError("germ direction needs two distinct tree points")
    return ResidueDirection(*translate_to_origin(p.lift).leading_direction(x.lift))


def germ_equal(p, x, y):
    """Whether ``[p, x]`` and ``[p, y]`` share an initial segment."""
    return gromov_product(x, y, p) > 0


def tripod_orientation(x, y, z):
    """Orientation of the tripod ``(x, y, z)`` read at its center.

    The center lies at distance ``(y, z)_x`` from ``x`` on ``[x, y]``; the
    germs are read in the frame where ``x`` sits at the origin, which is
    legitimate since disk automorphisms preserve the cyclic order of germs.
    """
    dxy, dxz, dyz = tree_dist(x, y), tree_dist(x, z), tree_dist(y, z)
    s = (dxy + dxz - dyz) / 2
    if s == 0 or s == dxy or s == dxz:
        return 0
    frame, centre = segment_frame(x.lift, y.lift, s)
    to_centre = translate_to_origin(centre)
    legs = (ORIGIN, frame(y.lift), frame(z.lift))
    directions = [ResidueDirection(*to_centre.leading_direction(leg)) for leg in legs]
    return cyclic_order(*directions)


# --------------------------------------------------------------------------
# four-point condition


@dataclass
class FourPointReport:
    """Outcome of an exhaustive four-point check."""

    n_points: int
    n_quadruples: int
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations


def distance_matrix(points):
    n = len(points)
    dist = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        dist[i][j] = dist[j][i] = tree_dist(points[i], points[j])
    return dist


def four_point_violations(dist):
    """Quadruples of a distance matrix where the two largest pair sums differ."""
    n = len(dist)
    bad = []
    count = 0
    for i, j, k, l in itertools.combinations(range(n), 4):
        count += 1
        sums = sorted(
            (dist[i][j] + dist[k][l], dist[i][k] + dist[j][l], dist[i][l] + dist[j][k])
        )
        if sums[1] != sums[2]:
            bad.append(((i, j, k, l), tuple(sums)))
    return count, bad


def check_four_point(points):
    """Exhaustive four-point check on a list of tree points (or a distance matrix)."""
    if points and not isinstance(points[0], TreePoint):
        dist = [[Fraction(v) for v in row] for row in points]
    else:
        dist = distance_matrix(points)
    if len(dist) < 4:
        raise ValueError("four-point check needs at least four points")
    count, bad = four_point_violations(dist)
    return FourPointReport(len(dist), count, bad)


# --------------------------------------------------------------------------
# finite trees


@dataclass
class FiniteTree:
    """Finite metric tree with circular orders at branch vertices.

    Attributes
    ----------
    adjacency : dict
        ``vertex -> {neighbor: length}`` with positive rational lengths.
    tags : dict
        ``vertex -> list of input indices`` located at that vertex.
    labels : dict
        ``vertex -> display name``.
    local_orders : dict
        ``vertex -> tuple of neighbors`` in counterclockwise order, for
        every vertex of degree at least three.
    lifts : dict
        ``vertex -> TreePoint`` used for germ computations.
    """

    adjacency: dict = field(default_factory=dict)
    tags: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)
    local_orders: dict = field(default_factory=dict)
    lifts: dict = field(default_factory=dict)

    @property
    def vertices(self):
        return sorted(self.adjacency)

    def edges(self):
        return [
            (u, v, length)
            for u in sorted(self.adjacency)
            for v, length in sorted(self.adjacency[u].items())
            if u < v
        ]

    def degree(self, v):
        return len(self.adjacency[v])

    @property
    def leaves(self):
        return [v for v in self.vertices if self.degree(v) == 1]

    def is_path(self):
        return all(self.degree(v) <= 2 for v in self.adjacency)

    def add_vertex(self):
        v = len(self.adjacency)
        self.adjacency[v] = {}
        return v

    def add_edge(self, u, v, length):
        if length <= 0:
            raise ValueError("edge lengths must be positive")
        self.adjacency[u][v] = length
        self.adjacency[v][u] = length

    def remove_edge(self, u, v):
        del self.adjacency[u][v]
        del self.adjacency[v][u]

    def path(self, u, v):
        """Vertex sequence from ``u`` to ``v``."""
        parent = {u: None}
        stack = [u]
        while stack:
            w = stack.pop()
            if w == v:
                break
            for n in self.adjacency[w]:
                if n not in parent:
                    parent[n] = w
                    stack.append(n)
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]

    def distances_from(self, u):
        dist = {u: Fraction(0)}
        stack = [u]
        while stack:
            w = stack.pop()
            for n, length in self.adjacency[w].items():
                if n not in dist:
                    dist[n] = dist[w] + length
                    stack.append(n)
        return dist

    def vertex_of(self, index):
        for v, idx in self.tags.items():
            if index in idx:
                return v
        raise KeyError(index)

    def side(self, v, n):
        """Vertices reachable from ``n`` without passing through ``v``."""
        seen = {v, n}
        stack = [n]
        while stack:
            w = stack.pop()
            for m in self.adjacency[w]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        seen.discard(v)
        return seen

    def reversed(self):
        """Same tree with every local order reversed."""
        return FiniteTree(
            {v: dict(n) for v, n in self.adjacency.items()},
            {v: list(i) for v, i in self.tags.items()},
            dict(self.labels),
            {v: tuple(reversed(o)) for v, o in self.local_orders.items()},
            dict(self.lifts),
        )

    def name(self, v):
        return self.labels.get(v, f"v{v}")

    def to_text(self):
        """Edge list, local orders and the boundary leaf order as plain text."""
        lines = [f"{self.name(u)} {self.name(v)} {length}" for u, v, length in self.edges()]
        for v in sorted(self.local_orders):
            names = " ".join(self.name(n) for n in self.local_orders[v])
            lines.append(f"order {self.name(v)}: {names}")
        if self.local_orders or self.leaves:
            leaves = " ".join(self.name(v) for v in boundary_cyclic_order(self))
            lines.append(f"leaves: {leaves}")
        return "\n".join(lines) + "\n"

    def to_dot(self):
        lines = ["graph tree {"]
        for v in self.vertices:
            shape = "box" if v in self.tags else "point"
            lines.append(f'  v{v} [label="{self.name(v)}", shape={shape}];')
        for u, v, length in self.edges():
            lines.append(f'  v{u} -- v{v} [label="{length}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _locate(tree, start, end, s):
    """Vertex at distance ``s`` from ``start`` on the path to ``end``, subdividing if needed.

    Returns ``(vertex, created)``.
    """
    path = tree.path(start, end)
    walked = Fraction(0)
    for u, v in zip(path, path[1:]):
        if walked == s:
            return u, False
        length = tree.adjacency[u][v]
        if walked + length > s:
            w = tree.add_vertex()
            tree.remove_edge(u, v)
            tree.add_edge(u, w, s - walked)
            tree.add_edge(w, v, walked + length - s)
            return w, True
        walked += length
    if walked == s:
        return path[-1], False
    raise FourPointViolation("attachment point lies beyond the spanned subtree")


def realize_tree(points, labels=None, *, orders=True, verify=True):
    """Finite tree whose path metric reproduces the tree distances of ``points``.

    Points are inserted one at a time; each new point is attached at the
    foot of its projection onto the subtree spanned so far, located with
    Gromov products.  Local circular orders at branch vertices come from
    germ directions when ``orders`` is true.

    ``points`` may also be a square matrix of rational distances; the tree
    then carries no lifts and no local orders.
    """
    n = len(points)
    if n == 0:
        raise ValueError("need at least one point")
    lifted = isinstance(points[0], TreePoint)
    if lifted:
        dist = distance_matrix(points)
    else:
        dist = [[Fraction(v) for v in row] for row in points]
        orders = False
    tree = FiniteTree()
    v0 = tree.add_vertex()
    tree.tags[v0] = [0]
    if lifted:
        tree.lifts[v0] = points[0]
    where = [v0]
    for k in range(1, n):
        same = next((j for j in range(k) if dist[k][j] == 0), None)
        if same is not None:
            v = where[same]
            tree.tags[v].append(k)
            where.append(v)
            continue
        best, s = 0, Fraction(0)
        for j in range(1, k):
            g = (dist[k][0] + dist[0][j] - dist[k][j]) / 2
            if g > s:
                best, s = j, g
        if best == 0:
            anchor = where[0]
        else:
            anchor, created = _locate(tree, where[0], where[best], s)
            if created and lifted:
                tree.lifts[anchor] = TreePoint(
                    point_on_segment(points[0].lift, points[best].lift, s)
                )
        pendant = dist[k][0] - s
        if pendant < 0:
            raise FourPointViolation("negative pendant length")
        if pendant == 0:
            tree.tags.setdefault(anchor, []).append(k)
            if lifted:
                tree.lifts[anchor] = points[k]
            where.append(anchor)
            continue
        v = tree.add_vertex()
        tree.add_edge(anchor, v, pendant)
        tree.tags[v] = [k]
        if lifted:
            tree.lifts[v] = points[k]
        where.append(v)
    if labels is not None:
        for v, idx in tree.tags.items():
            tree.labels[v] = "/".join(str(labels[i]) for i in idx)
    if verify:
        for i in range(n):
            from_i = tree.distances_from(where[i])
            for j in range(n):
                if from_i[where[j]] != dist[i][j]:
                    raise FourPointViolation(
                        f"tree path length {from_i[where[j]]} != distance {dist[i][j]}"
                        f" between points {i} and {j}"
                    )
    if orders:
        _attach_local_orders(tree, points, where)
    return tree


def _attach_local_orders(tree, points, where):
    rep_vertex = {}
    for idx, v in enumerate(where):
        rep_vertex.setdefault(v, idx)
    for v in tree.vertices:
        if tree.degree(v) < 3:
            continue
        centre = tree.lifts[v]
        entries = []
        for n in tree.adjacency[v]:
            side = tree.side(v, n)
            target = next(rep_vertex[w] for w in sorted(side) if w in rep_vertex)
            entries.append((germ_direction(centre, points[target]), n))
        entries.sort(key=functools.cmp_to_key(lambda a, b: angular_compare(a[0], b[0])))
        tree.local_orders[v] = tuple(n for _, n in entries)


def boundary_cyclic_order(tree):
    """Leaves in the circular order induced by the local orders.

    The contour walk leaves each vertex along the edge following, in the
    local counterclockwise order, the edge it arrived by.
    """
    leaves = tree.leaves
    if len(leaves) <= 2:
        return leaves
    for v in tree.vertices:
        if tree.degree(v) >= 3 and v not in tree.local_orders:
            raise ValueError(f"vertex {v} has no local order")
    start = leaves[0]
    out = [start]
    prev, cur = start, next(iter(tree.adjacency[start]))
    while True:
        if tree.degree(cur) == 1:
            if cur == start:
                return out
            out.append(cur)
            prev, cur = cur, prev
            continue
        if tree.degree(cur) == 2:
            a, b = tree.adjacency[cur]
            prev, cur = cur, (b if a == prev else a)
            continue
        order = tree.local_orders[cur]
        nxt = order[(order.index(prev) + 1) % len(order)]
        prev, cur = cur, nxt


def circular_sign(sequence, a, b, c):
    """Sign of ``(a, b, c)`` in a circular sequence: +1 if they appear in that cyclic order."""
    if len({a, b, c}) < 3:
        return 0
    i, j, k = (sequence.index(x) for x in (a, b, c))
    return 1 if (i < j < k) or (j < k < i) or (k < i < j) else -1

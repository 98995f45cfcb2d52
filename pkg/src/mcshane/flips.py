"""Ideal triangulations as half-edge maps, flips, and the labelling of the tree.

Conventions (one sign choice, pinned by ``order_check``):

* ``succ[e]`` is the next side of the triangle lying to the right of e.
  Triangles are 3-cycles of ``succ``.
* ``origin[e]`` is the puncture e starts at; e ends at ``origin[bar[e]]``.
* Flipping x replaces it by the other diagonal f of the quadrilateral; f
  reuses the slot of x and runs from the apex of x's right triangle to the
  apex of its left triangle.  With developing vectors this makes
  det(v_x, v_f) > 0.
* The right move flips succ(e); the left move flips succ(succ(bar e)).
  The marked edge afterwards is the new diagonal.
* Corners around a puncture are visited clockwise by
  ``tau(e) = succ(bar(succ(e)))``, where a corner is named by its opposite
  edge.  Root edges of the tree are flips of consecutive corners at the base
  puncture, so the tree's linear order is the clockwise order of arcs.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Union

from .planar_tree import LEFT, RIGHT, EdgeAddress, EdgeRegion, RegionId, RootRegion, TreeShape, iter_spheres


class FlipUndefinedError(ValueError):
    """The edge has the same triangle on both sides."""


class BlockedMoveError(ValueError):
    def __init__(self, side: str, msg: str = ""):
        self.side = side
        super().__init__(msg or f"{side}-move is blocked")


class UnsupportedSurfaceError(ValueError):
    pass


Vector = tuple


def cross(a: Vector, b: Vector) -> int:
    """Positive iff b is counter-clockwise of a (within a half turn)."""
    return a[0] * b[1] - a[1] * b[0]


@dataclass(frozen=True)
class CombinatorialTriangulation:
    succ: tuple
    bar: tuple
    origin: tuple
    names: tuple
    vectors: Optional[tuple] = None  # developing vectors on the torus

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid triangulation: " + "; ".join(problems))

    def problems(self) -> list:
        n = len(self.succ)
        out = []
        if not (len(self.bar) == len(self.origin) == len(self.names) == n) or n == 0 or n % 6:
            return ["array lengths disagree or are not a multiple of 6"]
        for e in range(n):
            if self.bar[e] == e or self.bar[self.bar[e]] != e:
                out.append(f"bar is not a free involution at {e}")
            if self.succ[e] == e or self.succ[self.succ[self.succ[e]]] != e:
                out.append(f"succ is not a 3-cycle at {e}")
            if self.origin[self.succ[e]] != self.origin[self.bar[e]]:
                out.append(f"edge after {e} does not start where {e} ends")
        if self.vectors is not None:
            for e in range(n):
                v, w = self.vectors[e], self.vectors[self.bar[e]]
                if (v[0] + w[0], v[1] + w[1]) != (0, 0):
                    out.append(f"vectors of {e} and its reverse do not cancel")
                a, b = self.vectors[self.succ[e]], self.vectors[self.succ[self.succ[e]]]
                if (v[0] + a[0] + b[0], v[1] + a[1] + b[1]) != (0, 0):
                    out.append(f"triangle right of {e} does not close")
        return out

    @property
    def size(self) -> int:
        return len(self.succ)

    def end(self, e: int) -> int:
        return self.origin[self.bar[e]]

    def unoriented(self, e: int) -> int:
        return min(e, self.bar[e])

    def edges(self) -> list:
        return sorted({self.unoriented(e) for e in range(self.size)})

    def triangles(self) -> list:
        seen, out = set(), []
        for e in range(self.size):
            if e in seen:
                continue
            tri = (e, self.succ[e], self.succ[self.succ[e]])
            seen.update(tri)
            out.append(tri)
        return out

    def punctures(self) -> list:
        return sorted(set(self.origin))

    def euler_characteristic(self) -> int:
        return len(self.punctures()) - self.size // 2 + self.size // 3

    def tau(self, e: int) -> int:
        """Next corner clockwise around the corner's vertex."""
        return self.succ[self.bar[self.succ[e]]]

    def corner_vertex(self, e: int) -> int:
        """Puncture at the corner opposite e in e's right triangle."""
        return self.origin[self.succ[self.succ[e]]]

    def valence(self, p: int) -> int:
        return sum(1 for o in self.origin if o == p)

    def is_flippable(self, x: int) -> bool:
        xb = self.bar[x]
        return xb not in (self.succ[x], self.succ[self.succ[x]])

    def flip(self, x: int) -> "CombinatorialTriangulation":
        if not self.is_flippable(x):
            raise FlipUndefinedError(f"edge {self.names[x]} is self-folded")
        succ, origin = list(self.succ), list(self.origin)
        xb = self.bar[x]
        x1 = succ[x]
        x2 = succ[x1]
        y1 = succ[xb]
        y2 = succ[y1]
        f, fb = x, xb
        succ[y2], succ[x1], succ[f] = x1, f, y2
        succ[x2], succ[y1], succ[fb] = y1, fb, x2
        origin[f] = self.origin[x2]
        origin[fb] = self.origin[y2]
        vectors = self.vectors
        if vectors is not None:
            vectors = list(vectors)
            v = (vectors[x2][0] + vectors[y1][0], vectors[x2][1] + vectors[y1][1])
            vectors[f] = v
            vectors[fb] = (-v[0], -v[1])
            vectors = tuple(vectors)
        return CombinatorialTriangulation(tuple(succ), self.bar, tuple(origin), self.names, vectors)

    def serialize(self) -> str:
        rows = [f"{self.names[e]} {self.names[self.bar[e]]} {self.names[self.succ[e]]} {self.origin[e]}" for e in range(self.size)]
        return "\n".join(rows) + "\n"

    @classmethod
    def parse(cls, text: str) -> "CombinatorialTriangulation":
        rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
        names = tuple(r[0] for r in rows)
        index = {name: i for i, name in enumerate(names)}
        try:
            bar = tuple(index[r[1]] for r in rows)
            succ = tuple(index[r[2]] for r in rows)
        except KeyError as exc:
            raise ValueError(f"unknown edge name {exc}") from None
        origin = tuple(int(r[3]) for r in rows)
        return cls(succ, bar, origin, names)


def torus() -> CombinatorialTriangulation:
    """Once-punctured torus with edge slopes (1,0), (0,1), (1,1).

    Slots are numbered so that tau(k) = k + 1: going clockwise around the
    cusp, consecutive corners face e1, e2, ..., e6.
    """
    vectors = ((1, 0), (0, -1), (-1, -1), (-1, 0), (0, 1), (1, 1))
    succ = tuple((k + 2) % 6 for k in range(6))
    bar = tuple((k + 3) % 6 for k in range(6))
    names = tuple(f"e{k + 1}" for k in range(6))
    return CombinatorialTriangulation(succ, bar, (0,) * 6, names, vectors)


def thrice_punctured_sphere() -> CombinatorialTriangulation:
    # a: 0->1, b: 1->2, c: 2->0 and their reverses
    succ = (1, 2, 0, 5, 3, 4)
    bar = (3, 4, 5, 0, 1, 2)
    origin = (0, 1, 2, 1, 2, 0)
    names = ("a", "b", "c", "A", "B", "C")
    return CombinatorialTriangulation(succ, bar, origin, names)


def twice_punctured_torus() -> CombinatorialTriangulation:
    """The torus with one triangle coned off to a second puncture."""
    t = torus()
    succ = list(t.succ) + [0] * 6
    bar = list(t.bar) + [9, 10, 11, 6, 7, 8]
    origin = list(t.origin) + [1, 1, 1, 0, 0, 0]
    # spokes u_i run from puncture 1 to the start of side i of triangle (0, 2, 4)
    sides = (0, 2, 4)
    for i, side in enumerate(sides):
        into = 9 + (i + 1) % 3  # reverse of the spoke at the side's end
        out = 6 + i
        succ[side], succ[into], succ[out] = into, out, side
    names = t.names + ("u1", "u2", "u3", "v1", "v2", "v3")
    return CombinatorialTriangulation(tuple(succ), tuple(bar), tuple(origin), names)


def build_surface(genus: int, punctures: int) -> CombinatorialTriangulation:
    builders = {(1, 1): torus, (0, 3): thrice_punctured_sphere, (1, 2): twice_punctured_torus}
    try:
        return builders[(genus, punctures)]()
    except KeyError:
        raise UnsupportedSurfaceError(f"no shipped triangulation for genus {genus} with {punctures} punctures") from None


@dataclass(frozen=True)
class MarkedTriangulation:
    tri: CombinatorialTriangulation
    marked: int
    address: Optional[EdgeAddress] = None

    @property
    def name(self) -> str:
        return self.tri.names[self.marked]

    def key(self) -> tuple:
        return (self.tri.succ, self.tri.origin, self.tri.vectors, self.marked)


def flip(m: MarkedTriangulation) -> MarkedTriangulation:
    return MarkedTriangulation(m.tri.flip(m.marked), m.marked)


def is_right_blocked(m: MarkedTriangulation) -> bool:
    t, e = m.tri, m.marked
    return t.succ[t.succ[e]] == t.bar[t.succ[e]]


def is_left_blocked(m: MarkedTriangulation) -> bool:
    t = m.tri
    eb = t.bar[m.marked]
    return t.succ[t.succ[eb]] == t.bar[t.succ[eb]]


def move_edge(m: MarkedTriangulation, side: str) -> int:
    """Slot flipped by the right ("R") or left ("L") move."""
    t, e = m.tri, m.marked
    if side == RIGHT:
        if is_right_blocked(m):
            raise BlockedMoveError(RIGHT, f"right move at {m.name} bounds a punctured disk")
        x = t.succ[e]
    elif side == LEFT:
        if is_left_blocked(m):
            raise BlockedMoveError(LEFT, f"left move at {m.name} bounds a punctured disk")
        x = t.succ[t.succ[t.bar[e]]]
    else:
        raise ValueError(f"side must be L or R, got {side!r}")
    if not t.is_flippable(x):
        raise BlockedMoveError(side, f"{side}-move flips a self-folded edge")
    return x


def right_move(m: MarkedTriangulation) -> MarkedTriangulation:
    x = move_edge(m, RIGHT)
    return MarkedTriangulation(m.tri.flip(x), x)


def left_move(m: MarkedTriangulation) -> MarkedTriangulation:
    x = move_edge(m, LEFT)
    return MarkedTriangulation(m.tri.flip(x), x)


def root_corners(t0: CombinatorialTriangulation, base: int = 0) -> list:
    """Corners at the base puncture, clockwise, whose opposite edge flips.

    The list starts at the lowest-numbered corner.
    """
    corners = [e for e in range(t0.size) if t0.corner_vertex(e) == base]
    if not corners:
        raise ValueError(f"puncture {base} has no corners")
    start = min(corners)
    cycle, e = [start], t0.tau(start)
    while e != start:
        cycle.append(e)
        e = t0.tau(e)
    return [e for e in cycle if t0.is_flippable(e)]


class LabelTree:
    """Labels tree edges by marked triangulations: root k is the flip of the
    k-th corner, then each letter applies the right or left move.

    ``mirror=True`` swaps the two moves (and therefore reverses the root
    order); it exists as a negative control for the orientation convention.
    """

    def __init__(self, t0: CombinatorialTriangulation, base: int = 0, mirror: bool = False):
        self.t0 = t0
        self.base = base
        self.mirror = mirror
        corners = root_corners(t0, base)
        if mirror:
            corners = corners[:1] + corners[:0:-1]
        self.corners = corners
        self._memo: dict = {}
        self._shape = None

    @property
    def root_degree(self) -> int:
        return len(self.corners)

    def _move(self, m: MarkedTriangulation, letter: str) -> MarkedTriangulation:
        if self.mirror:
            letter = LEFT if letter == RIGHT else RIGHT
        x = move_edge(m, letter)
        return MarkedTriangulation(m.tri.flip(x), x)

    def label(self, addr: EdgeAddress) -> MarkedTriangulation:
        try:
            return self._memo[addr]
        except KeyError:
            pass
        if not 0 <= addr.root < self.root_degree:
            raise ValueError(f"root index {addr.root} out of range")
        if addr.word:
            parent = self.label(addr.parent)
            m = self._move(parent, addr.word[-1])
        else:
            sigma = self.corners[addr.root]
            m = MarkedTriangulation(self.t0.flip(sigma), sigma)
        m = MarkedTriangulation(m.tri, m.marked, addr)
        self._memo[addr] = m
        return m

    def region_label(self, region: RegionId) -> MarkedTriangulation:
        if isinstance(region, EdgeRegion):
            return self.label(region.address)
        sigma = self.corners[region.index]
        if self.mirror:
            sigma = self.corners[(region.index + 1) % self.root_degree]
        return MarkedTriangulation(self.t0, self.t0.bar[self.t0.succ[sigma]])

    def blocked(self, addr: EdgeAddress) -> tuple:
        """(left_blocked, right_blocked) in tree terms."""
        m = self.label(addr)
        r, l = is_right_blocked(m), is_left_blocked(m)
        if self.mirror:
            r, l = l, r
        return l, r

    def blocked_side(self, addr: EdgeAddress) -> Optional[str]:
        l, r = self.blocked(addr)
        if l and r:
            raise BlockedMoveError("LR", f"{addr} is blocked on both sides")
        return LEFT if l else RIGHT if r else None

    def shape(self) -> TreeShape:
        if self._shape is None:
            single = self.t0.punctures() == [self.base]
            self._shape = TreeShape(self.root_degree, None if single else self.blocked_side)
        return self._shape

    def enumerate(self, depth: int):
        """Yield (address, state, left_blocked, right_blocked) level by level.

        Works on every surface, including ones with both-blocked states.
        """
        level = [EdgeAddress(k) for k in range(self.root_degree)]
        for n in range(1, depth + 1):
            nxt = []
            for a in level:
                m = self.label(a)
                lb, rb = self.blocked(a)
                yield a, m, lb, rb
                if not lb:
                    nxt.append(a.child(LEFT))
                if not rb:
                    nxt.append(a.child(RIGHT))
            level = nxt


def label(t0: CombinatorialTriangulation, addr: EdgeAddress) -> MarkedTriangulation:
    return LabelTree(t0).label(addr)


# ---------------------------------------------------------------- torus slopes


@dataclass(frozen=True)
class Slope:
    """Primitive (p, q) with q > 0, or q = 0 and p > 0; ``sign`` carries the
    orientation, so the oriented vector is sign * (p, q)."""

    p: int
    q: int
    sign: int = 1

    def __post_init__(self):
        if (self.p, self.q) == (0, 0):
            raise ValueError("zero slope")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"({self.p},{self.q}) is not primitive")
        if not (self.q > 0 or (self.q == 0 and self.p > 0)):
            raise ValueError(f"({self.p},{self.q}) is not the canonical representative")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_vector(cls, v: Vector) -> "Slope":
        p, q = v
        if q > 0 or (q == 0 and p > 0):
            return cls(p, q, 1)
        return cls(-p, -q, -1)

    @property
    def vector(self) -> Vector:
        return (self.sign * self.p, self.sign * self.q)

    def unoriented(self) -> tuple:
        return (self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}{'+' if self.sign > 0 else '-'}"

    @classmethod
    def parse(cls, text: str) -> "Slope":
        """``"p/q"`` read as the vector (p, q); a trailing + or - flips it."""
        text = text.strip()
        sign = 1
        if text and text[-1] in "+-" and "/" in text[:-1]:
            sign = -1 if text[-1] == "-" else 1
            text = text[:-1]
        num, sep, den = text.partition("/")
        if not sep:
            raise ValueError(f"expected p/q, got {text!r}")
        p, q = int(num), int(den)
        return cls.from_vector((sign * p, sign * q))


def _require_vectors(t: CombinatorialTriangulation):
    if t.vectors is None:
        raise UnsupportedSurfaceError("slopes are only tracked on the once-punctured torus")


def arc_slope(m: MarkedTriangulation) -> Slope:
    _require_vectors(m.tri)
    return Slope.from_vector(m.tri.vectors[m.marked])


def slope_triple(t: CombinatorialTriangulation) -> frozenset:
    _require_vectors(t)
    return frozenset(Slope.from_vector(t.vectors[e]).unoriented() for e in t.edges())


def farey_neighbours(t: CombinatorialTriangulation) -> bool:
    """Every pair of edge slopes has determinant +-1."""
    _require_vectors(t)
    vs = [t.vectors[e] for e in t.edges()]
    return all(abs(cross(a, b)) == 1 for i, a in enumerate(vs) for b in vs[i + 1 :])


@dataclass(frozen=True)
class T0Edge:
    """Marker returned by ``encode`` for arcs that are already edges of T0."""

    name: str
    slot: int

    def __str__(self):
        return f"edge-of-T0: {self.name}"


def encode(tree: LabelTree, slope: Slope) -> Union[EdgeAddress, T0Edge]:
    """Address whose label carries the given oriented arc.

    Descends by angle: at each labelled arc the target lies clockwise (right
    subtree) or counter-clockwise (left subtree).
    """
    t0 = tree.t0
    _require_vectors(t0)
    if tree.mirror:
        raise ValueError("encoding is defined for the standard convention only")
    target = slope.vector
    for e in range(t0.size):
        if t0.vectors[e] == target:
            return T0Edge(t0.names[e], e)
    n = tree.root_degree
    arcs = [t0.vectors[tree.region_label(RootRegion(i)).marked] for i in range(n)]
    root = next(
        (k for k in range(n) if cross(arcs[k - 1], target) < 0 and cross(target, arcs[k]) < 0),
        None,
    )
    if root is None:
        raise ValueError(f"slope {slope} lies in no root sector")
    addr = EdgeAddress(root)
    bound = abs(target[0]) + abs(target[1]) + 2
    while addr.depth <= bound:
        m = tree.label(addr)
        w = m.tri.vectors[m.marked]
        if w == target:
            return addr
        addr = addr.child(RIGHT if cross(w, target) < 0 else LEFT)
    raise RuntimeError(f"descent for {slope} did not terminate")


def decode(tree: LabelTree, addr: EdgeAddress) -> Slope:
    return arc_slope(tree.label(addr))


def clockwise_angle(reference: Vector, v: Vector) -> float:
    """Clockwise angle from reference to v, in (0, 2*pi]."""
    a = math.atan2(reference[1], reference[0]) - math.atan2(v[1], v[0])
    a %= 2 * math.pi
    return a if a > 0 else 2 * math.pi


@dataclass
class OrderReport:
    depth: int
    passed: bool
    checked: int
    first_violation: Optional[str] = None


def order_check(tree: LabelTree, depth: int) -> OrderReport:
    """Lexicographic address order against clockwise arc order at the cusp,
    measured from the arc of the cut region."""
    t0 = tree.t0
    _require_vectors(t0)
    cut = t0.vectors[tree.region_label(RootRegion(tree.root_degree - 1)).marked]
    checked = 0
    for d, level in enumerate(iter_spheres(TreeShape(tree.root_degree), depth), 1):
        prev = None
        for addr in level:
            m = tree.label(addr)
            angle = clockwise_angle(cut, m.tri.vectors[m.marked])
            if prev is not None and not angle > prev[1]:
                return OrderReport(d, False, checked, f"{prev[0]} >= {addr} in clockwise order")
            prev = (addr, angle)
            checked += 1
    return OrderReport(depth, True, checked)


def intersection_length(slope: Slope, t0: CombinatorialTriangulation) -> int:
    """Interior crossings of the arc with the edges of t0 (the shared
    puncture is not counted)."""
    _require_vectors(t0)
    v = slope.vector
    return sum(max(abs(cross(v, t0.vectors[e])) - 1, 0) for e in t0.edges())


@dataclass
class BoundReport:
    rows: list
    slope_coef: float
    offset: float
    max_ratio: float
    holds: bool


def tree_vs_intersection_bound(tree: LabelTree, slopes: list) -> BoundReport:
    """Tree length (depth of the code) against intersection with t0.

    The affine bound is fitted: least-squares slope, then the smallest
    offset making it hold on every sample.
    """
    rows = []
    for s in slopes:
        code = encode(tree, s)
        length = 0 if isinstance(code, T0Edge) else code.depth
        rows.append((s, length, intersection_length(s, tree.t0)))
    pts = [(i, lam) for _, lam, i in rows]
    n = len(pts)
    mi = sum(p[0] for p in pts) / n
    ml = sum(p[1] for p in pts) / n
    var = sum((p[0] - mi) ** 2 for p in pts)
    a = sum((p[0] - mi) * (p[1] - ml) for p in pts) / var if var else 0.0
    a = max(a, 0.0)
    b = max(lam - a * i for i, lam in pts)
    ratios = [lam / i for i, lam in pts if i > 0]
    return BoundReport(rows, a, b, max(ratios) if ratios else 0.0, all(lam <= a * i + b + 1e-12 for i, lam in pts))


def enumeration_csv(tree: LabelTree, depth: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["address", "slope", "left_blocked", "right_blocked"])
    for addr, m, lb, rb in tree.enumerate(depth):
        slope = str(arc_slope(m)) if m.tri.vectors is not None else ""
        w.writerow([str(addr), slope, int(lb), int(rb)])
    return buf.getvalue()


def isolate_puncture(t: CombinatorialTriangulation, p: int) -> CombinatorialTriangulation:
    """Flip edges at puncture p until it has valence 1 (a punctured monogon)."""
    while t.valence(p) > 1:
        for x in range(t.size):
            if t.origin[x] != p or not t.is_flippable(x):
                continue
            # the new diagonal joins the two apexes; neither may be p
            apexes = (t.origin[t.succ[t.succ[x]]], t.origin[t.succ[t.succ[t.bar[x]]]])
            if p not in apexes:
                t = t.flip(x)
                break
        else:
            raise RuntimeError(f"cannot reduce the valence of puncture {p}")
    return t


def right_blocked_example(t: CombinatorialTriangulation, base: int = 0) -> MarkedTriangulation:
    """A state whose right triangle is the punctured monogon (e, a, bar a)."""
    other = next(p for p in t.punctures() if p != base)
    t = isolate_puncture(t, other)
    for e in range(t.size):
        m = MarkedTriangulation(t, e)
        if t.origin[e] == base and is_right_blocked(m):
            return m
    raise RuntimeError("no right-blocked state found")

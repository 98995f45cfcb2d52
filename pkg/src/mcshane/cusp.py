"""Decorated ideal triangulations and the horocyclic harmonic form.

Lambda lengths live on unoriented edges and flip by the Ptolemy relation.
A corner of an ideal triangle has horocyclic length
lambda_opposite / (lambda_side * lambda_side).  The form of an outgoing edge
at the base cusp is the length of its two adjacent corners divided by the
full horocycle length, so the root masses add up to 1.

The once-punctured torus extras: traces (trace = lambda * horocycle / 2,
which is 3 * lambda on the modular torus), Markoff triples, the McShane term
and a holonomy-only recomputation of the form on the modular torus.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Mapping, Optional

from .flips import (
    CombinatorialTriangulation,
    LabelTree,
    MarkedTriangulation,
    UnsupportedSurfaceError,
    move_edge,
)
from .harmonic import FormProvider, gap_n, total
from .planar_tree import LEFT, RIGHT, EdgeAddress, EdgeRegion, RationalPath, RegionId, path_edge


class DomainError(ValueError):
    pass


class DegenerateConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class DecoratedStructure:
    tri: CombinatorialTriangulation
    lam: tuple  # indexed by slot; equal on an edge and its reverse

    def __post_init__(self):
        for e in range(self.tri.size):
            if not self.lam[e] > 0:
                raise ValueError(f"lambda length of {self.tri.names[e]} must be positive")
            if self.lam[e] != self.lam[self.tri.bar[e]]:
                raise ValueError(f"lambda length of {self.tri.names[e]} differs from its reverse")

    @classmethod
    def from_values(cls, tri: CombinatorialTriangulation, values=1, exact: bool = False) -> "DecoratedStructure":
        """``values``: a scalar, one value per unoriented edge (in ``tri.edges()``
        order), or a mapping from edge name to value."""
        conv = Fraction if exact else float
        edges = tri.edges()
        if isinstance(values, Mapping):
            by_slot = {}
            for name, v in values.items():
                try:
                    slot = tri.names.index(name)
                except ValueError:
                    raise ValueError(f"unknown edge {name!r}") from None
                by_slot[tri.unoriented(slot)] = v
            missing = [tri.names[e] for e in edges if e not in by_slot]
            if missing:
                raise ValueError(f"no lambda length for {', '.join(missing)}")
        elif isinstance(values, (int, float, Fraction)):
            by_slot = {e: values for e in edges}
        else:
            values = list(values)
            if len(values) != len(edges):
                raise ValueError(f"expected {len(edges)} lambda lengths, got {len(values)}")
            by_slot = dict(zip(edges, values))
        for e, v in by_slot.items():
            if not v > 0:
                raise ValueError(f"lambda length of {tri.names[e]} must be positive, got {v}")
        lam = tuple(conv(by_slot[tri.unoriented(e)]) for e in range(tri.size))
        return cls(tri, lam)

    def scaled(self, t) -> "DecoratedStructure":
        return DecoratedStructure(self.tri, tuple(t * v for v in self.lam))

    def value(self, name: str):
        return self.lam[self.tri.names.index(name)]


def ptolemy_flip(d: DecoratedStructure, x: int) -> DecoratedStructure:
    """Flip slot x; the new diagonal gets (a*c + b*d) / lambda_x, where
    (a, b, c, d) are the quadrilateral sides in cyclic order."""
    t = d.tri
    xb = t.bar[x]
    x1 = t.succ[x]
    x2 = t.succ[x1]
    y1 = t.succ[xb]
    y2 = t.succ[y1]
    lam = list(d.lam)
    new = (lam[x1] * lam[y1] + lam[x2] * lam[y2]) / lam[x]
    new_tri = t.flip(x)
    lam[x] = lam[xb] = new
    return DecoratedStructure(new_tri, tuple(lam))


def ptolemy(a, b, c, d, e):
    """Bare Ptolemy relation for sides a, b, c, d (cyclic) and diagonal e."""
    return (a * c + b * d) / e


def corner_h_length(d: DecoratedStructure, opposite: int):
    """Horocyclic length of the corner facing ``opposite`` in its right triangle."""
    t = d.tri
    b = t.succ[opposite]
    c = t.succ[b]
    return d.lam[opposite] / (d.lam[b] * d.lam[c])


def horocycle_length(d: DecoratedStructure, cusp: int = 0):
    corners = [e for e in range(d.tri.size) if d.tri.corner_vertex(e) == cusp]
    return total((corner_h_length(d, e) for e in corners), isinstance(d.lam[0], Fraction))


def phi_edge(d: DecoratedStructure, e: int, cusp: Optional[int] = None):
    """Horocyclic mass of the two corners adjacent to the start of e."""
    t = d.tri
    if cusp is None:
        cusp = t.origin[e]
    elif t.origin[e] != cusp:
        raise ValueError(f"{t.names[e]} does not start at cusp {cusp}")
    eb = t.bar[e]
    right = corner_h_length(d, t.succ[e])
    left = corner_h_length(d, t.succ[t.succ[eb]])
    return (right + left) / horocycle_length(d, cusp)


def edge_trace(d: DecoratedStructure, e: int):
    """Trace of the closed geodesic carried by a once-punctured-torus edge."""
    if d.tri.size != 6 or len(d.tri.punctures()) != 1:
        raise UnsupportedSurfaceError("traces are implemented for the once-punctured torus")
    return d.lam[e] * horocycle_length(d) / 2


class LambdaForm(FormProvider):
    """The horocyclic form pulled back to the tree through the labelling."""

    def __init__(self, t0: CombinatorialTriangulation, lambda0=1, exact: bool = False, base: int = 0):
        tree = LabelTree(t0, base)
        super().__init__(tree.shape())
        self.tree = tree
        self.exact = exact
        self.base = base
        self.harmonic_tol = 0.0 if exact else 1e-9
        self.decoration = DecoratedStructure.from_values(t0, lambda0, exact)
        self._states: dict = {}

    def state(self, addr: EdgeAddress) -> tuple:
        """(decorated structure, marked slot) for a tree edge."""
        try:
            return self._states[addr]
        except KeyError:
            pass
        if addr.word:
            d, e = self.state(addr.parent)
            x = move_edge(MarkedTriangulation(d.tri, e), addr.word[-1])
            out = (ptolemy_flip(d, x), x)
        else:
            if not 0 <= addr.root < self.shape.root_degree:
                raise ValueError(f"root index {addr.root} out of range")
            sigma = self.tree.corners[addr.root]
            out = (ptolemy_flip(self.decoration, sigma), sigma)
        self._states[addr] = out
        return out

    def region_state(self, region: RegionId) -> tuple:
        if isinstance(region, EdgeRegion):
            return self.state(region.address)
        m = self.tree.region_label(region)
        return self.decoration, m.marked

    def _compute(self, e):
        d, m = self.state(e)
        return phi_edge(d, m, self.base)

    def trace(self, addr: EdgeAddress):
        d, m = self.state(addr)
        return edge_trace(d, m)

    def region_trace(self, region: RegionId):
        d, m = self.region_state(region)
        return edge_trace(d, m)


def lambda_form(t0: CombinatorialTriangulation, lambda0=1, exact: bool = False) -> LambdaForm:
    return LambdaForm(t0, lambda0, exact)


def modular_torus_form(exact: bool = False) -> LambdaForm:
    from .flips import torus

    return LambdaForm(torus(), 1, exact)


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class MarkoffTriple:
    """Traces (x, y, z) of a torus triangle; z belongs to the marked edge,
    x and y to the sides flipped by the right and left moves."""

    x: Real
    y: Real
    z: Real

    def residual(self):
        return self.x ** 2 + self.y ** 2 + self.z ** 2 - self.x * self.y * self.z

    def is_valid(self, tol: float = 1e-9) -> bool:
        r = self.residual()
        scale = max(1.0, float(self.x * self.y * self.z))
        return min(self.x, self.y, self.z) >= 3 - tol and abs(float(r)) <= tol * scale


def markoff_children(t: MarkoffTriple, side: str) -> MarkoffTriple:
    """Vieta exchange matching the right and left moves."""
    if side == RIGHT:
        return MarkoffTriple(t.z, t.y, t.y * t.z - t.x)
    if side == LEFT:
        return MarkoffTriple(t.x, t.z, t.x * t.z - t.y)
    raise ValueError(f"side must be L or R, got {side!r}")


def markoff_triple(d: DecoratedStructure, e: int) -> MarkoffTriple:
    """Triple read off the right triangle of e: (right-move side, left-move side, e)."""
    t = d.tri
    a = t.succ[e]
    b = t.succ[a]
    return MarkoffTriple(edge_trace(d, a), edge_trace(d, b), edge_trace(d, e))


@dataclass(frozen=True)
class PantsGapTerm:
    trace: float
    length: float
    term: float


def mcshane_term(x: Real) -> PantsGapTerm:
    """1 / (e^l + 1) for the simple geodesic of trace x (l = 2 arccosh(x/2))."""
    x = float(x)
    if not x > 2:
        raise DomainError(f"trace {x} is not hyperbolic")
    if x < 3:
        warnings.warn(f"trace {x} < 3 is not a simple trace on the cusped torus", stacklevel=2)
    length = 2 * math.acosh(x / 2)
    # stable form of (1 - sqrt(1 - 4/x^2)) / 2
    root = math.sqrt(1 - 4 / (x * x))
    term = 2 / (x * x * (1 + root))
    return PantsGapTerm(x, length, term)


def mcshane_term_exp(x: Real) -> float:
    return 1 / (math.exp(2 * math.acosh(float(x) / 2)) + 1)


# ---------------------------------------------------------------- holonomy route

Matrix = tuple  # ((a, b), (c, d)) with Fraction entries


def _mat(rows) -> Matrix:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    return tuple(tuple(sum(m[i][k] * n[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def mat_inv(m: Matrix) -> Matrix:
    (a, b), (c, d) = m
    det = a * d - b * c
    return ((d / det, -b / det), (-c / det, a / det))


def trace(m: Matrix):
    return m[0][0] + m[1][1]


_INF = None  # the point at infinity


def mobius(m: Matrix, z):
    (a, b), (c, d) = m
    if z is _INF:
        return _INF if c == 0 else a / c
    den = c * z + d
    if den == 0:
        return _INF
    return (a * z + b) / den


def parabolic_fixed_point(m: Matrix):
    (a, b), (c, d) = m
    if abs(trace(m)) != 2:
        raise DegenerateConfigurationError("peripheral element is not parabolic")
    if c == 0:
        return _INF
    return (a - d) / (2 * c)


@dataclass(frozen=True)
class ModularHolonomy:
    """Holonomy of the modular torus: two hyperbolic generators whose
    commutator is parabolic.

    The generator matched to T0's (1,0) edge is ``b`` and the one matched to
    (0,1) is ``a``; this matching makes the lifted fan orientation-consistent
    with the triangulation conventions.
    """

    a: Matrix = field(default_factory=lambda: _mat(((1, 1), (1, 2))))
    b: Matrix = field(default_factory=lambda: _mat(((1, -1), (-1, 2))))

    def __post_init__(self):
        ab = mat_mul(self.a, self.b)
        if (trace(self.a), trace(self.b), trace(ab)) != (3, 3, 3):
            raise DegenerateConfigurationError("generators are not a modular-torus pair")
        if trace(self.commutator()) != -2:
            raise DegenerateConfigurationError("commutator trace must be -2")

    def commutator(self) -> Matrix:
        return mat_mul(mat_mul(self.a, self.b), mat_mul(mat_inv(self.a), mat_inv(self.b)))

    def word(self, v: tuple) -> Matrix:
        table = {(1, 0): self.b, (0, 1): self.a, (1, 1): mat_mul(self.a, self.b)}
        if v in table:
            return table[v]
        neg = (-v[0], -v[1])
        if neg in table:
            return mat_inv(table[neg])
        raise ValueError(f"no generator attached to {v}")


class CuspFan:
    """Lifted edges from the cusp sent to infinity: one entry per outgoing slot,
    periodic under translation by ``period``.  Clockwise around the cusp is
    decreasing position."""

    def __init__(self, tri: CombinatorialTriangulation, positions: dict, period):
        self.tri = tri
        self.pos = dict(positions)
        self.period = period

    @classmethod
    def from_holonomy(cls, t0: CombinatorialTriangulation, hol: ModularHolonomy) -> "CuspFan":
        if t0.vectors is None:
            raise UnsupportedSurfaceError("the holonomy route needs the once-punctured torus")
        k = hol.commutator()
        p = parabolic_fixed_point(k)
        if p is _INF:
            raise DegenerateConfigurationError("cusp already at infinity")
        send = _mat(((0, -1), (1, -p)))  # z -> -1 / (z - p)
        back = mat_inv(send)
        conj = mat_mul(mat_mul(send, k), back)
        (a, b), (c, d) = conj
        if c != 0:
            raise DegenerateConfigurationError("conjugated commutator does not fix infinity")
        period = abs(b / d)
        positions = {}
        for e in range(t0.size):
            z = mobius(mat_mul(send, hol.word(t0.vectors[e])), p)
            if z is _INF:
                raise DegenerateConfigurationError("coincident fixed points")
            positions[e] = z
        fan = cls(t0, positions, period)
        fan.check()
        return fan

    def _reduced(self):
        lo = min(self.pos.values())
        return sorted(((p - lo) % self.period + lo, s) for s, p in self.pos.items())

    def neighbours(self, slot: int) -> tuple:
        """(clockwise, counter-clockwise) neighbour positions of an entry."""
        p = self.pos[slot]
        lower, upper = [], []
        for s, q in self.pos.items():
            shift = (p - q) // self.period
            q0 = q + shift * self.period  # q0 <= p < q0 + period
            if s != slot:
                lower.append((q0, s))
                upper.append((q0 + self.period, s))
            else:
                lower.append((p - self.period, s))
                upper.append((p + self.period, s))
        return max(lower), min(upper)

    def check(self):
        for s in self.pos:
            (cw, cw_slot), _ = self.neighbours(s)
            t = self.tri
            if cw_slot != t.bar[t.succ[t.succ[s]]]:
                raise DegenerateConfigurationError(f"fan order disagrees with the triangulation at {t.names[s]}")

    def phi(self, slot: int) -> Fraction:
        (cw, _), (ccw, _) = self.neighbours(slot)
        return (ccw - cw) / self.period

    def flip(self, x: int) -> "CuspFan":
        t = self.tri
        xb = t.bar[x]
        inserted = {}
        for a in self.pos:
            side = t.succ[a]
            if side not in (x, xb):
                continue
            u = self.pos[a]
            (v, _), _ = self.neighbours(a)
            # Move the cusp at u to infinity with a deck transformation g:
            # g(u) = inf, g(v) = P1, g(inf) = P0.  The triangle across the far
            # side then maps to the fan triangle on the other side of P1.
            p1 = self.pos[side]
            (p0, s0), (p2, _) = self.neighbours(side)
            if s0 != t.bar[a]:
                raise DegenerateConfigurationError("fan is not invariant under the deck group")
            inserted[side] = u + (p1 - p0) * (v - u) / (p2 - p0)
        if set(inserted) != {x, xb}:
            raise DegenerateConfigurationError("flip did not produce both ends of the new edge")
        pos = {s: p for s, p in self.pos.items() if s not in (x, xb)}
        pos.update(inserted)
        return CuspFan(t.flip(x), pos, self.period)


def _fan_for_address(tree: LabelTree, fan: CuspFan, addr: EdgeAddress) -> tuple:
    fan = fan.flip(tree.corners[addr.root])
    marked = tree.corners[addr.root]
    for letter in addr.word:
        x = move_edge(MarkedTriangulation(fan.tri, marked), letter)
        fan = fan.flip(x)
        marked = x
    return fan, marked


def cross_ratio_phi(hol: ModularHolonomy, state: MarkedTriangulation, t0: Optional[CombinatorialTriangulation] = None):
    """Form value of a labelled torus state, from holonomy alone.

    With the cusp at infinity the cross ratio of the lozenge's peripheral fixed
    points degenerates to horocyclic positions: the mass of the marked edge is
    the span between its two fan neighbours divided by the cusp period.
    ``state`` must carry its tree address.
    """
    from .flips import torus

    if state.address is None:
        raise ValueError("state must carry the tree address that produced it")
    t0 = t0 or torus()
    tree = LabelTree(t0)
    fan, marked = _fan_for_address(tree, CuspFan.from_holonomy(t0, hol), state.address)
    if fan.tri.succ != state.tri.succ or marked != state.marked:
        raise DegenerateConfigurationError("replayed state does not match")
    return fan.phi(marked)


# ---------------------------------------------------------------- spiral


@dataclass
class SpiralSide:
    side: str
    traces: list
    phis: list
    sibling_phis: list
    gaps: list
    traces_increasing: bool
    phi_decreasing: bool


@dataclass
class SpiralReport:
    region: RegionId
    region_trace: float
    term: float
    sides: list
    gap_final: float
    gap_error: float
    passed: bool


def spiral_observation(t0: CombinatorialTriangulation, lambda0, region: RegionId, n_max: int = 40, tol: float = 1e-7) -> SpiralReport:
    """Traces, masses and gaps along both boundary paths of a region.

    Rational decorations are evaluated exactly so that strict monotonicity is
    meaningful at depth 40.
    """
    if t0.vectors is None:
        raise UnsupportedSurfaceError("spiral observation is implemented for the once-punctured torus")
    values = lambda0 if not isinstance(lambda0, (int, float, Fraction)) else [lambda0] * 3
    values = list(values.values()) if isinstance(values, Mapping) else list(values)
    exact = all(isinstance(v, (int, Fraction)) for v in values)
    form = LambdaForm(t0, lambda0, exact=exact)
    x = form.region_trace(region)
    term = mcshane_term(x).term
    sides = []
    start = region.depth + 1
    for side in (RIGHT, LEFT):
        path = RationalPath(region, side)
        edges = [path_edge(form.shape, path, n) for n in range(start, start + n_max + 1)]
        traces = [form.trace(e) for e in edges]
        phis = [form.phi(e) for e in edges]
        sibs = [form.phi(e.sibling()) for e in edges[1:]]
        gaps = [gap_n(form, region, n) for n in range(1, n_max + 1)]
        sides.append(
            SpiralSide(
                side,
                [float(v) for v in traces],
                [float(v) for v in phis],
                [float(v) for v in sibs],
                [float(v) for v in gaps],
                all(b > a for a, b in zip(traces, traces[1:])),
                all(b < a for a, b in zip(phis, phis[1:])),
            )
        )
    final = sides[0].gaps[-1]
    err = abs(2 * final / float(form.boundary_mass) - term)
    ok = all(s.traces_increasing and s.phi_decreasing for s in sides) and err < tol
    return SpiralReport(region, float(x), term, sides, final, err, ok)

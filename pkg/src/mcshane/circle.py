"""Embedding tree paths into the circle R / (boundary mass) Z.

The depth-n sphere partitions the circle into arcs of length phi(e), laid
out in the tree's linear order starting at the cut.  y_n(e) is the midpoint
of e's arc.  Each region leaves an open gap interval between the limits of
its two boundary paths; the complement of all gap intervals has measure
twice the error term.
"""
from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from itertools import accumulate
from typing import Optional

from .harmonic import FormProvider, phi_limit, total
from .planar_tree import (
    LEFT,
    RIGHT,
    EdgeAddress,
    RationalPath,
    RegionId,
    RootRegion,
    enumerate_regions,
    path_edge,
    sphere,
)


class ConsistencyError(RuntimeError):
    """Gap intervals overlap: the form is not harmonic or the order is wrong."""


@dataclass(frozen=True)
class CirclePoint:
    value: float
    circumference: float

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.circumference)

    def __float__(self):
        return float(self.value)

    def distance(self, other: "CirclePoint") -> float:
        d = abs(self.value - other.value) % self.circumference
        return min(d, self.circumference - d)


def arc_start(form: FormProvider, e: EdgeAddress):
    """Total mass of the depth-|e| edges that precede e."""
    shape = form.shape
    shape.check(e)
    parts = [form.phi(EdgeAddress(j)) for j in range(e.root)]
    for i, c in enumerate(e.word):
        if c != RIGHT:
            continue
        node = EdgeAddress(e.root, e.word[:i])
        if shape.blocked_side(node) == LEFT:
            continue
        parts.append(form.phi(node.child(LEFT)))
    return total(parts, form.exact)


def y_n(form: FormProvider, e: EdgeAddress) -> CirclePoint:
    return CirclePoint(arc_start(form, e) + form.phi(e) / 2, form.boundary_mass)


def x_n(form: FormProvider, path: RationalPath, n: int) -> CirclePoint:
    return y_n(form, path_edge(form.shape, path, n))


def split_point(form: FormProvider, region: RegionId):
    """Circle coordinate separating the two subtrees that bound the region.

    Unrolled: the cut region returns the full boundary mass instead of 0.
    """
    if isinstance(region, RootRegion):
        return total((form.phi(EdgeAddress(j)) for j in range(region.index + 1)), form.exact)
    right = region.address.child(RIGHT)
    return arc_start(form, right)


@dataclass
class PathLimit:
    point: CirclePoint
    converged: bool
    depth: int
    unrolled: float
    tail_mass: float


def x_limit(form: FormProvider, path: RationalPath, max_n: int = 200, tol: float = 1e-12) -> PathLimit:
    """Limit of x_n along a rational path.

    Past the region's depth every path edge has one end pinned at the split
    point, so x_n = split -/+ phi/2 and the limit is split -/+ phi_infinity/2.
    """
    lim = phi_limit(form, path, max_n, tol)
    b = split_point(form, path.region)
    x = b - lim.value / 2 if path.side == LEFT else b + lim.value / 2
    return PathLimit(CirclePoint(x, form.boundary_mass), lim.converged, lim.depth, x, lim.value)


def x_limits(form: FormProvider, path: RationalPath, max_n: int = 200, tol: float = 1e-12):
    lim = x_limit(form, path, max_n, tol)
    return lim.point, lim.converged


def x_sequence(form: FormProvider, path: RationalPath, n_max: int) -> list:
    """Raw x_1, ..., x_{n_max} (no reduction to a limit)."""
    return [x_n(form, path, n) for n in range(1, n_max + 1)]


@dataclass
class GapInterval:
    region: RegionId
    left: CirclePoint
    right: CirclePoint
    depth_used: int
    lo: float
    hi: float
    converged: bool = True

    @property
    def length(self):
        return self.hi - self.lo


def gap_interval(form: FormProvider, region: RegionId, max_n: int = 200, tol: float = 1e-12) -> GapInterval:
    left_path, right_path = RationalPath(region, LEFT), RationalPath(region, RIGHT)
    xl, xr = x_limit(form, left_path, max_n, tol), x_limit(form, right_path, max_n, tol)
    # widen each path limit by half its limiting mass
    lo = xl.unrolled - xl.tail_mass / 2
    hi = xr.unrolled + xr.tail_mass / 2
    c = form.boundary_mass
    return GapInterval(
        region, CirclePoint(lo, c), CirclePoint(hi, c), max(xl.depth, xr.depth), lo, hi, xl.converged and xr.converged
    )


def check_disjoint(intervals: list, circumference, slack: float = 1e-12) -> Optional[tuple]:
    """First overlapping pair on the circle, or None."""
    if len(intervals) < 2:
        return None
    # midpoints: a near-empty interval at another's endpoint may have its lo
    # rounded past that endpoint, which would flip a sort by lo
    ordered = sorted(intervals, key=lambda g: (g.lo + g.hi) / 2)
    for a, b in zip(ordered, ordered[1:]):
        if a.hi > b.lo + slack:
            return a, b
    first, last = ordered[0], ordered[-1]
    if last.hi - circumference > first.lo + slack:
        return last, first
    return None


def gap_intervals(form: FormProvider, depth: int, max_n: int = 200, tol: float = 1e-12, check: bool = True) -> list:
    out = [gap_interval(form, f, max_n, tol) for f in enumerate_regions(form.shape, depth)]
    if check:
        clash = check_disjoint(out, form.boundary_mass, slack=max(2 * tol, 1e-12))
        if clash is not None:
            a, b = clash
            raise ConsistencyError(f"gap intervals of {a.region} and {b.region} overlap")
    return out


def uncovered_measure(form: FormProvider, depth: int, max_n: int = 200, tol: float = 1e-12):
    intervals = gap_intervals(form, depth, max_n, tol)
    return form.boundary_mass - total((g.length for g in intervals), form.exact)


def sphere_positions(form: FormProvider, n: int) -> dict:
    """Brute-force y_n over a whole sphere by running sums."""
    level = sphere(form.shape, n)
    masses = [form.phi(e) for e in level]
    starts = [0] + list(accumulate(masses))[:-1]
    return {e: s + m / 2 for e, s, m in zip(level, starts, masses)}


@dataclass
class OrderingReport:
    n: int
    passed: bool
    checked: int
    counterexample: Optional[str] = None


def verify_yn_ordering(form: FormProvider, n: int, slack: Optional[float] = None) -> OrderingReport:
    """Nesting inequalities between the depth-n and depth-(n+1) partitions."""
    if slack is None:
        slack = 1e-12 + (0 if form.exact else form.harmonic_tol * n)
    shape = form.shape
    y0 = sphere_positions(form, n)
    y1 = sphere_positions(form, n + 1)
    level = list(y0)
    checked = 0

    def fail(msg):
        return OrderingReport(n, False, checked, msg)

    for i, e in enumerate(level):
        blocked = shape.blocked_side(e)
        le = e.child(LEFT) if blocked != LEFT else None
        re = e.child(RIGHT) if blocked != RIGHT else None
        if le is not None and y1[le] > y0[e] + slack:
            return fail(f"Y(L{e}) > Y({e})")
        if re is not None and y0[e] > y1[re] + slack:
            return fail(f"Y({e}) > Y(R{e})")
        if i > 0 and le is not None:
            f = level[i - 1]
            rf = f.child(RIGHT) if shape.blocked_side(f) != RIGHT else f.child(LEFT)
            if y1[rf] > y1[le] + slack:
                return fail(f"Y(R{f}) > Y(L{e})")
        if le is not None and re is not None:
            for g, h in ((le, re), (re, le)):
                if abs(y1[g] - y0[e]) > form.phi(h) / 2 + slack:
                    return fail(f"|Y({g}) - Y({e})| > phi({h})/2")
        checked += 1
    return OrderingReport(n, True, checked)


def intervals_csv(intervals: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["region_id", "depth", "left", "right", "length"])
    for g in intervals:
        w.writerow([str(g.region), g.region.depth, f"{float(g.left):.12g}", f"{float(g.right):.12g}", f"{float(g.length):.12g}"])
    return buf.getvalue()

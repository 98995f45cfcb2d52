"""Positive harmonic edge functions on planar trees, and their gaps.

A form assigns a mass phi(e) > 0 to every edge with phi(e) = phi(eL) + phi(eR).
Mass is then conserved on every sphere (the Green sum), and each region
collects a gap: half the limiting mass of its two boundary paths.
"""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .planar_tree import (
    LEFT,
    RIGHT,
    AddressError,
    EdgeAddress,
    RationalPath,
    RegionId,
    TreeShape,
    enumerate_regions,
    iter_spheres,
    path_edge,
    sphere,
)


class FormInvalidError(ValueError):
    """Positivity, harmonicity or path monotonicity is violated."""


class ConvergenceWarning(UserWarning):
    pass


def total(values, exact: bool = False):
    """Sum with correct rounding for floats, exact for rationals."""
    values = list(values)
    if exact:
        return sum(values, Fraction(0))
    return math.fsum(values)


class FormProvider:
    """Base class.  Subclasses implement ``_compute(e)``; results are memoized.

    ``harmonic_tol`` is the declared harmonicity tolerance of the provider.
    Subclasses with an analytic limit along rational paths may override
    ``tail_limit``.
    """

    exact: bool = False
    harmonic_tol: float = 1e-9

    def __init__(self, shape: TreeShape):
        self.shape = shape
        self._memo: dict = {}
        self._mass = None

    def _compute(self, e: EdgeAddress):
        raise NotImplementedError

    def phi(self, e: EdgeAddress):
        try:
            return self._memo[e]
        except KeyError:
            pass
        value = self._compute(e)
        # single-key dict writes are atomic; concurrent writers store equal values
        self._memo[e] = value
        return value

    @property
    def boundary_mass(self):
        if self._mass is None:
            self._mass = total((self.phi(e) for e in self.shape.roots()), self.exact)
        return self._mass

    def tail_limit(self, path: RationalPath):
        """Exact limit of phi along ``path`` when known in closed form, else None."""
        return None

    def clear_cache(self):
        self._memo.clear()


def _positive_split(value: float) -> float:
    if not 0.0 < value < 1.0:
        raise FormInvalidError(f"split must lie in (0,1), got {value}")
    return value


class RatioForm(FormProvider):
    """phi(root k) = root_weights[k]; phi(eL) = split(e)*phi(e), phi(eR) = rest.

    At a blocked edge the only child inherits the whole mass.
    """

    def __init__(
        self,
        root_weights: Sequence[Real],
        split: Union[Real, Callable[[EdgeAddress], Real]] = 0.5,
        shape: Optional[TreeShape] = None,
        exact: bool = False,
    ):
        if shape is None:
            shape = TreeShape(len(root_weights))
        if shape.root_degree != len(root_weights):
            raise ValueError("one root weight per root edge is required")
        super().__init__(shape)
        if any(w <= 0 for w in root_weights):
            raise FormInvalidError("root weights must be positive")
        self.exact = exact
        conv = Fraction if exact else float
        self.root_weights = tuple(conv(w) for w in root_weights)
        self._constant_split = None
        if callable(split):
            self._split = split
        else:
            s = conv(_positive_split(split))
            self._constant_split = s
            self._split = lambda e: s

    @classmethod
    def uniform(cls, n_roots: int = 6, split=0.5, exact: bool = False, **kw):
        w = Fraction(1, n_roots) if exact else 1.0 / n_roots
        return cls([w] * n_roots, split=split, exact=exact, **kw)

    def _compute(self, e):
        parent = e.parent
        if parent is None:
            if not 0 <= e.root < self.shape.root_degree:
                raise AddressError(f"{e} is not an edge of this tree")
            return self.root_weights[e.root]
        mass = self.phi(parent)
        blocked = self.shape.blocked_side(parent)
        side = e.word[-1]
        if blocked == side:
            raise AddressError(f"{e} lies in a blocked branch")
        if blocked is not None:
            return mass
        s = _positive_split(self._split(parent)) if self._constant_split is None else self._constant_split
        return mass * s if side == LEFT else mass * (1 - s)

    def tail_limit(self, path):
        # constant split in (0,1): every step scales by at most max(s, 1-s) < 1
        if self._constant_split is not None and not self.shape.is_blocked_tree:
            return Fraction(0) if self.exact else 0.0
        return None


_TABLE_SPLIT = re.compile(r"[\s,]+")


class TableForm(FormProvider):
    """Finite table of edge masses; lookups outside the table are address errors."""

    def __init__(self, values: dict, shape: Optional[TreeShape] = None, harmonic_tol: float = 1e-9):
        if not values:
            raise FormInvalidError("empty table")
        if shape is None:
            shape = TreeShape(1 + max(e.root for e in values))
        super().__init__(shape)
        self.values = dict(values)
        self.harmonic_tol = harmonic_tol
        self.max_depth = max(e.depth for e in self.values)

    def _compute(self, e):
        try:
            return self.values[e]
        except KeyError:
            raise AddressError(f"{e} is not in the table") from None

    @classmethod
    def parse(cls, text: str, **kw) -> "TableForm":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in _TABLE_SPLIT.split(line) if p]
            if len(parts) != 2:
                raise FormInvalidError(f"line {lineno}: expected 'address,value'")
            if parts[0].lower() == "address":
                continue
            values[EdgeAddress.parse(parts[0])] = float(parts[1])
        return cls(values, **kw)

    @classmethod
    def load(cls, path, **kw) -> "TableForm":
        return cls.parse(Path(path).read_text(), **kw)

    def dump(self) -> str:
        rows = ["address,value"]
        rows += [f"{e},{v!r}" for e, v in sorted(self.values.items())]
        return "\n".join(rows) + "\n"


def validate_form(form: FormProvider, depth: int) -> list:
    """Positivity and harmonicity problems up to ``depth``, as readable strings.

    Blocked edges are skipped for harmonicity: different providers treat the
    single child differently.
    """
    problems = []
    table = getattr(form, "max_depth", None)
    depth = min(depth, table) if table is not None else depth
    for level in iter_spheres(form.shape, depth):
        for e in level:
            try:
                value = form.phi(e)
            except AddressError as exc:
                problems.append(f"missing {e}: {exc}")
                continue
            if not value > 0:
                problems.append(f"non-positive phi({e}) = {value}")
            if e.depth >= depth or form.shape.blocked_side(e) is not None:
                continue
            try:
                left, right = form.phi(e.child(LEFT)), form.phi(e.child(RIGHT))
            except AddressError:
                continue
            residual = abs(value - left - right)
            if residual > form.harmonic_tol:
                problems.append(f"harmonicity at {e}: residual {float(residual):.3g}")
    return problems


def green_sum(form: FormProvider, n: int):
    values = []
    for e in sphere(form.shape, n):
        v = form.phi(e)
        if not v > 0:
            raise FormInvalidError(f"non-positive phi({e}) = {v}")
        values.append(v)
    return total(values, form.exact)


@dataclass
class Limit:
    value: Real
    converged: bool
    depth: int
    values: list = field(default_factory=list)


def phi_limit(form: FormProvider, path: RationalPath, max_depth: int = 200, tol: float = 1e-12) -> Limit:
    """Cauchy estimate of the limiting mass along a rational path.

    ``max_depth`` counts steps past the region's own edge.
    """
    if max_depth < 2:
        raise ValueError("max_depth must be >= 2")
    exact_tail = form.tail_limit(path)
    if exact_tail is not None:
        return Limit(exact_tail, True, path.start_depth, [])
    start = path.start_depth
    values = [form.phi(path_edge(form.shape, path, start))]
    slack = form.harmonic_tol
    for n in range(start + 1, start + max_depth):
        try:
            v = form.phi(path_edge(form.shape, path, n))
        except AddressError:
            # finite table: the path leaves the known part of the tree
            return Limit(values[-1], False, n - 1, values)
        prev = values[-1]
        if v > prev + slack:
            raise FormInvalidError(f"phi increases along {path} at depth {n}")
        values.append(v)
        if abs(prev - v) < tol:
            return Limit(v, True, n, values)
    return Limit(values[-1], False, start + max_depth - 1, values)


def phi_infinity(form: FormProvider, path: RationalPath, max_depth: int = 200, tol: float = 1e-12):
    lim = phi_limit(form, path, max_depth, tol)
    if not lim.converged:
        warnings.warn(f"phi along {path} not converged by depth {lim.depth}", ConvergenceWarning, stacklevel=2)
    return lim.value


def boundary_paths(region: RegionId) -> tuple:
    return RationalPath(region, LEFT), RationalPath(region, RIGHT)


def gap_n(form: FormProvider, region: RegionId, n: int):
    """Half the mass of the two depth-n continuations of the region's paths."""
    if n < 1:
        raise ValueError("n must be >= 1")
    depth = region.depth + 1 + n
    left, right = boundary_paths(region)
    a = form.phi(path_edge(form.shape, right, depth))
    b = form.phi(path_edge(form.shape, left, depth))
    return (a + b) / 2


@dataclass
class GapReport:
    region: RegionId
    gap_n_values: list
    gap_estimate: Real
    converged: bool
    tolerance: float
    boundary_mass: Real = 1.0
    method: str = "cauchy"

    @property
    def interval_measure(self):
        """Length of the region's gap interval on the circle: twice the gap."""
        return 2 * self.gap_estimate

    @property
    def interval_fraction(self) -> float:
        """Interval length as a fraction of the whole circle."""
        return float(2 * self.gap_estimate / self.boundary_mass)


def gap(form: FormProvider, region: RegionId, max_n: int = 200, tol: float = 1e-12) -> GapReport:
    if max_n < 2:
        raise ValueError("max_n must be >= 2")
    left, right = boundary_paths(region)
    tails = form.tail_limit(left), form.tail_limit(right)
    if None not in tails:
        return GapReport(region, [], (tails[0] + tails[1]) / 2, True, tol, form.boundary_mass, "closed-form")
    values = [gap_n(form, region, 1)]
    for n in range(2, max_n + 1):
        values.append(gap_n(form, region, n))
        if abs(values[-1] - values[-2]) < tol:
            return GapReport(region, values, values[-1], True, tol, form.boundary_mass)
    return GapReport(region, values, values[-1], False, tol, form.boundary_mass)


def gap_partition_sum(form: FormProvider, n: int):
    """Sum over regions of depth p < n of gap_n(region, n - p).

    Each edge of depth n + 1 is counted exactly once, so this is half the
    boundary mass for every harmonic form.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    regions = enumerate_regions(form.shape, n - 1)
    return total((gap_n(form, f, n - f.depth) for f in regions), form.exact)


def gap_table(form: FormProvider, depth: int, max_n: int = 200, tol: float = 1e-12) -> list:
    reports = [gap(form, f, max_n, tol) for f in enumerate_regions(form.shape, depth)]
    stuck = [r.region for r in reports if not r.converged]
    if stuck:
        warnings.warn(f"{len(stuck)} gaps not converged, first {stuck[0]}", ConvergenceWarning, stacklevel=2)
    return reports


def partial_gap_sum(form: FormProvider, depth: int, tol: float = 1e-12, max_n: int = 200):
    """Sum of gaps over all regions of depth <= depth (at most half the mass)."""
    return total((r.gap_estimate for r in gap_table(form, depth, max_n, tol)), form.exact)


def error_estimate(form: FormProvider, depth: int, tol: float = 1e-12, max_n: int = 200):
    return form.boundary_mass / 2 - partial_gap_sum(form, depth, tol, max_n)

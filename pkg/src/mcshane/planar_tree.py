"""Rooted planar trees with N root edges and binary (or blocked) branching.

Edges are value objects: a root index plus a word over {L, R}.  Nothing is
stored per node, so the tree is infinite and lazily explored.

The cyclic order around the root is cut at the region between the last and
the first root edge (``CUT_REGION``); comparing (root index, word) with
L < R then gives the linear order used everywhere else.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from typing import Callable, Iterator, Optional, Union

LEFT = "L"
RIGHT = "R"
_BRANCH_RANK = {LEFT: 0, RIGHT: 1}


class AddressError(ValueError):
    """Address does not exist in the given tree shape."""


class PathUndefinedError(AddressError):
    """A boundary path runs into a blocked branch."""


@total_ordering
@dataclass(frozen=True)
class EdgeAddress:
    root: int
    word: str = ""

    def __post_init__(self):
        if self.root < 0:
            raise AddressError(f"negative root index {self.root}")
        if any(c not in _BRANCH_RANK for c in self.word):
            raise AddressError(f"word {self.word!r} is not over {{L,R}}")

    @property
    def depth(self) -> int:
        return 1 + len(self.word)

    @property
    def parent(self) -> Optional["EdgeAddress"]:
        if not self.word:
            return None
        return EdgeAddress(self.root, self.word[:-1])

    def child(self, side: str) -> "EdgeAddress":
        return EdgeAddress(self.root, self.word + side)

    def prefix(self, depth: int) -> "EdgeAddress":
        if not 1 <= depth <= self.depth:
            raise AddressError(f"no prefix of depth {depth} in {self}")
        return EdgeAddress(self.root, self.word[: depth - 1])

    def sibling(self) -> Optional["EdgeAddress"]:
        if not self.word:
            return None
        flip = RIGHT if self.word[-1] == LEFT else LEFT
        return EdgeAddress(self.root, self.word[:-1] + flip)

    def key(self) -> tuple:
        return (self.root, tuple(_BRANCH_RANK[c] for c in self.word))

    def __lt__(self, other):
        if not isinstance(other, EdgeAddress):
            return NotImplemented
        return self.key() < other.key()

    def __str__(self):
        return f"{self.root}:{self.word}"

    @classmethod
    def parse(cls, text: str) -> "EdgeAddress":
        """Parse ``"k:word"``, e.g. ``"2:RLL"`` or ``"0:"``."""
        root, sep, word = text.strip().partition(":")
        if not sep:
            raise AddressError(f"expected 'k:word', got {text!r}")
        try:
            k = int(root)
        except ValueError as exc:
            raise AddressError(f"bad root index in {text!r}") from exc
        return cls(k, word.strip().upper())


def lex_compare(a: EdgeAddress, b: EdgeAddress) -> int:
    """-1, 0 or 1.  Prefixes come before their extensions."""
    ka, kb = a.key(), b.key()
    return (ka > kb) - (ka < kb)


@dataclass(frozen=True)
class RootRegion:
    """Region between root edges i and i+1 (mod N)."""
    index: int

    @property
    def depth(self) -> int:
        return 0

    def __str__(self):
        return f"root:{self.index}"


@dataclass(frozen=True)
class EdgeRegion:
    """Region between the two children of an edge."""
    address: EdgeAddress

    @property
    def depth(self) -> int:
        return self.address.depth

    def __str__(self):
        return f"edge:{self.address}"


RegionId = Union[RootRegion, EdgeRegion]

# Root region whose interior contains the cut of the cyclic order.
# With N root edges this is RootRegion(N - 1).
CUT_REGION_OFFSET = -1


def parse_region(text: str) -> RegionId:
    """``"root:3"`` or ``"edge:0:RL"`` (the ``edge:`` prefix is optional)."""
    text = text.strip()
    if text.startswith("root:"):
        return RootRegion(int(text[5:]))
    if text.startswith("edge:"):
        text = text[5:]
    return EdgeRegion(EdgeAddress.parse(text))


BlockPredicate = Callable[[EdgeAddress], Optional[str]]


@dataclass(frozen=True)
class TreeShape:
    """N root edges; ``block_predicate(e)`` returns None, "L" or "R" for the
    missing child of e (a blocked, valence-2 vertex)."""

    root_degree: int
    block_predicate: Optional[BlockPredicate] = None

    def __post_init__(self):
        if self.root_degree < 1:
            raise ValueError("root_degree must be >= 1")

    def blocked_side(self, e: EdgeAddress) -> Optional[str]:
        if self.block_predicate is None:
            return None
        side = self.block_predicate(e)
        if side not in (None, LEFT, RIGHT):
            raise AddressError(f"block predicate returned {side!r} at {e}")
        return side

    def is_valid(self, e: EdgeAddress) -> bool:
        if not 0 <= e.root < self.root_degree:
            return False
        if self.block_predicate is None:
            return True
        node = EdgeAddress(e.root)
        for c in e.word:
            if self.blocked_side(node) == c:
                return False
            node = node.child(c)
        return True

    def check(self, e: EdgeAddress) -> EdgeAddress:
        if not self.is_valid(e):
            raise AddressError(f"{e} is not an edge of this tree")
        return e

    @property
    def is_blocked_tree(self) -> bool:
        return self.block_predicate is not None

    def roots(self) -> list:
        return [EdgeAddress(k) for k in range(self.root_degree)]


def children(shape: TreeShape, e: EdgeAddress) -> list:
    """Children of e in canonical order (L before R), blocked branch removed."""
    shape.check(e)
    side = shape.blocked_side(e)
    return [e.child(c) for c in (LEFT, RIGHT) if c != side]


def _children_unchecked(shape: TreeShape, e: EdgeAddress) -> list:
    side = shape.blocked_side(e)
    return [e.child(c) for c in (LEFT, RIGHT) if c != side]


def sphere(shape: TreeShape, n: int) -> list:
    """All edges of depth n, in cyclic order starting after the cut."""
    if n < 1:
        raise ValueError("sphere radius must be >= 1")
    level = shape.roots()
    for _ in range(n - 1):
        level = [c for e in level for c in _children_unchecked(shape, e)]
    return level


def iter_spheres(shape: TreeShape, max_n: int) -> Iterator[list]:
    level = shape.roots()
    for n in range(1, max_n + 1):
        yield level
        if n < max_n:
            level = [c for e in level for c in _children_unchecked(shape, e)]


def region_sides(shape: TreeShape, region: RegionId) -> tuple:
    """The (left, right) bounding edges of a region: (Lf, Rf)."""
    if isinstance(region, RootRegion):
        n = shape.root_degree
        if not 0 <= region.index < n:
            raise AddressError(f"root region {region.index} out of range")
        return EdgeAddress(region.index), EdgeAddress((region.index + 1) % n)
    e = shape.check(region.address)
    if shape.blocked_side(e) is not None:
        raise PathUndefinedError(f"edge {e} is blocked and bounds no region")
    return e.child(LEFT), e.child(RIGHT)


@dataclass(frozen=True)
class RationalPath:
    """One of the two boundary paths of a region.

    side "R" goes through the right edge of the region then always turns L;
    side "L" goes through the left edge then always turns R.
    """

    region: RegionId
    side: str

    def __post_init__(self):
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"side must be L or R, got {self.side!r}")

    @property
    def start_depth(self) -> int:
        """Depth of the first edge after the region's own edge."""
        return self.region.depth + 1

    def __str__(self):
        return f"{self.region}/{self.side}"


def path_edge(shape: TreeShape, path: RationalPath, n: int) -> EdgeAddress:
    """The n-th edge (depth n) of a rational path."""
    if n < 1:
        raise ValueError("n must be >= 1")
    region = path.region
    d = region.depth
    if isinstance(region, EdgeRegion) and n <= d:
        return region.address.prefix(n)
    left, right = region_sides(shape, region)
    turn = LEFT if path.side == RIGHT else RIGHT
    first = right if path.side == RIGHT else left
    e = EdgeAddress(first.root, first.word + turn * (n - d - 1))
    if shape.is_blocked_tree and not shape.is_valid(e):
        raise PathUndefinedError(f"{path} hits a blocked branch before depth {n}")
    return e


def enumerate_regions(shape: TreeShape, max_depth: int) -> list:
    """Root regions, then edge regions by depth, each level in cyclic order.

    In a blocked tree a blocked edge has a single child and bounds no region.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    out = [RootRegion(i) for i in range(shape.root_degree)]
    if max_depth == 0:
        return out
    for level in iter_spheres(shape, max_depth):
        out.extend(EdgeRegion(e) for e in level if shape.blocked_side(e) is None)
    return out

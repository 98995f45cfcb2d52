import math

import pytest
from hypothesis import given, settings, strategies as st

from mcshane.flips import (
    BlockedMoveError,
    CombinatorialTriangulation,
    FlipUndefinedError,
    LabelTree,
    MarkedTriangulation,
    Slope,
    T0Edge,
    UnsupportedSurfaceError,
    arc_slope,
    build_surface,
    decode,
    encode,
    enumeration_csv,
    farey_neighbours,
    flip,
    intersection_length,
    is_left_blocked,
    is_right_blocked,
    order_check,
    right_move,
    right_blocked_example,
    slope_triple,
    thrice_punctured_sphere,
    torus,
    tree_vs_intersection_bound,
    twice_punctured_torus,
)
from mcshane.planar_tree import EdgeAddress, RootRegion, iter_spheres

from oracles import farey_layers

T0 = torus()
TREE = LabelTree(T0)


def slot_of(t, v):
    return t.vectors.index(v)


@pytest.mark.parametrize(
    "genus,punct,edges,triangles",
    [(1, 1, 3, 2), (0, 3, 3, 2), (1, 2, 6, 4)],
)
def test_surface_counts(genus, punct, edges, triangles):
    t = build_surface(genus, punct)
    assert t.problems() == []
    assert len(t.edges()) == edges and len(t.triangles()) == triangles
    assert len(t.punctures()) == punct
    # V - E + F of the closed surface
    assert t.euler_characteristic() == 2 - 2 * genus


def test_unsupported_surface():
    with pytest.raises(UnsupportedSurfaceError):
        build_surface(2, 1)


def test_serialize_roundtrip():
    for t in (torus(), thrice_punctured_sphere(), twice_punctured_torus()):
        back = CombinatorialTriangulation.parse(t.serialize())
        assert (back.succ, back.bar, back.origin, back.names) == (t.succ, t.bar, t.origin, t.names)


def test_flip_examples():
    new = T0.flip(slot_of(T0, (1, 1)))
    assert Slope.from_vector(new.vectors[slot_of(T0, (1, 1))]).unoriented() == (-1, 1)
    new = T0.flip(slot_of(T0, (1, 0)))
    assert Slope.from_vector(new.vectors[slot_of(T0, (1, 0))]).unoriented() == (1, 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 5), max_size=12), st.integers(0, 5))
def test_flip_twice_is_identity_on_diagonals(moves, x):
    t = T0
    for m in moves:
        t = t.flip(m)
        assert t.problems() == []
        assert farey_neighbours(t)
    back = t.flip(x).flip(x)
    assert slope_triple(back) == slope_triple(t)
    assert Slope.from_vector(back.vectors[x]).unoriented() == Slope.from_vector(t.vectors[x]).unoriented()


def test_self_folded_flip_is_undefined():
    t = twice_punctured_torus()
    m = right_blocked_example(t)
    folded = [x for x in range(m.tri.size) if not m.tri.is_flippable(x)]
    assert folded
    with pytest.raises(FlipUndefinedError):
        m.tri.flip(folded[0])


def test_root_labels_are_flips_of_t0():
    for k in range(6):
        m = TREE.label(EdgeAddress(k))
        f = flip(MarkedTriangulation(T0, m.marked))
        assert f.key() == m.key()


def test_region_labels_are_t0_edges():
    vs = {Slope.from_vector(v).unoriented() for v in T0.vectors}
    for i in range(6):
        assert arc_slope(TREE.region_label(RootRegion(i))).unoriented() in vs


def test_action_is_free_to_depth_10():
    seen = set()
    for addr, m, _, _ in TREE.enumerate(10):
        key = (slope_triple(m.tri), m.tri.vectors[m.marked])
        assert key not in seen
        seen.add(key)
    assert len(seen) == 6 * (2**10 - 1)


def test_label_slopes_match_farey_oracle():
    layers = farey_layers(8)
    for d, level in enumerate(iter_spheres(TREE.shape(), 8), 1):
        slopes = [TREE.label(a).tri.vectors[TREE.label(a).marked] for a in level]
        assert len(set(slopes)) == len(slopes)
        assert set(slopes) == layers[d - 1]


def test_encode_examples():
    assert str(encode(TREE, Slope(1, 0))) == "edge-of-T0: e1"
    code = encode(TREE, Slope.from_vector((1, -1)))
    assert isinstance(code, EdgeAddress) and code.depth == 1


@given(st.integers(-25, 25), st.integers(-25, 25))
def test_encode_decode_roundtrip(p, q):
    if (p, q) == (0, 0) or math.gcd(p, q) != 1:
        return
    s = Slope.from_vector((p, q))
    code = encode(TREE, s)
    if isinstance(code, T0Edge):
        assert T0.vectors[code.slot] == s.vector
    else:
        assert decode(TREE, code) == s


def test_slope_text():
    assert str(Slope.parse("3/5")) == "3/5+"
    assert Slope.parse("3/5-").vector == (-3, -5)
    assert Slope.parse("-1/-2").vector == (-1, -2)
    with pytest.raises(ValueError):
        Slope(2, 4)


def test_order_and_mirror_control():
    assert order_check(TREE, 6).passed
    bad = order_check(LabelTree(T0, mirror=True), 3)
    assert not bad.passed and bad.depth == 1


def test_never_blocked_on_torus():
    assert not any(lb or rb for _, _, lb, rb in TREE.enumerate(6))


def test_twice_punctured_torus():
    tree = LabelTree(twice_punctured_torus())
    states = list(tree.enumerate(6))
    assert not any(lb and rb for _, _, lb, rb in states)
    assert any(rb for _, _, _, rb in states) and any(lb for _, _, lb, _ in states)


def test_sphere_roots_both_blocked():
    tree = LabelTree(thrice_punctured_sphere())
    roots = [(lb, rb) for a, _, lb, rb in tree.enumerate(1)]
    assert roots and all(lb and rb for lb, rb in roots)


def test_right_blocked_example():
    m = right_blocked_example(twice_punctured_torus())
    assert is_right_blocked(m) and not is_left_blocked(m)
    with pytest.raises(BlockedMoveError) as info:
        right_move(m)
    assert info.value.side == "R"


def test_intersection_length():
    assert intersection_length(Slope(1, 0), T0) == 0
    assert intersection_length(Slope.from_vector((1, -1)), T0) == 1
    assert intersection_length(Slope(1, 2), T0) == 1
    assert intersection_length(Slope(2, 5), T0) == 1 + 4 + 2


def _fib(n):
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a, b


def test_tree_length_bound():
    fib = [Slope(*_fib(n)) for n in range(1, 13)]
    rep = tree_vs_intersection_bound(TREE, fib)
    assert rep.holds
    depths = [lam for _, lam, _ in rep.rows]
    assert depths == sorted(depths)
    ones = [Slope(1, n) for n in range(1, 30)]
    rep = tree_vs_intersection_bound(TREE, ones)
    assert rep.holds
    rows = rep.rows
    assert rows[-1][1] - rows[-2][1] == rows[-2][1] - rows[-3][1]  # linear in n


def test_enumeration_csv():
    text = enumeration_csv(TREE, 2)
    lines = text.splitlines()
    assert lines[0] == "address,slope,left_blocked,right_blocked"
    assert len(lines) == 1 + 6 + 12

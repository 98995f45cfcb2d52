import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mcshane.circle import (
    CirclePoint,
    ConsistencyError,
    gap_interval,
    gap_intervals,
    intervals_csv,
    sphere_positions,
    uncovered_measure,
    verify_yn_ordering,
    x_limit,
    x_n,
    x_sequence,
    y_n,
)
from mcshane.cusp import modular_torus_form
from mcshane.harmonic import RatioForm, TableForm, gap
from mcshane.planar_tree import EdgeAddress, EdgeRegion, RationalPath, RootRegion, path_edge, sphere

from oracles import gap_term

MODULAR = modular_torus_form()


def test_y_n_examples():
    form = RatioForm.uniform(6, Fraction(1, 2), exact=True)
    for k in range(6):
        assert y_n(form, EdgeAddress(k)).value == Fraction(1, 12) + Fraction(k, 6)
    assert y_n(form, EdgeAddress(0, "L")).value == Fraction(1, 24)
    assert math.isclose(float(y_n(MODULAR, EdgeAddress(0))), 1 / 12, abs_tol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 5), st.text(alphabet="LR", max_size=7))
def test_y_n_matches_running_sum(root, word):
    form = RatioForm.uniform(6, 0.3)
    e = EdgeAddress(root, word)
    assert math.isclose(y_n(form, e).value, sphere_positions(form, e.depth)[e], abs_tol=1e-13)


def test_x_step_is_half_the_sibling():
    form = RatioForm.uniform(6, Fraction(3, 10), exact=True)
    path = RationalPath(EdgeRegion(EdgeAddress(3, "RL")), "L")
    for n in range(4, 15):
        step = abs(x_n(form, path, n + 1).value - x_n(form, path, n).value)
        sib = path_edge(form.shape, path, n + 1).sibling()
        assert step == form.phi(sib) / 2


def test_x_limit_agrees_with_sequence():
    for form in (RatioForm.uniform(6, 0.3), MODULAR):
        for side in "LR":
            path = RationalPath(EdgeRegion(EdgeAddress(1, "L")), side)
            lim = x_limit(form, path)
            seq = x_sequence(form, path, 60)
            assert lim.converged
            assert seq[-1].distance(lim.point) < 1e-6


def test_limits_differ_by_the_gap():
    for region in (RootRegion(2), EdgeRegion(EdgeAddress(4, "RRL"))):
        xl = x_limit(MODULAR, RationalPath(region, "L"))
        xr = x_limit(MODULAR, RationalPath(region, "R"))
        assert math.isclose(xr.unrolled - xl.unrolled, gap(MODULAR, region).gap_estimate, abs_tol=1e-11)


def test_interval_lengths_are_twice_the_gap():
    for region in (RootRegion(0), EdgeRegion(EdgeAddress(0, "L"))):
        g = gap_interval(MODULAR, region)
        assert math.isclose(g.length, 2 * gap(MODULAR, region).gap_estimate, abs_tol=2e-12)


def test_modular_intervals_depth_0_and_1():
    d0 = gap_intervals(MODULAR, 0)
    assert len(d0) == 6
    assert all(math.isclose(g.length, gap_term(3), abs_tol=1e-10) for g in d0)
    d1 = gap_intervals(MODULAR, 1)
    assert len(d1) == 12
    total = math.fsum(g.length for g in d1)
    assert math.isclose(total, 6 * gap_term(3) + 6 * gap_term(6), abs_tol=1e-10)


def test_uncovered_measure():
    assert uncovered_measure(RatioForm.uniform(6, 0.5), 3) == 1.0
    prev = 1.0
    for d in range(4):
        u = uncovered_measure(MODULAR, d)
        assert 0 < u < prev
        prev = u
    assert abs(uncovered_measure(MODULAR, 2) - 0.010927) < 1e-4


def test_inflated_table_raises():
    # root 0 weighs 0.5 but its two outer branches each keep 0.3 forever
    values = {EdgeAddress(0): 0.5, EdgeAddress(1): 0.5}
    for k in range(1, 12):
        values[EdgeAddress(0, "L" * k)] = values[EdgeAddress(0, "R" * k)] = 0.3
        values[EdgeAddress(1, "L" * k)] = values[EdgeAddress(1, "R" * k)] = 0.25
    with pytest.raises(ConsistencyError):
        gap_intervals(TableForm(values), 0, max_n=8)


@pytest.mark.parametrize("split", [0.5, 0.3])
def test_yn_ordering_ratio(split):
    form = RatioForm.uniform(6, split)
    for n in range(1, 9):
        assert verify_yn_ordering(form, n).passed


def test_yn_ordering_modular():
    for n in range(1, 8):
        assert verify_yn_ordering(MODULAR, n).passed


def test_yn_ordering_catches_a_swap():
    ref = RatioForm.uniform(6, 0.3)
    values = {e: ref.phi(e) for n in range(1, 5) for e in sphere(ref.shape, n)}
    for w in ("LL", "LR"):
        values[EdgeAddress(2, w)], values[EdgeAddress(2, "R" + w[1])] = (
            values[EdgeAddress(2, "R" + w[1])],
            values[EdgeAddress(2, w)],
        )
    rep = verify_yn_ordering(TableForm(values), 2)
    assert not rep.passed and rep.counterexample


def test_circle_point_wraps():
    a, b = CirclePoint(0.05, 1.0), CirclePoint(1.95, 1.0)
    assert math.isclose(b.value, 0.95)
    assert math.isclose(a.distance(b), 0.1)


def test_csv_is_deterministic():
    text = intervals_csv(gap_intervals(MODULAR, 1))
    assert text == intervals_csv(gap_intervals(modular_torus_form(), 1))
    assert text.splitlines()[0] == "region_id,depth,left,right,length"
    assert len(text.splitlines()) == 13


def test_tiny_interval_at_an_endpoint_is_not_an_overlap():
    # depth 6 puts a ~1e-17 interval on the left end of a larger one
    out = gap_intervals(MODULAR, 6)
    assert len(out) == 6 * 2**6

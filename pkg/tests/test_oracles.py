import math

import pytest

import oracles
from oracle_values import FAREY_LAYER_SIZES, H3, H6, H15, ORIENTED_SUMS


def test_frozen_terms_reproduce():
    assert oracles.gap_term(3) == pytest.approx(H3, abs=1e-15)
    assert H3 == pytest.approx((3 - math.sqrt(5)) / 6, abs=1e-15)
    assert oracles.gap_term(6) == pytest.approx(H6, abs=1e-15)
    assert oracles.gap_term(15) == pytest.approx(H15, abs=1e-15)


@pytest.mark.parametrize("depth", sorted(ORIENTED_SUMS))
def test_frozen_sums_reproduce(depth):
    assert oracles.oriented_sum(depth) == pytest.approx(ORIENTED_SUMS[depth], abs=1e-14)


def test_sum_composition():
    assert ORIENTED_SUMS[1] == pytest.approx(6 * H3 + 6 * H6, abs=1e-14)
    assert ORIENTED_SUMS[2] == pytest.approx(6 * H3 + 6 * H6 + 12 * H15, abs=1e-14)


def test_region_traces_are_markoff():
    for layer in oracles.region_traces(4)[1:]:
        assert all(x > 2 for x in layer)
    assert oracles.markoff_ok(3, 3, 6) and oracles.markoff_ok(3, 6, 15) and oracles.markoff_ok(6, 15, 87)


def test_farey_layers():
    layers = oracles.farey_layers(5)
    assert [len(l) for l in layers] == FAREY_LAYER_SIZES
    assert (1, -1) in layers[0] and (-1, 1) in layers[0]
    seen = set()
    for l in layers:
        assert not (seen & l)
        seen |= l

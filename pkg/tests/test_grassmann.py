from fractions import Fraction
from math import comb

import numpy as np
import pytest

from helpers import rand_graph_pair
from osculum.expr import SmoothnessExceeded
from osculum.grassmann import (
    GraphMapLevel,
    InsufficientJetOrder,
    chart_coordinate_count,
    closed_form_lift,
    image_map_step,
    lift_levels,
    lifts_equal,
    max_equal_lift,
    recursive_lift,
)
from osculum.jet import Jet
from osculum.manifolds import graph_pair
from osculum.expr import jet_of_expr, parse_expr

F = Fraction


def test_parabola_level_two_chart_point():
    pt = recursive_lift("x^2", [0], 2, ["x"])
    assert pt.coords == (0, 0, 0, 0, 2)
    assert pt.to_json()["layout"]["blocks"] == [[0, 1, 1], [1, 2, 1], [2, 1, 1]]


def test_image_map_step_of_saddle():
    J = jet_of_expr(parse_expr("u1*u2"), [0, 0], 3, ["u1", "u2"])
    g = image_map_step(GraphMapLevel.start(J))
    assert g.h.width == 3
    assert g.h.component(1).terms() == [((0, 1), F(1))]
    assert g.h.component(2).terms() == [((1, 0), F(1))]
    assert g.labels == ((0, ()), (0, (0,)), (0, (1,)))


def test_lift_needs_positive_order():
    J = jet_of_expr(parse_expr("x^2"), [0], 0, ["x"])
    with pytest.raises(InsufficientJetOrder):
        image_map_step(GraphMapLevel.start(J))


@pytest.mark.parametrize("p,m,l,count,dims", [(1, 2, 2, 5, [2, 3, 5]), (2, 3, 1, 5, [3, 5]), (2, 4, 2, 20, [4, 8, 20])])
def test_chart_coordinate_counts(p, m, l, count, dims):
    assert chart_coordinate_count(p, m, l) == (count, dims)


def test_lifts_of_quintic_perturbation():
    pair = graph_pair("x^2", "x^2 + x^5")
    assert lifts_equal(pair, 4)
    assert not lifts_equal(pair, 5)
    assert max_equal_lift(pair, 8) == (4, 8)


def test_colley_kennedy_lifts():
    pair = graph_pair("x^2 - abs(x)^(5/2)", "x^2 + abs(x)^(5/2)")
    assert lifts_equal(pair, 2)
    with pytest.raises(SmoothnessExceeded):
        lifts_equal(pair, 3)


def test_recursive_matches_closed_form_on_random_maps():
    rng = np.random.default_rng(17)
    for _ in range(30):
        p = int(rng.integers(1, 4))
        k = int(rng.integers(1, 5))
        F_, _, v = rand_graph_pair(rng, p, int(rng.integers(1, 3)), 1, max_deg=k + 1)
        a = recursive_lift(F_, [0] * p, k, v)
        b = closed_form_lift(F_, [0] * p, k, v)
        assert a.coords == b.coords
        assert len(a.coords) == chart_coordinate_count(p, p + len(F_), k)[0]


def test_label_multiplicities_are_binomial():
    J = jet_of_expr(parse_expr("u1^3*u2 + u2^2"), [0, 0], 4, ["u1", "u2"])
    top = lift_levels(J, 4)[-1]
    counts = {}
    for lab in top.labels:
        counts[lab] = counts.get(lab, 0) + 1
    for (i, seq), c in counts.items():
        assert c == comb(4, len(seq))

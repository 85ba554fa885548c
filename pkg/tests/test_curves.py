from fractions import Fraction

import numpy as np
import pytest

from helpers import rand_graph_pair
from osculum.curves import (
    NoWitness,
    ambient_curve,
    curve_contact_order,
    curve_jet,
    find_witness_direction,
    minimax_tangency,
)
from osculum.jet import AtLeast
from osculum.manifolds import graph_pair
from osculum.taylor import order_from_graphs

F = Fraction


def test_curve_contact_order_on_parabolas():
    Fj = graph_pair("x^2", "x^2 + x^5").M.jet(6)
    Ftj = graph_pair("x^2", "x^2 + x^5").Mt.jet(6)
    u = curve_jet([(F(1),)], 6)
    assert curve_contact_order(ambient_curve(Fj, u), ambient_curve(Ftj, u)) == 4


def test_minimax_quintic():
    rep = minimax_tangency(graph_pair("x^2", "x^2 + x^5"), n_dirs=4, n_curves=4)
    assert rep.outer_min == 4
    assert rep.warnings == []


def test_minimax_surfaces_axes_are_degenerate():
    # u1^2 u2^2 vanishes to high order along both axes, so the axes do not attain the minimum
    pair = graph_pair("u1^2 + u2^2", "u1^2 + u2^2 + u1^2*u2^2", ["u1", "u2"])
    rep = minimax_tangency(pair, n_dirs=8, n_curves=4)
    assert rep.outer_min == 3
    axes = [r for r in rep.records if sum(1 for c in r.direction if c) == 1]
    assert all(r.inner_max == AtLeast(10) for r in axes)
    assert all(sum(1 for c in w if c) == 2 for w in rep.attaining)


def test_minimax_colley_kennedy_is_flagged():
    pair = graph_pair("x^2 - abs(x)^(5/2)", "x^2 + abs(x)^(5/2)")
    rep = minimax_tangency(pair, n_dirs=2, n_curves=2)
    assert rep.outer_min == AtLeast(2)
    assert any("not certified" in w for w in rep.warnings)


def test_witness_surfaces():
    pair = graph_pair("u1^2 + u2^2", "u1^2 + u2^2 + u1^2*u2^2", ["u1", "u2"])
    w = find_witness_direction(pair, 3)
    assert w.direction == (1, 1)
    assert w.value == 1
    assert w.unit_value == pytest.approx(0.25)
    assert w.certified
    with pytest.raises(NoWitness):
        find_witness_direction(pair, 2)
    with pytest.raises(NoWitness):
        find_witness_direction(pair, 4)


def test_minimax_is_deterministic():
    pair = graph_pair("x^2", "x^2 + x^4")
    a = minimax_tangency(pair, n_dirs=4, n_curves=4, seed=3).as_dict()
    b = minimax_tangency(pair, n_dirs=4, n_curves=4, seed=3).as_dict()
    assert a == b


def test_minimax_never_below_taylor_order():
    # the straight-line pair already reaches s in every direction
    rng = np.random.default_rng(21)
    for i in range(15):
        s = int(rng.integers(1, 5))
        F_, Ft, v = rand_graph_pair(rng, int(rng.integers(1, 3)), int(rng.integers(1, 3)), s)
        rep = minimax_tangency(graph_pair(F_, Ft, v), n_dirs=6, n_curves=4, l_max=6, seed=i)
        assert all(not isinstance(r.inner_max, int) or r.inner_max >= s for r in rep.records)


def test_no_curve_pair_beats_the_witness():
    rng = np.random.default_rng(8)
    for i in range(15):
        s = int(rng.integers(1, 5))
        F_, Ft, v = rand_graph_pair(rng, int(rng.integers(1, 3)), 1, s)
        pair = graph_pair(F_, Ft, v)
        w = find_witness_direction(pair, s)
        rep = minimax_tangency(pair, n_dirs=0, n_curves=12, l_max=6, seed=i, extra_directions=[w.direction])
        rec = next(r for r in rep.records if r.direction == tuple(F(c) for c in w.direction))
        assert rec.inner_max == s

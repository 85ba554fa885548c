import math
from fractions import Fraction

import numpy as np
import pytest

from osculum.contact import (
    INTEGRABLE,
    STANDARD_CONTACT,
    DegeneratePlane,
    Distribution2in3,
    SurfacePatch,
    angle_order_along,
    contact_order_estimate,
    geiges_check,
    plane_angle,
    random_tangent_quadratics,
)
from osculum.jet import AtLeast

F = Fraction
FLAT = SurfacePatch.graph("0")


def test_plane_angles():
    assert plane_angle((0, 0, 1), (0, 0, 2)) == 0
    assert plane_angle((0, 0, 1), (0, 1, 0)) == pytest.approx(math.pi / 2)
    # ker(dz - y dx) at (0, 1, 0) against z = 0
    n = STANDARD_CONTACT.normal((0, 1, 0))
    assert plane_angle(n, (0, 0, 1)) == pytest.approx(math.pi / 4)
    with pytest.raises(DegeneratePlane):
        plane_angle((0, 0, 0), (0, 0, 1))


def test_small_angles_keep_precision():
    t = 1e-9
    assert plane_angle((-t, 0, 1), (0, 0, 1)) == pytest.approx(t, rel=1e-12)


def test_standard_structure_on_flat_plane():
    est = contact_order_estimate(STANDARD_CONTACT, FLAT)
    assert est.tangent
    assert abs(est.order - 1) <= 0.05


def test_integrable_structure_underflows():
    assert contact_order_estimate(INTEGRABLE, FLAT, l_max=7).order == AtLeast(7)


def test_saddle_is_tangent_with_order_at_most_one():
    est = contact_order_estimate(STANDARD_CONTACT, SurfacePatch.graph("x*y"))
    assert est.tangent
    assert est.order <= 1.05
    # along x = 0 the saddle is tangent to the plane field, so that direction underflows
    assert angle_order_along(STANDARD_CONTACT, SurfacePatch.graph("x*y"), (0, 1)) == AtLeast(10)


def test_non_tangent_surface_is_order_zero_without_sampling():
    est = contact_order_estimate(STANDARD_CONTACT, SurfacePatch.graph("x + y"))
    assert est.order == 0
    assert est.directions == []


def test_exact_angle_orders():
    assert angle_order_along(STANDARD_CONTACT, FLAT, (0, 1)) == 1
    assert angle_order_along(STANDARD_CONTACT, FLAT, (1, 0)) == AtLeast(10)
    assert angle_order_along(STANDARD_CONTACT, SurfacePatch.graph("y^2"), (1, 1)) == 1
    assert angle_order_along(INTEGRABLE, SurfacePatch.graph("x^3"), (1, 0)) == 2


def test_numeric_matches_exact_on_cubic_graph():
    # ker dz against z = x^3: angle ~ 3 x^2
    est = contact_order_estimate(INTEGRABLE, SurfacePatch.graph("x^3"))
    assert est.order == pytest.approx(2, abs=0.05)


def test_random_tangent_quadratics_pass():
    surfaces = random_tangent_quadratics(STANDARD_CONTACT, 20, seed=4)
    rep = geiges_check(STANDARD_CONTACT, surfaces)
    assert rep.verdict == "PASS"
    assert rep.witness is None
    assert max(r["order"] for r in rep.surfaces) < 1.5
    assert "sampling only" in rep.note


def test_integrable_structure_has_witness():
    rep = geiges_check(INTEGRABLE, [FLAT], l_max=10)
    assert rep.verdict == "FAIL"
    assert rep.witness == {"index": 0, "order": ">=10"}


def test_rescaling_the_form_changes_nothing():
    rng = np.random.default_rng(2)
    surfaces = random_tangent_quadratics(STANDARD_CONTACT, 3, seed=9)
    for S in surfaces:
        c = [F(int(rng.integers(1, 6)), 2) for _ in range(3)]
        f = f"1 + ({c[0]})*x^2 + ({c[1]})*y^2 + ({c[2]})*z^2"
        scaled = STANDARD_CONTACT.rescaled(f)
        a = contact_order_estimate(STANDARD_CONTACT, S)
        b = contact_order_estimate(scaled, S)
        assert b.order == pytest.approx(a.order, abs=1e-9)
        for w in ((1, 0), (0, 1), (1, 2)):
            assert angle_order_along(scaled, S, w) == angle_order_along(STANDARD_CONTACT, S, w)


def test_tangent_surface_at_another_point():
    # at (1, 2, 0) the plane field is z = 2 x + const; build a graph tangent there
    S = random_tangent_quadratics(STANDARD_CONTACT, 1, seed=0, at=(1, 2, 0))[0]
    est = contact_order_estimate(STANDARD_CONTACT, S)
    assert est.tangent and est.order <= 1.1


def test_form_from_strings():
    xi = Distribution2in3.from_form("-y", "0", "1")
    assert xi == STANDARD_CONTACT

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monopersuasion.errors import NoBitangent, ShapeUnrecognized
from monopersuasion.objective import (ObjectiveFn, classify_shape, concavify_at, solve_bitangent,
                                      tangent_gap)

from conftest import M_L_EXACT, M_R_EXACT, quartic_value

GRID = np.linspace(0.0, 1.0, 101)[1:-1]

omega_M = st.floats(0.1, 0.9)
affine = st.tuples(st.floats(-5, 5), st.floats(-5, 5))


@st.composite
def m_params(draw):
    lo = draw(st.floats(0.05, 0.85))
    hi = draw(st.floats(lo + 0.05, 0.95))
    return lo, hi


@st.composite
def centred_m_params(draw):
    # tangency points sit at c -+ sqrt(3) h, so keep them inside (0, 1)
    c = draw(st.floats(0.4, 0.6))
    h = draw(st.floats(0.03, 0.2))
    return c - h, c + h


def test_smoothstep_is_s_shaped():
    rep = classify_shape(ObjectiveFn.polynomial([0, 0, 3, -2]))
    assert rep.kind == "s_shaped"
    assert rep.omega_M == pytest.approx(0.5, abs=1e-12)


def test_m_family_inflections(even_quartic):
    rep = classify_shape(even_quartic)
    assert rep.kind == "m_shaped"
    assert rep.omega_L == pytest.approx(0.3, abs=1e-12)
    assert rep.omega_R == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize("coeffs, kind", [
    ([0, 0, 1], "convex"),
    ([0, 0, -1], "concave"),
    ([1, 2], "affine"),
    ([0, 0, 0, 1], "convex"),  # V'' = 6m vanishes only at the endpoint
])
def test_simple_kinds(coeffs, kind):
    assert classify_shape(ObjectiveFn.polynomial(coeffs)).kind == kind


def test_concave_convex_is_other():
    # V'' = m - 0.5
    assert classify_shape(ObjectiveFn.polynomial([0, 0, -0.25, 1 / 6])).kind == "other"


def test_too_many_sign_changes_rejected():
    # V'' = (m - .2)(m - .4)(m - .6)(m - .8)
    d2 = np.polynomial.Polynomial.fromroots([0.2, 0.4, 0.6, 0.8])
    V = ObjectiveFn.polynomial(d2.integ(2).coef)
    with pytest.raises(ShapeUnrecognized) as exc:
        classify_shape(V)
    assert exc.value.code == "objective_kit.ShapeUnrecognized"


def test_near_flat_curvature_rejected():
    # V'' = 90 m^8 is numerically zero on a whole run of grid points near 0
    V = ObjectiveFn.polynomial([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1.0])
    with pytest.raises(ShapeUnrecognized):
        classify_shape(V)


def test_grid_points_minimum(smoothstep):
    with pytest.raises(ValueError):
        classify_shape(smoothstep, grid_points=50)


@given(omega_M, affine)
@settings(max_examples=30, deadline=None)
def test_s_family_stable_under_refinement(w, ab):
    V = ObjectiveFn.s_family(w, ab)
    coarse, fine = classify_shape(V, 101), classify_shape(V, 1001)
    assert coarse.kind == fine.kind == "s_shaped"
    assert fine.omega_M == pytest.approx(w, abs=1e-10)


@given(m_params(), affine)
@settings(max_examples=30, deadline=None)
def test_m_family_stable_under_refinement(lr, ab):
    V = ObjectiveFn.m_family(*lr, ab)
    assert classify_shape(V, 101).kind == classify_shape(V, 1001).kind == "m_shaped"


@given(omega_M, affine)
@settings(max_examples=20, deadline=None)
def test_derivatives_consistent_s(w, ab):
    _check_fd(ObjectiveFn.s_family(w, ab))


@given(m_params(), affine)
@settings(max_examples=20, deadline=None)
def test_derivatives_consistent_m(lr, ab):
    _check_fd(ObjectiveFn.m_family(*lr, ab))


def _check_fd(V):
    h = 1e-5
    d1 = (V(GRID + h) - V(GRID - h)) / (2 * h)
    d2 = (V.deriv1(GRID + h) - V.deriv1(GRID - h)) / (2 * h)
    assert np.max(np.abs(d1 - V.deriv1(GRID))) < 1e-6
    assert np.max(np.abs(d2 - V.deriv2(GRID))) < 1e-5


def test_family_curvature_matches_definition():
    V = ObjectiveFn.m_family(0.3, 0.7)
    x = np.linspace(0, 1, 11)
    assert np.allclose(V.deriv2(x), (x - 0.3) * (0.7 - x), atol=1e-14)
    S = ObjectiveFn.s_family(0.4)
    assert np.allclose(S.deriv2(x), 0.4 - x, atol=1e-14)


def test_even_quartic_closed_form(even_quartic):
    x = np.linspace(0, 1, 51)
    assert np.allclose(even_quartic(x), quartic_value(x), atol=1e-15)
    assert even_quartic.deriv1(0.5) == pytest.approx(0.0, abs=1e-15)


def test_from_dict_round_trip():
    for V in (ObjectiveFn.s_family(0.4, [1, 2]), ObjectiveFn.m_family(0.2, 0.6),
              ObjectiveFn.polynomial([0, 0, 3, -2], [0.5, 0])):
        W = ObjectiveFn.from_dict(V.to_dict())
        assert W.coeffs == V.coeffs
    with pytest.raises(ValueError):
        ObjectiveFn.from_dict({"kind": "spline"})


# -- tangent gap -------------------------------------------------------------------------

@given(st.floats(0, 1))
def test_gap_vanishes_on_diagonal(m):
    assert tangent_gap(ObjectiveFn.s_family(0.6), m, m) == 0.0


def test_gap_smoothstep_tangency(smoothstep):
    # tangent at 3/4 passes through the origin
    assert tangent_gap(smoothstep, 0.0, 0.75) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0, 1), st.floats(0, 1))
def test_gap_of_square(w, m):
    V = ObjectiveFn.polynomial([0, 0, 1])
    assert tangent_gap(V, w, m) == pytest.approx((w - m) ** 2, abs=1e-15)


@given(st.floats(0, 1), st.floats(0, 1), affine)
def test_gap_affine_invariant_exactly(w, m, ab):
    V = ObjectiveFn.m_family(0.3, 0.7)
    assert tangent_gap(V.with_affine(*ab), w, m) == tangent_gap(V, w, m)


def test_gap_matches_definition():
    V = ObjectiveFn.s_family(0.35, [0.2, -0.1])
    w, m = np.meshgrid(np.linspace(0, 1, 7), np.linspace(0, 1, 7))
    direct = V(w) - V(m) - V.deriv1(m) * (w - m)
    assert np.allclose(tangent_gap(V, w, m), direct, atol=1e-14)


# -- bitangent ---------------------------------------------------------------------------

def test_even_quartic_bitangent(even_quartic):
    bt = solve_bitangent(even_quartic)
    assert bt.m_L == pytest.approx(M_L_EXACT, abs=1e-12)
    assert bt.m_R == pytest.approx(M_R_EXACT, abs=1e-12)
    assert bt.slope == pytest.approx(0.0, abs=1e-14)
    # tangency points are the roots of m^2 - m + 0.13
    assert bt.m_L ** 2 - bt.m_L + 0.13 == pytest.approx(0.0, abs=1e-12)


def test_bitangent_affine_shift(even_quartic):
    base = solve_bitangent(even_quartic)
    bt = solve_bitangent(even_quartic.with_affine(2.0, 1.0))
    assert bt.m_L == pytest.approx(base.m_L, abs=1e-9)
    assert bt.m_R == pytest.approx(base.m_R, abs=1e-9)
    assert bt.slope == pytest.approx(2.0, abs=1e-12)


def test_s_shaped_has_no_bitangent(smoothstep):
    with pytest.raises(NoBitangent):
        solve_bitangent(smoothstep)


def test_lopsided_m_family_has_no_interior_bitangent():
    # the right tangency point would sit beyond 1
    with pytest.raises(NoBitangent):
        solve_bitangent(ObjectiveFn.m_family(0.5, 0.875))


@given(centred_m_params(), affine)
@settings(max_examples=40, deadline=None)
def test_bitangent_residuals(lr, ab):
    V = ObjectiveFn.m_family(*lr, ab)
    bt = solve_bitangent(V)
    assert 0 < bt.m_L < lr[0] and lr[1] < bt.m_R < 1
    assert abs(V.deriv1(bt.m_L) - bt.slope) < 1e-8
    assert abs(V.deriv1(bt.m_R) - bt.slope) < 1e-8
    assert abs(V(bt.m_R) - V(bt.m_L) - bt.slope * (bt.m_R - bt.m_L)) < 1e-8
    base = solve_bitangent(ObjectiveFn.m_family(*lr))
    assert abs(bt.m_L - base.m_L) < 1e-9 and abs(bt.m_R - base.m_R) < 1e-9
    assert abs(bt.slope - base.slope - ab[0]) < 1e-9
    c, h = 0.5 * (lr[0] + lr[1]), 0.5 * (lr[1] - lr[0])
    assert abs(base.m_L - (c - np.sqrt(3) * h)) < 1e-9
    assert abs(base.m_R - (c + np.sqrt(3) * h)) < 1e-9


def test_concavify(even_quartic):
    bt = solve_bitangent(even_quartic)
    assert concavify_at(even_quartic, bt, bt.m_L) == pytest.approx(float(even_quartic(bt.m_L)), abs=1e-15)
    # horizontal bitangent: co V(0.5) = V(m_L)
    assert concavify_at(even_quartic, bt, 0.5) == pytest.approx(0.00140833333333, abs=1e-12)
    assert concavify_at(even_quartic, bt, 0.5) == pytest.approx(float(quartic_value(M_L_EXACT)), abs=1e-14)


def test_concavify_symmetric_midpoint(even_quartic):
    V = even_quartic.with_affine(0.7, 0.0)
    bt = solve_bitangent(V)
    mid = 0.5 * (bt.m_L + bt.m_R)
    assert concavify_at(V, bt, mid) == pytest.approx(0.5 * (V(bt.m_L) + V(bt.m_R)), abs=1e-14)


@given(centred_m_params())
@settings(max_examples=20, deadline=None)
def test_concavification_dominates(lr):
    V = ObjectiveFn.m_family(*lr)
    bt = solve_bitangent(V)
    x = np.linspace(0, 1, 1001)
    co = concavify_at(V, bt, x)
    assert np.all(co >= V(x) - 1e-14)
    outside = (x < bt.m_L) | (x > bt.m_R)
    assert np.array_equal(co[outside], V(x)[outside])

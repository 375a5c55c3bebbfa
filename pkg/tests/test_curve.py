from fractions import Fraction

import pytest

import sawproj as sp
from sawproj.curve import CanonicalTau, Vertex
from sawproj.diagnostics import rand_fraction, spawn_rng
from sawproj.errors import BudgetExceeded, DomainError

F = Fraction


def test_level_zero_is_a_straight_segment(d2, r1):
    c0 = sp.build_curve(d2, r1, 0)
    assert sp.curve_length(c0) == 1
    assert [v.coords for v in c0.vertices] == [(F(0),), (F(1, 2),), (F(1),), (F(1),)]
    assert c0.vertical == (False, False, True)


def test_level_one_polygon_exact(d2, r1):
    c1 = sp.build_curve(d2, r1, 1)
    expected = [
        (F(0), (F(0), F(0))),
        (F(1, 4), (F(1, 4), F(0))),
        (F(1, 2), (F(1, 2), F(1, 16))),
        (F(1, 2), (F(1, 2), F(0))),
        (F(3, 4), (F(3, 4), F(0))),
        (F(1), (F(1), F(1, 16))),
        (F(1), (F(1), F(0))),
    ]
    assert [(v.t, v.coords) for v in c1.vertices] == expected
    assert c1.vertical == (False, False, True, False, False, True)
    assert sp.curve_length(c1) == F(5, 4)


def test_length_ledger(d2, r1):
    lengths = {0: sp.curve_length(sp.build_curve(d2, r1, 0))}
    for n in range(1, 5):
        lengths[n] = sp.curve_length(sp.build_curve(d2, r1, n))
        built = lengths[n] - lengths[n - 1]
        closed = sp.length_increment(d2, r1, n)
        assert built == closed
        assert built <= F(3, 2) * abs(r1.coeff(n))
    assert lengths[4] == sp.curve_length_closed_form(d2, r1, 4)
    assert lengths[4] == 1 + sum(sp.length_increment(d2, r1, n) for n in range(1, 5))


def test_length_difference_requires_consecutive_matching_curves(d2, r1):
    c2 = sp.build_curve(d2, r1, 2)
    c1 = sp.build_curve(d2, r1, 1)
    assert sp.length_difference(c2, c1) == sp.length_increment(d2, r1, 2)
    with pytest.raises(DomainError):
        sp.length_difference(c2, sp.build_curve(d2, r1, 0))
    other = sp.Functional(alpha0=F(1), rule=sp.geometric(F(1, 4), F(1, 2)))
    with pytest.raises(DomainError):
        sp.length_difference(c2, sp.build_curve(d2, other, 1))


def test_zero_functional_collapses_to_segment(d2):
    zero = sp.Functional(alpha0=F(1), rule=sp.explicit([0] * 12, 0, 0))
    c3 = sp.build_curve(d2, zero, 3)
    assert sp.curve_length(c3) == 1
    for v in c3.vertices:
        assert v.coords[0] == v.t
        assert all(c == 0 for c in v.coords[1:])


def test_containment_of_truncated_points(d2, r1):
    c3 = sp.build_curve(d2, r1, 3)
    rng = spawn_rng(17)
    for _ in range(1000):
        assert sp.point_on_curve(c3, rand_fraction(rng))
    # a point off the set is rejected
    moved = sp.PolygonalCurve(
        c3.params,
        c3.functional,
        c3.level,
        (Vertex(F(0), (F(0), F(1), F(0), F(0))),) + c3.vertices[1:],
        c3.vertical,
    )
    assert not sp.point_on_curve(moved, F(1, 10**6))


def test_curve_requires_l1_model_and_contraction(d1, d2, f1):
    with pytest.raises(DomainError):
        sp.build_curve(d1, f1, 1)
    too_big = sp.Functional(alpha0=F(1), rule=sp.geometric(F(3, 2), F(1, 2)))
    with pytest.raises(DomainError):
        sp.build_curve(d2, too_big, 1)


def test_vertex_budget(d2, r1):
    with pytest.raises(BudgetExceeded) as err:
        sp.build_curve(d2, r1, 4, vertex_budget=10)
    assert err.value.count == 3 * d2.grid_size(4) + 1


def test_canonical_tau_structure(d2):
    tau = sp.canonical_tau(d2, 1)
    assert tau.grid_size == 2
    assert tau.const_len == F(1, 4 * 2 * 3)
    assert (tau.grid_size + 1) * tau.const_len + tau.grid_size * tau.gap_len == 1
    assert tau.value(F(0)) == 0
    assert tau.value(F(1)) == 1
    # nondecreasing along a sweep
    prev = F(-1)
    for k in range(101):
        v = tau.value(F(k, 100))
        assert v >= prev
        prev = v


def test_tau_validation(d2, r1):
    c1 = sp.build_curve(d2, r1, 1)
    bad = CanonicalTau(3, F(1, 48), F(1, 48))  # wrong grid, wrong total
    with pytest.raises(DomainError):
        sp.parametrize(c1, bad)
    degenerate = CanonicalTau(2, F(0), F(1, 2))
    with pytest.raises(DomainError):
        sp.parametrize(c1, degenerate)


def test_evaluator_traverses_connectors(d2, r1):
    c1 = sp.build_curve(d2, r1, 1)
    ev = sp.parametrize(c1)
    tau = ev.tau
    # halfway through the constant interval at t = 1/2 the point sits midway
    # down the vertical connector
    s_mid = tau.const_len + tau.gap_len + tau.const_len / 2
    assert ev.value(s_mid) == (F(1, 2), F(1, 32))
    # endpoints of the run
    assert ev.value(F(0)) == (F(0), F(0))
    assert ev.value(F(1)) == (F(1), F(0))
    # inside a gap the evaluator follows the truncated coordinates
    s = tau.const_len + tau.gap_len / 2
    t = tau.value(s)
    assert ev.value(s) == (t, r1.coeff(1) * sp.component_value(d2, 1, t))


def test_sup_distance_enumeration_matches_closed_form(d2, r1):
    curves = {n: sp.build_curve(d2, r1, n) for n in range(4)}
    for n in (1, 2, 3):
        enum = sp.sup_distance(curves[n], curves[n - 1])
        assert enum == sp.sup_distance_bound(d2, r1, n)
        assert enum == abs(r1.coeff(n)) / (2 * d2.grid_size(n))
        assert enum <= F(3, 2) * abs(r1.coeff(n))


def test_sup_distance_golden_level_one(d2, r1):
    c0 = sp.build_curve(d2, r1, 0)
    c1 = sp.build_curve(d2, r1, 1)
    value = sp.sup_distance(c1, c0)
    assert value == F(1, 16)
    assert value <= F(3, 8)


def test_sup_distance_zero_functional(d2):
    zero = sp.Functional(alpha0=F(1), rule=sp.explicit([0] * 12, 0, 0))
    c1 = sp.build_curve(d2, zero, 1)
    c0 = sp.build_curve(d2, zero, 0)
    assert sp.sup_distance(c1, c0) == 0


def test_sup_distance_dominates_a_fine_parameter_sweep(d2, r1):
    from sawproj.curve import CurveEvaluator, _l1_distance

    c2, c1 = sp.build_curve(d2, r1, 2), sp.build_curve(d2, r1, 1)
    sup = sp.sup_distance(c2, c1)
    tau = sp.canonical_tau(d2, 2)
    ev2 = CurveEvaluator(d2, r1, 2, tau)
    ev1 = CurveEvaluator(d2, r1, 1, tau)
    sweep = max(
        _l1_distance(ev2.value(F(k, 997)), ev1.value(F(k, 997))) for k in range(998)
    )
    assert sweep <= sup


def test_evaluator_is_continuous_at_segment_junctions(d2, r1):
    from sawproj.curve import CurveEvaluator, _l1_distance
    from sawproj.diagnostics import curve_lipschitz_upper

    tau = sp.canonical_tau(d2, 1)
    ev = CurveEvaluator(d2, r1, 1, tau)
    speed_bound = curve_lipschitz_upper(ev)
    eps = F(1, 10**9)
    for s in tau.segment_starts():
        for probe in (s - eps, s + eps):
            if 0 <= probe <= 1:
                assert _l1_distance(ev.value(probe), ev.value(s)) <= speed_bound * eps

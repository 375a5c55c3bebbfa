from fractions import Fraction

import pytest

import sawproj as sp
from sawproj.diagnostics import (
    curve_lipschitz_upper,
    rand_fraction,
    sample_event_union,
    sample_secant_witnesses,
    sample_slope_identities,
    secant_threshold,
    spawn_rng,
)
from sawproj.errors import BudgetExceeded, DomainError
from sawproj.measure import IntervalUnion

F = Fraction


def test_event_set_measures(d1):
    assert sp.event_set(d1, 1).measure == 1
    assert sp.event_set(d1, 2).measure == F(1, 2)
    assert sp.event_set(d1, 3).measure == F(1, 3)
    assert sp.event_set(d1, 1).cells.intervals == ((F(0), F(1)),)
    assert sp.event_set(d1, 2).cells.intervals == (
        (F(0), F(1, 8)),
        (F(3, 8), F(5, 8)),
        (F(7, 8), F(1)),
    )


def test_event_set_zero_scale():
    flat = sp.ParameterSet(
        alpha=sp.explicit([0] * 4, 0, 0), m=sp.linear_refinement(2), n_max=4, model="L2"
    )
    ev = sp.event_set(flat, 2)
    assert ev.measure == 0
    assert ev.cells.component_count == flat.grid_size(1) + 1


def test_event_set_rejects_oversized_scale():
    wide = sp.ParameterSet(
        alpha=sp.explicit([F(3, 4)] * 2, 0, 0), m=sp.linear_refinement(2), n_max=2, model="L2"
    )
    with pytest.raises(DomainError):
        sp.event_set(wide, 1)


def test_event_occupies_end_subcells_of_each_coarse_cell(d1):
    # within every level-(n-1) cell the event is exactly the first and last
    # alpha_n * m_n level-n subcells
    for n in (2, 3, 4):
        cells = sp.event_set(d1, n).cells
        coarse = d1.grid_size(n - 1)
        fine = d1.grid_size(n)
        ends = int(d1.alpha_term(n) * d1.refinement_factor(n))
        for k in range(coarse):
            lo = F(k, coarse)
            hi = F(k + 1, coarse)
            inside = cells.intersect(IntervalUnion.from_intervals([(lo, hi)]))
            expected = IntervalUnion.from_intervals(
                [(lo, lo + F(ends, fine)), (hi - F(ends, fine), hi)]
            )
            assert inside == expected


def test_event_membership_closed_form_matches_union(d1):
    rng = spawn_rng(5)
    for n in (1, 2, 3, 4):
        cells = sp.event_set(d1, n).cells
        for _ in range(200):
            t = rand_fraction(rng)
            assert sp.event_contains(d1, n, t) == cells.contains(t)


def test_independence_pairs_and_triples(d1):
    assert sp.independence_check(d1, (1, 2)).measure == F(1, 2)
    assert sp.independence_check(d1, (2, 3)).measure == F(1, 6)
    res = sp.independence_check(d1, (2, 3, 4))
    assert res.measure == res.expected == F(1, 24)
    single = sp.independence_check(d1, (3,))
    assert single.measure == 2 * d1.alpha_term(3)
    with pytest.raises(DomainError):
        sp.independence_check(d1, (1, 2, 3, 4, 5))
    with pytest.raises(BudgetExceeded):
        sp.independence_check(d1, (5, 6), component_budget=10)


def test_union_sampling_is_seeded_and_within_three_sigmas(d1):
    report = sample_event_union(d1, range(4, 9), 4000, 271828)
    again = sample_event_union(d1, range(4, 9), 4000, 271828)
    assert report.hits == again.hits
    assert report.expected_probability == F(5, 8)
    assert report.within_sigmas(3)


def test_secant_witness_eligible_example(d1):
    size = d1.grid_size(4)
    beta = F(1, size)  # grid index 1 is on no coarser grid
    t0 = beta - d1.alpha_term(4) / (2 * size)
    w = sp.secant_witness(d1, t0, 4)
    assert w is not None
    assert w.tn == beta
    assert w.passed
    assert w.threshold == secant_threshold(d1)
    assert secant_threshold(d1) == 1 / (64 * d1.box_norm_sq_enclosure()[1])
    assert d1.box_norm_sq_enclosure()[1] <= F(142, 100)
    # witness geometry: different cells, bounded separation
    assert int(w.t0 * size) != int(w.tn * size) or w.tn == beta
    assert abs(w.t0 - w.tn) <= 2 * d1.alpha_term(4) / size


def test_secant_witness_right_side_steps_back(d1):
    size = d1.grid_size(4)
    beta = F(1, size)
    t0 = beta + d1.alpha_term(4) / (3 * size)
    w = sp.secant_witness(d1, t0, 4)
    assert w is not None
    assert w.tn == beta - d1.alpha_term(4) / size
    assert w.passed


def test_secant_witness_ineligible_cases(d1):
    # nearest grid point lies on a coarser grid
    assert sp.secant_witness(d1, F(1, 8), 4) is None
    # too far from the fine grid
    size = d1.grid_size(4)
    assert sp.secant_witness(d1, F(1, size) + F(1, 2 * size), 4) is None
    # zero scale at the chosen level
    flat = sp.ParameterSet(
        alpha=sp.explicit([0] * 4, 0, 0), m=sp.linear_refinement(2), n_max=4, model="L2"
    )
    assert sp.secant_witness(flat, F(1, 100), 2) is None


def test_secant_witness_requires_l2(d2):
    with pytest.raises(DomainError):
        sp.secant_witness(d2, F(1, 10), 3)


def test_secant_sampling_high_pass_rate(d1):
    passed, total = sample_secant_witnesses(d1, 5, 120, 1234)
    assert total == 120
    assert 10 * passed >= 9 * total


def test_slope_identity_example(d1):
    cell = sp.cell_of(d1, F(1, 8), 1)
    report = sp.slope_identity_check(d1, 1, cell, F(1, 8), F(1, 16))
    assert report.t_shifted == F(3, 8)
    assert set(report.toggled_sides) == {F(0), F(1, 16)}
    assert 2 in report.equal_levels  # half-period divides the shift


def test_slope_identity_zero_shift(d1):
    cell = sp.cell_of(d1, F(1, 8), 1)
    report = sp.slope_identity_check(d1, 1, cell, F(1, 8), F(0))
    assert report.toggled_sides == (F(0), F(0))


def test_slope_identity_rejects_escaping_points(d1):
    cell = sp.cell_of(d1, F(3, 8), 1)
    with pytest.raises(DomainError):
        sp.slope_identity_check(d1, 1, cell, F(3, 8), F(1, 4))


def test_slope_identity_sampling(d1):
    assert sample_slope_identities(d1, 250, 777) == 250


def test_projection_witness_full_interval(d2, r1):
    ev = sp.parametrize(sp.build_curve(d2, r1, 0))
    w = sp.projection_witness(ev, IntervalUnion.from_intervals([(F(0), F(1))]), (F(1),), F(2))
    assert w is not None
    assert w.bound == F(1, 2)
    assert w.positive


def test_projection_witness_with_gap(d2, r1):
    ev = sp.parametrize(sp.build_curve(d2, r1, 0))
    a = IntervalUnion.from_intervals([(F(0), F(9, 20)), (F(11, 20), F(1))])
    w = sp.projection_witness(ev, a, (F(1),), F(2))
    assert w is not None
    assert w.positive
    assert w.bound == w.chord_norm / 2 - 2 * w.gap_measure


def test_projection_witness_orthogonal_direction(d2, r1):
    ev = sp.parametrize(sp.build_curve(d2, r1, 0))
    a = IntervalUnion.from_intervals([(F(0), F(1))])
    assert sp.projection_witness(ev, a, (F(1, 3),), F(2)) is None


def test_projection_witness_sees_higher_coordinates(d2, r1):
    ev = sp.parametrize(sp.build_curve(d2, r1, 1))
    a = IntervalUnion.from_intervals([(F(0), F(1))])
    # the full chord is horizontal, so a weight on coordinate 1 alone sees nothing
    assert sp.projection_witness(ev, a, (F(0), F(1)), F(2)) is None
    w = sp.projection_witness(ev, a, (F(1), F(1)), F(2))
    assert w is not None and w.positive


def test_projection_witness_validates_inputs(d2, r1):
    ev = sp.parametrize(sp.build_curve(d2, r1, 0))
    a = IntervalUnion.from_intervals([(F(0), F(1))])
    with pytest.raises(DomainError):
        sp.projection_witness(ev, a, (F(2),), F(2))
    with pytest.raises(DomainError):
        sp.projection_witness(ev, a, (F(1),), F(1, 2))
    with pytest.raises(DomainError):
        sp.projection_witness(
            ev, IntervalUnion.from_intervals([(F(0), F(3, 2))]), (F(1),), F(2)
        )


def test_curve_lipschitz_upper_dominates_segment_speeds(d2, r1):
    ev = sp.parametrize(sp.build_curve(d2, r1, 1))
    bound = curve_lipschitz_upper(ev)
    assert bound >= 1  # the parameter sweep alone moves coordinate zero


def test_event_measures_hold_up_to_level_eight(d1):
    # deeper levels: hundreds of thousands of components, still exact
    for n in (7, 8):
        assert sp.event_set(d1, n).measure == F(1, n)

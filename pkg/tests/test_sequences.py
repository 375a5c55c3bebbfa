from fractions import Fraction

import pytest

from sawproj.errors import CertificationError, DomainError
from sawproj.sequences import (
    Functional,
    explicit,
    geometric,
    harmonic,
    inverse_square,
)

F = Fraction


def test_term_values():
    assert harmonic(F(1, 2)).term(4) == F(1, 8)
    assert geometric(F(1, 2), F(1, 2)).term(3) == F(1, 16)
    assert inverse_square(F(1, 4)).term(3) == F(1, 36)
    assert explicit([F(1, 3), F(0)], 0, 0).term(2) == 0


def test_terms_start_at_one_and_explicit_is_finite():
    with pytest.raises(DomainError):
        harmonic(F(1)).term(0)
    with pytest.raises(DomainError):
        explicit([F(1)], 0, 0).term(2)


def test_negative_terms_rejected():
    with pytest.raises(DomainError):
        harmonic(F(-1))
    with pytest.raises(DomainError):
        explicit([F(-1, 2)], 0, 0)
    with pytest.raises(DomainError):
        geometric(F(1), F(3, 2))


def test_geometric_tails_are_exact():
    rule = geometric(F(1, 2), F(1, 2))
    for n in (0, 1, 5):
        lo, hi = rule.l1_tail_enclosure(n)
        assert lo == hi
        # telescoping oracle: exact finite sum plus the same closed form later
        partial = sum(rule.term(k) for k in range(n + 1, n + 31))
        deeper = rule.l1_tail_enclosure(n + 30)[0]
        assert lo == partial + deeper
        sq_lo, sq_hi = rule.l2sq_tail_enclosure(n)
        assert sq_lo == sq_hi
        sq_partial = sum(rule.term(k) ** 2 for k in range(n + 1, n + 31))
        assert sq_lo == sq_partial + rule.l2sq_tail_enclosure(n + 30)[0]


@pytest.mark.parametrize("n_from", [1, 2, 8, 50])
def test_harmonic_l2sq_tail_bracket_against_partials(n_from):
    rule = harmonic(F(1, 2))
    lo, hi = rule.l2sq_tail_enclosure(n_from)
    assert lo < hi
    deep = n_from + 3000
    partial = sum(rule.term(k) ** 2 for k in range(n_from + 1, deep + 1))
    deep_lo, deep_hi = rule.l2sq_tail_enclosure(deep)
    # both bracket the same number, so they must be compatible
    assert lo <= partial + deep_hi
    assert hi >= partial + deep_lo
    assert partial < hi


@pytest.mark.parametrize("n_from", [1, 2, 8, 50])
def test_inverse_square_l1_tail_bracket_against_partials(n_from):
    rule = inverse_square(F(1, 4))
    lo, hi = rule.l1_tail_enclosure(n_from)
    deep = n_from + 3000
    partial = sum(rule.term(k) for k in range(n_from + 1, deep + 1))
    deep_lo, deep_hi = rule.l1_tail_enclosure(deep)
    assert lo <= partial + deep_hi
    assert hi >= partial + deep_lo
    assert partial < hi


def test_harmonic_l1_tail_diverges():
    rule = harmonic(F(1, 2))
    assert rule.l1_diverges()
    assert rule.l1_tail_enclosure(3) is None
    with pytest.raises(CertificationError):
        rule.l1_tail_upper(3)


def test_explicit_tails_trusted_as_stated():
    rule = explicit([F(1, 2), F(1, 4)], tail_l1=F(1, 8), tail_l2sq=F(1, 64))
    lo, hi = rule.l1_tail_enclosure(1)
    assert lo == F(1, 4) and hi == F(1, 4) + F(1, 8)
    assert explicit([F(1)], None, None).l1_tail_enclosure(0) is None


def test_scaled_rules():
    rule = inverse_square(F(1, 4)).scaled(F(3))
    assert rule.term(2) == 3 * F(1, 16)
    assert rule.l1_tail_upper(4) == 3 * inverse_square(F(1, 4)).l1_tail_upper(4)
    ex = explicit([F(1, 2)], F(1, 4), F(1, 16)).scaled(F(2))
    assert ex.values == (F(1),)
    assert ex.tail_l1 == F(1, 2)
    assert ex.tail_l2sq == F(1, 4)


def test_term_bound_after():
    assert harmonic(F(1, 2)).term_bound_after(4) == F(1, 10)
    assert geometric(F(1, 2), F(1, 2)).term_bound_after(2) == F(1, 16)
    assert explicit([F(1), F(1, 2)], 0, 0).term_bound_after(1) == F(1, 2)
    assert explicit([F(1)], F(1, 3), None).term_bound_after(0) is None


def test_functional_coeffs_and_signs():
    f = Functional(alpha0=F(1, 2), rule=inverse_square(F(1, 4)))
    assert f.coeff(0) == F(1, 2)
    assert f.coeff(2) == F(1, 16)
    g = Functional(alpha0=F(1, 2), rule=inverse_square(F(1, 4)), sign=-1, signs=(-1, 1))
    assert g.coeff(1) == F(1, 4)  # sign * signs[0] = 1
    assert g.coeff(2) == -F(1, 16)


def test_functional_direction_combination():
    f = Functional(alpha0=F(1, 2), rule=inverse_square(F(1, 4)))
    g = f.with_direction(F(-1), F(4))
    assert g.coeff(0) == F(-1) + 4 * F(1, 2)
    assert g.coeff(3) == 4 * f.coeff(3)
    assert g.abs_tail_upper(2) == 4 * f.abs_tail_upper(2)
    h = f.with_direction(F(1), F(-2))
    assert h.coeff(1) == -2 * f.coeff(1)
    with pytest.raises(DomainError):
        f.with_direction(F(0), F(0))

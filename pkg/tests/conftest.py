from fractions import Fraction

import pytest

import sawproj as sp


@pytest.fixture(scope="session")
def d1() -> sp.ParameterSet:
    return sp.harmonic_l2_preset(n_max=8)


@pytest.fixture(scope="session")
def d2() -> sp.ParameterSet:
    return sp.geometric_l1_preset(n_max=12)


@pytest.fixture(scope="session")
def f1() -> sp.Functional:
    return sp.inverse_square_functional()


@pytest.fixture(scope="session")
def r1() -> sp.Functional:
    # curve coefficients 1/2**(n+1), matching the l1 preset scales
    return sp.Functional(
        alpha0=Fraction(1),
        rule=sp.geometric(Fraction(1, 2), Fraction(1, 2)),
        name="R1",
    )

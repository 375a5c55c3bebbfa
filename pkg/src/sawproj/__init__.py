"""sawproj: exact-arithmetic sawtooth-sum constructions and their projections.

All core computation is exact over arbitrary-precision rationals; square
roots enter only through certified interval enclosures. The package builds
truncated sawtooth-sum curves over exponentially refined grids, measures
images of their scalar projections exactly, brackets the untruncated
projection measures, constructs the polygonal approximations with exact
length accounting, and runs the quantitative diagnostics the constructions
expose. Values are immutable and every operation is a pure function of its
inputs, so everything is safe to share across threads.
"""

from fractions import Fraction

from .construction import (
    PLFunction,
    PLPiece,
    TruncatedPoint,
    build_pl,
    component_value,
    ensemble_evaluate,
    sawtooth,
    truncated_point,
)
from .curve import (
    CanonicalTau,
    CurveEvaluator,
    PolygonalCurve,
    build_curve,
    canonical_tau,
    curve_length,
    curve_length_closed_form,
    length_difference,
    length_increment,
    parametrize,
    point_on_curve,
    sup_distance,
    sup_distance_bound,
)
from .diagnostics import (
    EventSet,
    SecantWitness,
    event_contains,
    event_set,
    independence_check,
    projection_witness,
    sample_event_union,
    secant_witness,
    slope_identity_check,
)
from .errors import (
    BudgetExceeded,
    CertificationError,
    ConfigError,
    DomainError,
    SawprojError,
)
from .measure import (
    IntervalUnion,
    MeasureBracket,
    dilate,
    directional_measure,
    erode,
    hausdorff_upper,
    image_measure,
    projection_bracket,
)
from .params import (
    GridCell,
    ParameterSet,
    RefinementRule,
    ValidationReport,
    block_partition,
    cell_of,
    constant_refinement,
    explicit_refinement,
    grid_cells,
    linear_refinement,
    validate,
)
from .rational import format_rational, parse_rational, sqrt_enclosure
from .sequences import (
    Functional,
    SequenceRule,
    explicit,
    geometric,
    harmonic,
    inverse_square,
)

__version__ = "1.0.0"


def harmonic_l2_preset(n_max: int = 8) -> ParameterSet:
    """Scales 1/(2n) on grids refined by m_n = 2n, l2 model."""
    return ParameterSet(
        alpha=harmonic(Fraction(1, 2)),
        m=linear_refinement(2),
        n_max=n_max,
        model="L2",
    )


def geometric_l1_preset(n_max: int = 12) -> ParameterSet:
    """Scales 1/2**(n+1) on grids refined by m_n = 2n, l1 model."""
    return ParameterSet(
        alpha=geometric(Fraction(1, 2), Fraction(1, 2)),
        m=linear_refinement(2),
        n_max=n_max,
        model="L1",
    )


def inverse_square_functional() -> Functional:
    """Coefficients (1/2, 1/4, 1/16, 1/36, ...): c_0 = 1/2, c_n = 1/(4 n^2)."""
    return Functional(
        alpha0=Fraction(1, 2), rule=inverse_square(Fraction(1, 4)), name="F1"
    )

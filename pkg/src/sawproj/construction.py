"""Sawtooth component functions and exact piecewise-linear projections.

The level-n component rises with slope 1 on the right half of each level-n
cell and vanishes on the left half, so it takes values in [0, 1/(2 M_n)) and
drops by exactly 1/(2 M_n) at every positive multiple of 1/M_n. Components
are represented right-continuously; the downward jumps are first-class data
because the measure and curve modules consume them directly.

A scalar projection truncated at level N,

    h(t) = c_0 * t + sum_{1 <= n <= N} c_n * f_n(t),

is affine on each of the 2 M_N half-cells of level N. Piece enumeration is
lazy and evaluates closed forms at cell endpoints; on the half-grid every
component value is an integer multiple of 1/(4 M_N), so the enumeration runs
on plain integers over a common denominator (an incremental mode using jump
corrections exists as an optimization and is gated by an equality test).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Optional

from .errors import BudgetExceeded, DomainError
from .params import ParameterSet
from .rational import sqrt_lower, sqrt_upper
from .sequences import Functional

DEFAULT_PIECE_BUDGET = 2**25


def sawtooth(t: Fraction) -> Fraction:
    """0 on the lower half of each unit period, then t - [t] - 1/2."""
    t = Fraction(t)
    if t < 0:
        raise DomainError(f"sawtooth argument {t} is negative")
    frac = t - (t.numerator // t.denominator)
    if 2 * frac < 1:
        return Fraction(0)
    return frac - Fraction(1, 2)


def component_value(params: ParameterSet, n: int, t: Fraction) -> Fraction:
    """f_n(t); f_0 is the identity, f_n scales the sawtooth to level n."""
    if not 0 <= t < 1:
        raise DomainError(f"t = {t} outside [0, 1)")
    return _component(params, n, t)


def _component(params: ParameterSet, n: int, t: Fraction) -> Fraction:
    # internal: accepts the closed right endpoint t = 1 (value 0 for n >= 1)
    if not 0 <= n <= params.n_max:
        raise DomainError(f"component index {n} outside [0, {params.n_max}]")
    if n == 0:
        return Fraction(t)
    size = params.grid_size(n)
    return sawtooth(size * Fraction(t)) / size


def _component_left_limit(params: ParameterSet, n: int, t: Fraction) -> Fraction:
    """lim_{u -> t-} f_n(u) for t in (0, 1]."""
    if not 0 < t <= 1:
        raise DomainError(f"t = {t} outside (0, 1]")
    if n == 0:
        return Fraction(t)
    size = params.grid_size(n)
    scaled = size * Fraction(t)
    if scaled.denominator == 1:
        return Fraction(1, 2 * size)
    return sawtooth(scaled) / size


def _components(params: ParameterSet, level: int, t: Fraction) -> tuple[Fraction, ...]:
    return tuple(_component(params, n, t) for n in range(level + 1))


@dataclass(frozen=True)
class TruncatedPoint:
    """Component values (f_0(t), ..., f_N(t)) plus model-norm tail bounds.

    There is no exact infinite point: a point is always a stated truncation
    level together with a certified bound on what was discarded.
    """

    level: int
    coords: tuple[Fraction, ...]
    model: str
    t: Fraction
    tail_l1_upper: Fraction
    tail_l2_enclosure: tuple[Fraction, Fraction]

    def embedded(self, params: ParameterSet) -> tuple[Fraction, ...]:
        """Coordinates scaled by the per-level weights alpha_n."""
        return tuple(
            params.alpha_term(n) * c for n, c in enumerate(self.coords)
        )

    def scaled(self, w: Fraction) -> "TruncatedPoint":
        return TruncatedPoint(
            self.level,
            tuple(w * c for c in self.coords),
            self.model,
            self.t,
            w * self.tail_l1_upper,
            (w * self.tail_l2_enclosure[0], w * self.tail_l2_enclosure[1]),
        )


def truncated_point(params: ParameterSet, level: int, t: Fraction) -> TruncatedPoint:
    if not 0 <= t < 1:
        raise DomainError(f"t = {t} outside [0, 1)")
    if not 0 <= level <= params.n_max:
        raise DomainError(f"level {level} outside [0, {params.n_max}]")
    t = Fraction(t)
    tail_sq = params.point_tail_l2sq_upper(level)
    if level < params.n_max:
        first = params.alpha.term(level + 1) / (2 * params.grid_size(level + 1))
        tail_sq_lower = first**2
    else:
        tail_sq_lower = Fraction(0)
    return TruncatedPoint(
        level=level,
        coords=_components(params, level, t),
        model=params.model,
        t=t,
        tail_l1_upper=params.point_tail_l1_upper(level),
        tail_l2_enclosure=(
            sqrt_lower(tail_sq_lower, params.sqrt_bits),
            sqrt_upper(tail_sq, params.sqrt_bits),
        ),
    )


def ensemble_evaluate(
    params: ParameterSet,
    weights: tuple[Fraction, ...],
    j: int,
    level: int,
    t: Fraction,
) -> TruncatedPoint:
    """Level-N point of the j-th scaled copy (weights must be 2**-1, 2**-2, ...)."""
    for i, w in enumerate(weights, start=1):
        if w != Fraction(1, 2**i):
            raise DomainError(f"weight {i} is {w}, expected 1/{2**i}")
    if not 1 <= j <= len(weights):
        raise DomainError(f"copy index {j} outside [1, {len(weights)}]")
    return truncated_point(params, level, t).scaled(weights[j - 1])


@dataclass(frozen=True)
class PLPiece:
    index: int
    left: Fraction
    length: Fraction
    left_value: Fraction
    slope: Fraction
    jump_at_left: Fraction  # h(left-) - h(left); 0 for the first piece


class PLFunction:
    """Exact piecewise-linear representation of a truncated projection."""

    def __init__(self, params: ParameterSet, functional: Functional, level: int):
        if not 0 <= level <= params.n_max:
            raise DomainError(f"level {level} outside [0, {params.n_max}]")
        self.params = params
        self.functional = functional
        self.level = level
        self.coeffs = functional.coeffs(level)
        self._kernel: Optional[tuple] = None

    @property
    def piece_count(self) -> int:
        return 2 * self.params.grid_size(self.level)

    def breakpoint(self, j: int) -> Fraction:
        return Fraction(j, self.piece_count)

    # -- exact evaluation ------------------------------------------------------

    def value(self, t: Fraction) -> Fraction:
        """Direct summation; the authoritative definition."""
        if not 0 <= t < 1:
            raise DomainError(f"t = {t} outside [0, 1)")
        return sum(
            (c * _component(self.params, n, t) for n, c in enumerate(self.coeffs)),
            Fraction(0),
        )

    def left_limit(self, t: Fraction) -> Fraction:
        return sum(
            (
                c * _component_left_limit(self.params, n, t)
                for n, c in enumerate(self.coeffs)
            ),
            Fraction(0),
        )

    def jump_at(self, t: Fraction) -> Fraction:
        """Downward jump h(t-) - h(t) at a breakpoint t in (0, 1]."""
        if not 0 < t <= 1:
            raise DomainError(f"t = {t} outside (0, 1]")
        total = Fraction(0)
        for n in range(1, self.level + 1):
            size = self.params.grid_size(n)
            if (size * Fraction(t)).denominator == 1:
                total += self.coeffs[n] / (2 * size)
        return total

    def value_by_piece(self, t: Fraction) -> Fraction:
        """Piece-table evaluation; must agree with value() exactly."""
        if not 0 <= t < 1:
            raise DomainError(f"t = {t} outside [0, 1)")
        denom, nums, _, _ = self.kernel()
        j = int(t * self.piece_count)
        v, w = nums(j)
        slope = Fraction((w - v) * self.piece_count, denom)
        return Fraction(v, denom) + slope * (t - self.breakpoint(j))

    # -- integer kernel ----------------------------------------------------------

    def kernel(self):
        """Common-denominator integer view of the piece table.

        Returns (denom, nums, slope_num, jump_num) where for piece j
        left value = nums(j)[0]/denom, right limit = nums(j)[1]/denom,
        slope = slope_num(j)/q_lcm, and the downward jump at breakpoint j
        is jump_num(j)/denom.
        """
        if self._kernel is None:
            size = self.params.grid_size(self.level)
            pieces = 2 * size
            q_lcm = 1
            for c in self.coeffs:
                q_lcm = q_lcm * c.denominator // gcd(q_lcm, c.denominator)
            a = [int(c * q_lcm) for c in self.coeffs]
            q_mods = [
                2 * size // self.params.grid_size(n) for n in range(self.level + 1)
            ]  # index 0 unused
            denom = 4 * size * q_lcm

            def nums(j: int) -> tuple[int, int]:
                v = 2 * a[0] * j
                s = a[0]
                for n in range(1, len(a)):
                    q = q_mods[n]
                    u = 2 * (j % q) - q
                    if u >= 0:
                        v += a[n] * u
                        s += a[n]
                return v, v + 2 * s

            def slope_num(j: int) -> int:
                s = a[0]
                for n in range(1, len(a)):
                    q = q_mods[n]
                    if 2 * (j % q) >= q:
                        s += a[n]
                return s

            def jump_num(j: int) -> int:
                if j == 0:
                    return 0
                total = 0
                for n in range(1, len(a)):
                    q = q_mods[n]
                    if j % q == 0:
                        total += a[n] * q
                return total

            self._kernel = (denom, nums, slope_num, jump_num, q_lcm, pieces)
        denom, nums, slope_num, jump_num, q_lcm, pieces = self._kernel
        return denom, nums, slope_num, jump_num

    def piece_value_ints(
        self, start: int = 0, stop: Optional[int] = None, mode: str = "direct"
    ) -> Iterator[tuple[int, int]]:
        """(left value, right limit) integer numerators for pieces [start, stop).

        mode "direct" evaluates each piece from the closed form; "incremental"
        carries the previous right limit across the jump at each breakpoint.
        Both must produce identical streams.
        """
        denom, nums, slope_num, jump_num = self.kernel()
        if stop is None:
            stop = self.piece_count
        if mode == "direct":
            for j in range(start, stop):
                yield nums(j)
        elif mode == "incremental":
            if start >= stop:
                return
            v, w = nums(start)
            yield v, w
            for j in range(start + 1, stop):
                v = w - jump_num(j)
                w = v + 2 * slope_num(j)
                yield v, w
        else:
            raise DomainError(f"unknown piece mode {mode!r}")

    def pieces(self, mode: str = "direct") -> Iterator[PLPiece]:
        denom, nums, slope_num, jump_num = self.kernel()
        width = Fraction(1, self.piece_count)
        for j, (v, w) in enumerate(self.piece_value_ints(mode=mode)):
            yield PLPiece(
                index=j,
                left=self.breakpoint(j),
                length=width,
                left_value=Fraction(v, denom),
                slope=Fraction((w - v) * self.piece_count, denom),
                jump_at_left=Fraction(jump_num(j), denom),
            )

    def sup_change_bound(self, level_from: int, level_to: int) -> Fraction:
        """sup_t |h_{level_to}(t) - h_{level_from}(t)| <= this, exactly."""
        return sum(
            (
                abs(self.functional.coeff(n)) / (2 * self.params.grid_size(n))
                for n in range(level_from + 1, level_to + 1)
            ),
            Fraction(0),
        )


def build_pl(
    params: ParameterSet,
    functional: Functional,
    level: int,
    piece_budget: int = DEFAULT_PIECE_BUDGET,
) -> PLFunction:
    """Piecewise-linear form of the level-N truncated projection.

    The functional must carry a certified l1 tail so downstream measure
    brackets are available; the piece count 2 M_N is checked against the
    budget before any enumeration happens.
    """
    functional.abs_tail_upper(level)  # raises CertificationError if absent
    pieces = 2 * params.grid_size(level)
    if pieces > piece_budget:
        raise BudgetExceeded("pieces", pieces, piece_budget)
    return PLFunction(params, functional, level)

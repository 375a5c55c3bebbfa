"""Polygonal approximations of the rectifiable companion set in l1 coordinates.

The level-N polygon follows the truncated coordinates over each level-N cell
with two non-vertical segments (the highest component switches slope at the
cell midpoint), then drops along a vertical connector at the right endpoint
where the sawtooth components jump. The final connector at t = 1 is included,
so the polygon terminates at the closed right endpoint.

l1 length is total variation per coordinate, which gives closed forms: each
coordinate n >= 1 rises 1/2 across slants and falls 1/2 across connectors, so
level n adds exactly |c_n| of length. A canonical common parametrization
reserves an s-interval at every level-N grid endpoint for the connectors and
is affine elsewhere; with it the supremum distance between consecutive levels
is |c_N| / (2 M_N), attained where a connector starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .construction import _component, _component_left_limit
from .errors import BudgetExceeded, CertificationError, DomainError
from .params import L1, ParameterSet
from .sequences import Functional

DEFAULT_VERTEX_BUDGET = 2**22


@dataclass(frozen=True)
class Vertex:
    t: Fraction
    coords: tuple[Fraction, ...]


@dataclass(frozen=True)
class PolygonalCurve:
    params: ParameterSet
    functional: Functional
    level: int
    vertices: tuple[Vertex, ...]
    vertical: tuple[bool, ...]  # per segment; vertical = coordinate 0 constant

    @property
    def segment_count(self) -> int:
        return len(self.vertices) - 1


def _point(
    params: ParameterSet, functional: Functional, level: int, t: Fraction
) -> tuple[Fraction, ...]:
    coords = [functional.alpha0 * Fraction(t)]
    for n in range(1, level + 1):
        coords.append(functional.coeff(n) * _component(params, n, t))
    return tuple(coords)


def _point_left_limit(
    params: ParameterSet, functional: Functional, level: int, t: Fraction
) -> tuple[Fraction, ...]:
    coords = [functional.alpha0 * Fraction(t)]
    for n in range(1, level + 1):
        coords.append(functional.coeff(n) * _component_left_limit(params, n, t))
    return tuple(coords)


def _require_l1_contraction(params: ParameterSet, functional: Functional) -> None:
    if params.model != L1:
        raise DomainError("polygonal curves are built in the L1 model")
    enc = functional.rule.l1_tail_enclosure(params.n_max)
    if enc is None:
        raise CertificationError(
            "curve functional needs a certified l1 tail to state sum |c_n| < 1"
        )
    total = functional.rule.l1_partial(params.n_max) + enc[1]
    if total >= 1:
        raise DomainError(f"sum of |c_n| certified only as <= {total}, need < 1")


def build_curve(
    params: ParameterSet,
    functional: Functional,
    level: int,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
) -> PolygonalCurve:
    """Materialize the level-N polygon (3 M_N + 1 vertices)."""
    _require_l1_contraction(params, functional)
    if not 0 <= level <= params.n_max:
        raise DomainError(f"level {level} outside [0, {params.n_max}]")
    size = params.grid_size(level)
    count = 3 * size + 1
    if count > vertex_budget:
        raise BudgetExceeded("vertices", count, vertex_budget)

    verts: list[Vertex] = [Vertex(Fraction(0), _point(params, functional, level, Fraction(0)))]
    vertical: list[bool] = []
    for j in range(size):
        mid = Fraction(2 * j + 1, 2 * size)
        right = Fraction(j + 1, size)
        verts.append(Vertex(mid, _point(params, functional, level, mid)))
        verts.append(Vertex(right, _point_left_limit(params, functional, level, right)))
        verts.append(Vertex(right, _point(params, functional, level, right)))
        vertical.extend((False, False, True))
    return PolygonalCurve(params, functional, level, tuple(verts), tuple(vertical))


def curve_length(curve: PolygonalCurve) -> Fraction:
    """Exact l1 length: per-coordinate total variation summed over segments."""
    total = Fraction(0)
    for a, b in zip(curve.vertices, curve.vertices[1:]):
        total += sum(
            (abs(cb - ca) for ca, cb in zip(a.coords, b.coords)), Fraction(0)
        )
    return total


def curve_length_closed_form(
    params: ParameterSet, functional: Functional, level: int
) -> Fraction:
    """|c_0| + sum_{n <= N} |c_n|; equals curve_length(build_curve(...)) exactly."""
    return abs(functional.alpha0) + sum(
        (abs(functional.coeff(n)) for n in range(1, level + 1)), Fraction(0)
    )


def length_increment(
    params: ParameterSet, functional: Functional, n: int
) -> Fraction:
    """length(level n) - length(level n-1), in closed form.

    Coordinate n contributes |c_n|/2 across slants and |c_n|/2 across the
    connectors, independent of the grid, so the increment is exactly |c_n|
    (within the contractual ceiling of (3/2)|c_n|).
    """
    if not 1 <= n <= params.n_max:
        raise DomainError(f"level {n} outside [1, {params.n_max}]")
    increment = abs(functional.coeff(n))
    assert increment <= Fraction(3, 2) * abs(functional.coeff(n))
    return increment


def length_difference(higher: PolygonalCurve, lower: PolygonalCurve) -> Fraction:
    """Exact length difference of two materialized curves at consecutive levels."""
    _require_same_family(higher, lower)
    return curve_length(higher) - curve_length(lower)


def _require_same_family(higher: PolygonalCurve, lower: PolygonalCurve) -> None:
    if higher.params != lower.params or higher.functional != lower.functional:
        raise DomainError("curves were built with different parameters")
    if higher.level != lower.level + 1:
        raise DomainError(
            f"levels must be consecutive, got {higher.level} and {lower.level}"
        )


def point_on_curve(curve: PolygonalCurve, t: Fraction) -> bool:
    """Exact test that the truncated point over t lies on the polygon."""
    if not 0 <= t < 1:
        raise DomainError(f"t = {t} outside [0, 1)")
    size = curve.params.grid_size(curve.level)
    j = int(t * size)
    lo = Fraction(j, size)
    mid = Fraction(2 * j + 1, 2 * size)
    if t < mid:
        a, b = curve.vertices[3 * j], curve.vertices[3 * j + 1]
        t_a, t_b = lo, mid
    else:
        a, b = curve.vertices[3 * j + 1], curve.vertices[3 * j + 2]
        t_a, t_b = mid, Fraction(j + 1, size)
    theta = (Fraction(t) - t_a) / (t_b - t_a)
    expected = _point(curve.params, curve.functional, curve.level, Fraction(t))
    actual = tuple(
        ca + theta * (cb - ca) for ca, cb in zip(a.coords, b.coords)
    )
    return actual == expected


# -- canonical common parametrization ---------------------------------------------


@dataclass(frozen=True)
class CanonicalTau:
    """Nondecreasing PL surjection of [0, 1] with a constant interval at
    every level-N grid endpoint and affine pieces in between.

    Layout in s: [K_0][G_1][K_1]...[G_M][K_M] where K_i (length const_len)
    sits at endpoint i/M and G_i (length gap_len) maps onto the i-th cell.
    """

    grid_size: int
    const_len: Fraction
    gap_len: Fraction

    def value(self, s: Fraction) -> Fraction:
        s = Fraction(s)
        if not 0 <= s <= 1:
            raise DomainError(f"s = {s} outside [0, 1]")
        kind, i, frac = self.locate(s)
        if kind == "const":
            return Fraction(i, self.grid_size)
        return Fraction(i - 1, self.grid_size) + frac / self.grid_size

    def locate(self, s: Fraction) -> tuple[str, int, Fraction]:
        """("const", endpoint index, u in [0,1]) or ("gap", cell index, frac)."""
        s = Fraction(s)
        if s <= self.const_len:
            return "const", 0, s / self.const_len
        block = self.gap_len + self.const_len
        u = s - self.const_len
        i = min(int(u / block) + 1, self.grid_size)
        off = u - (i - 1) * block
        if off <= self.gap_len:
            return "gap", i, off / self.gap_len
        return "const", i, (off - self.gap_len) / self.const_len

    def segment_starts(self) -> Iterator[Fraction]:
        """s-breakpoints: every constant-interval and gap boundary, then 1."""
        block = self.gap_len + self.const_len
        yield Fraction(0)
        for i in range(1, self.grid_size + 1):
            g_lo = self.const_len + (i - 1) * block
            yield g_lo
            yield g_lo + self.gap_len
        yield Fraction(1)

    def covers_level(self, grid_size: int) -> bool:
        return self.grid_size % grid_size == 0


def canonical_tau(params: ParameterSet, level: int) -> CanonicalTau:
    size = params.grid_size(level)
    endpoints = size + 1
    const_len = Fraction(1, 4 * size * endpoints)
    gap_len = (1 - endpoints * const_len) / size
    return CanonicalTau(size, const_len, gap_len)


def validate_tau(tau: CanonicalTau, params: ParameterSet, level: int) -> None:
    if tau.const_len <= 0 or tau.gap_len <= 0:
        raise DomainError("tau must be nondecreasing with nondegenerate pieces")
    total = (tau.grid_size + 1) * tau.const_len + tau.grid_size * tau.gap_len
    if total != 1:
        raise DomainError("tau does not parametrize the full interval")
    if not tau.covers_level(params.grid_size(level)):
        raise DomainError(
            "tau constant intervals do not cover the grid endpoints of this level"
        )


@dataclass(frozen=True)
class CurveEvaluator:
    """Exact evaluator s |-> curve point under a shared parametrization.

    Constant tau-intervals traverse the vertical connector at their endpoint
    linearly (a degenerate connector yields a constant point); affine pieces
    follow the truncated coordinates, approaching each endpoint through its
    left limit so the path is continuous.
    """

    params: ParameterSet
    functional: Functional
    level: int
    tau: CanonicalTau

    def value(self, s: Fraction) -> tuple[Fraction, ...]:
        kind, i, frac = self.tau.locate(s)
        grid = self.tau.grid_size
        if kind == "const":
            e = Fraction(i, grid)
            if e == 0:
                return _point(self.params, self.functional, self.level, Fraction(0))
            start = _point_left_limit(self.params, self.functional, self.level, e)
            end = _point(self.params, self.functional, self.level, e)
            return tuple(a + frac * (b - a) for a, b in zip(start, end))
        t = Fraction(i - 1, grid) + frac / grid
        if frac == 1:
            return _point_left_limit(self.params, self.functional, self.level, t)
        return _point(self.params, self.functional, self.level, t)


def parametrize(curve: PolygonalCurve, tau: Optional[CanonicalTau] = None) -> CurveEvaluator:
    if tau is None:
        tau = canonical_tau(curve.params, curve.level)
    validate_tau(tau, curve.params, curve.level)
    return CurveEvaluator(curve.params, curve.functional, curve.level, tau)


def _l1_distance(a: tuple[Fraction, ...], b: tuple[Fraction, ...]) -> Fraction:
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    total = sum(
        (abs(x - y) for x, y in zip(short, long_)), Fraction(0)
    )
    total += sum((abs(x) for x in long_[len(short):]), Fraction(0))
    return total


def sup_distance(
    higher: PolygonalCurve, lower: PolygonalCurve, tau: Optional[CanonicalTau] = None
) -> Fraction:
    """Exact sup-norm distance of consecutive-level curves under a common tau.

    Both curves are affine between consecutive refinement breakpoints (tau
    segment boundaries plus the cell midpoints of the higher level), and the
    l1 norm of an affine path is convex, so the supremum is attained at a
    refinement breakpoint.
    """
    _require_same_family(higher, lower)
    if tau is None:
        tau = canonical_tau(higher.params, higher.level)
    validate_tau(tau, higher.params, higher.level)
    validate_tau(tau, lower.params, lower.level)
    ev_hi = CurveEvaluator(higher.params, higher.functional, higher.level, tau)
    ev_lo = CurveEvaluator(lower.params, lower.functional, lower.level, tau)

    best = Fraction(0)
    block = tau.gap_len + tau.const_len
    for i in range(1, tau.grid_size + 1):
        g_lo = tau.const_len + (i - 1) * block
        for s in (g_lo, g_lo + tau.gap_len / 2, g_lo + tau.gap_len, g_lo + block):
            d = _l1_distance(ev_hi.value(s), ev_lo.value(s))
            if d > best:
                best = d
    d = _l1_distance(ev_hi.value(Fraction(0)), ev_lo.value(Fraction(0)))
    return max(best, d)


def sup_distance_bound(
    params: ParameterSet, functional: Functional, n: int
) -> Fraction:
    """Exact sup distance between levels n and n-1 under the canonical tau.

    Away from connectors the curves differ only in coordinate n, by
    |c_n| f_n(t) < |c_n|/(2 M_n); the bound is attained at each connector
    start, where coordinate n holds its left limit 1/(2 M_n).
    """
    if not 1 <= n <= params.n_max:
        raise DomainError(f"level {n} outside [1, {params.n_max}]")
    return abs(functional.coeff(n)) / (2 * params.grid_size(n))

"""Quantitative diagnostics: refinement events, secant witnesses, the slope
translation identity, and chord-based projection witnesses.

The level-n refinement event marks parameters living in the first or last
alpha_n * m_n level-n subcells of their level-(n-1) cell, i.e. within
alpha_n / M_{n-1} of the coarse grid. Its measure is exactly 2 alpha_n, and
because membership depends only on the level-n refinement digit, events at
distinct levels intersect with exactly multiplicative measure.

Secant witnesses work at the fine scale instead: an eligible parameter sits
within alpha_n / M_n of a level-n grid point beta that lies on no coarser
grid. Stepping just across beta changes component n by at least
(1/2 - alpha_n)/M_n while every other truncated coordinate moves by at most
the parameter displacement, so the squared component-n share of the squared
displacement norm is bounded below by 1/(64 Kbar^2) once alpha_n <= 1/8
(Kbar^2 the upper enclosure of the unit-box norm bound).

All sampling uses a named, seeded generator and is reproducible bit for bit;
sample streams are partitioned deterministically by chunk so reductions do
not depend on worker scheduling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .construction import _component, _components
from .curve import CurveEvaluator, _l1_distance
from .errors import BudgetExceeded, DomainError
from .measure import IntervalUnion
from .params import L2, GridCell, ParameterSet

GENERATOR_NAME = "mt19937-getrandbits"


# -- seeded rational sampling -------------------------------------------------------


def spawn_rng(seed: int, chunk: int = 0) -> random.Random:
    """Deterministic child generator for a chunked sample stream."""
    return random.Random(seed * 1000003 + chunk)


def rand_fraction(rng: random.Random, bits: int = 48) -> Fraction:
    """Uniform dyadic rational in [0, 1)."""
    return Fraction(rng.getrandbits(bits), 1 << bits)


def rand_index(rng: random.Random, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi] via getrandbits rejection (platform-stable)."""
    span = hi - lo + 1
    bits = span.bit_length()
    while True:
        v = rng.getrandbits(bits)
        if v < span:
            return lo + v


# -- refinement events ---------------------------------------------------------------


@dataclass(frozen=True)
class EventSet:
    level: int
    cells: IntervalUnion

    @property
    def measure(self) -> Fraction:
        return self.cells.measure


def event_set(params: ParameterSet, n: int) -> EventSet:
    """The level-n refinement event as an exact interval union."""
    if not 1 <= n <= params.n_max:
        raise DomainError(f"level {n} outside [1, {params.n_max}]")
    alpha = params.alpha_term(n)
    if 2 * alpha > 1:
        raise DomainError(f"2 alpha_{n} = {2 * alpha} exceeds 1")
    coarse = params.grid_size(n - 1)
    radius = alpha / coarse
    items = []
    for k in range(coarse + 1):
        center = Fraction(k, coarse)
        items.append((max(Fraction(0), center - radius), min(Fraction(1), center + radius)))
    return EventSet(n, IntervalUnion.from_intervals(items))


def event_contains(params: ParameterSet, n: int, t: Fraction) -> bool:
    """Membership in the level-n event without materializing the union."""
    if not 0 <= t < 1:
        raise DomainError(f"t = {t} outside [0, 1)")
    alpha = params.alpha_term(n)
    scaled = Fraction(t) * params.grid_size(n - 1)
    frac = scaled - (scaled.numerator // scaled.denominator)
    return frac <= alpha or frac >= 1 - alpha


@dataclass(frozen=True)
class IndependenceResult:
    levels: tuple[int, ...]
    measure: Fraction
    expected: Fraction
    component_count: int

    @property
    def multiplicative(self) -> bool:
        return self.measure == self.expected


def independence_check(
    params: ParameterSet,
    levels: Sequence[int],
    *,
    component_budget: int = 2**20,
) -> IndependenceResult:
    """Exact measure of the intersection of events at distinct levels.

    The contract is exact multiplicativity: measure = prod 2 alpha_n.
    """
    levels = tuple(sorted(set(levels)))
    if not 1 <= len(levels) <= 4:
        raise DomainError("between one and four levels are supported")
    expected = Fraction(1)
    current: Optional[IntervalUnion] = None
    for n in levels:
        ev = event_set(params, n)
        expected *= 2 * params.alpha_term(n)
        current = ev.cells if current is None else current.intersect(ev.cells)
        if current.component_count > component_budget:
            raise BudgetExceeded(
                "intersection components", current.component_count, component_budget
            )
    assert current is not None
    return IndependenceResult(levels, current.measure, expected, current.component_count)


@dataclass(frozen=True)
class UnionSampleReport:
    levels: tuple[int, ...]
    samples: int
    seed: int
    generator: str
    hits: int
    expected_probability: Fraction

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.hits, self.samples)

    def within_sigmas(self, k: int) -> bool:
        """|observed - p| <= k * sqrt(p(1-p)/samples), compared on squares."""
        p = self.expected_probability
        dev = self.fraction - p
        return dev**2 * self.samples <= k**2 * p * (1 - p)


def sample_event_union(
    params: ParameterSet,
    levels: Sequence[int],
    samples: int,
    seed: int,
    *,
    chunks: int = 8,
) -> UnionSampleReport:
    """Seeded hit fraction for "t belongs to at least one level event".

    With exact independence the union probability is 1 - prod(1 - 2 alpha_n);
    the sampled fraction is binomial around it.
    """
    levels = tuple(sorted(set(levels)))
    expected = Fraction(1)
    for n in levels:
        expected *= 1 - 2 * params.alpha_term(n)
    expected = 1 - expected

    per = [samples // chunks] * chunks
    per[-1] += samples - sum(per)
    hits = 0
    for chunk, count in enumerate(per):
        rng = spawn_rng(seed, chunk)
        for _ in range(count):
            t = rand_fraction(rng)
            if any(event_contains(params, n, t) for n in levels):
                hits += 1
    return UnionSampleReport(
        levels, samples, seed, GENERATOR_NAME, hits, expected
    )


# -- secant witnesses ------------------------------------------------------------------


@dataclass(frozen=True)
class SecantWitness:
    n: int
    t0: Fraction
    tn: Fraction
    delta: tuple[Fraction, ...]  # embedded coordinate differences up to n_max
    norm_sq_upper: Fraction  # truncated squared norm plus certified tail
    ratio_sq: Fraction
    threshold: Fraction

    @property
    def passed(self) -> bool:
        return self.ratio_sq >= self.threshold


def secant_threshold(params: ParameterSet) -> Fraction:
    """1 / (64 Kbar^2) with Kbar^2 the upper norm-bound enclosure."""
    return 1 / (64 * params.box_norm_sq_enclosure()[1])


def secant_witness(
    params: ParameterSet, t0: Fraction, n: int
) -> Optional[SecantWitness]:
    """Deterministic cross-boundary witness at level n, or None if ineligible.

    Eligibility: t0 within alpha_n / M_n of its nearest level-n grid point
    beta, with beta on no coarser grid (equivalently the grid index of beta
    is not divisible by m_n). The partner parameter is beta itself when
    t0 < beta, else beta - alpha_n / M_n.
    """
    if params.model != L2:
        raise DomainError("secant witnesses are an L2-model diagnostic")
    if not 0 <= t0 < 1:
        raise DomainError(f"t0 = {t0} outside [0, 1)")
    if not 1 <= n <= params.n_max:
        raise DomainError(f"level {n} outside [1, {params.n_max}]")
    t0 = Fraction(t0)
    alpha_n = params.alpha_term(n)
    if alpha_n == 0:
        return None
    size = params.grid_size(n)
    scaled = t0 * size
    k = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    beta = Fraction(k, size)
    if abs(t0 - beta) > alpha_n / size:
        return None
    if k % params.refinement_factor(n) == 0:
        return None  # beta lies on a coarser grid

    tn = beta if t0 < beta else beta - alpha_n / size

    level = params.n_max
    c0 = _components(params, level, t0)
    cn = _components(params, level, tn)
    delta = tuple(
        params.alpha_term(k_) * (cn[k_] - c0[k_]) for k_ in range(level + 1)
    )
    # discarded levels k > n_max differ by at most 1/(2 M_k) per coordinate
    norm_sq = sum((d * d for d in delta), Fraction(0))
    norm_sq_upper = norm_sq + params.point_tail_l2sq_upper(level)
    gap = params.alpha_term(n) * abs(cn[n] - c0[n])
    return SecantWitness(
        n=n,
        t0=t0,
        tn=tn,
        delta=delta,
        norm_sq_upper=norm_sq_upper,
        ratio_sq=gap**2 / norm_sq_upper,
        threshold=secant_threshold(params),
    )


def sample_secant_witnesses(
    params: ParameterSet, n: int, samples: int, seed: int
) -> tuple[int, int]:
    """(passed, total) over seeded eligible parameters near level-n boundaries."""
    rng = spawn_rng(seed, n)
    size = params.grid_size(n)
    m_n = params.refinement_factor(n)
    alpha_n = params.alpha_term(n)
    passed = total = 0
    while total < samples:
        k = rand_index(rng, 1, size - 1)
        if k % m_n == 0:
            continue
        offset = rand_fraction(rng) * alpha_n / size
        t0 = Fraction(k, size) + (offset if rng.getrandbits(1) else -offset)
        w = secant_witness(params, t0, n)
        if w is None:
            continue
        total += 1
        if w.passed:
            passed += 1
    return passed, total


# -- slope translation identity ----------------------------------------------------------


@dataclass(frozen=True)
class SlopeIdentityReport:
    n: int
    t: Fraction
    t_shifted: Fraction
    h: Fraction
    equal_levels: tuple[int, ...]
    toggled_sides: tuple[Fraction, Fraction]

    @property
    def passed(self) -> bool:
        return True  # constructed only when every check held


def slope_identity_check(
    params: ParameterSet,
    n: int,
    cell: GridCell,
    t: Fraction,
    h: Fraction,
) -> SlopeIdentityReport:
    """Verify the half-period translation identity inside one level-n cell.

    With t' = t +- 1/(2 M_n) and all four parameters in the cell, every
    component m != n satisfies f_m(t'+h) - f_m(t') = f_m(t+h) - f_m(t)
    exactly (affine below level n, half-period periodic above), while at
    m = n one side is 0 and the other is h.
    """
    if cell.level != n:
        raise DomainError("cell level must match the checked level")
    t, h = Fraction(t), Fraction(h)
    size = params.grid_size(n)
    half = Fraction(1, 2 * size)
    lo, hi = cell.interval()
    t_shifted = t + half if t + half < hi else t - half
    points = {"t": t, "t'": t_shifted, "t+h": t + h, "t'+h": t_shifted + h}
    for name, p in points.items():
        if not lo <= p < hi:
            raise DomainError(f"{name} = {p} outside the cell [{lo}, {hi})")

    equal_levels = []
    toggled: Optional[tuple[Fraction, Fraction]] = None
    for m in range(params.n_max + 1):
        lhs = _component(params, m, t_shifted + h) - _component(params, m, t_shifted)
        rhs = _component(params, m, t + h) - _component(params, m, t)
        if m == n and h != 0:
            if not ((lhs == 0 and rhs == h) or (rhs == 0 and lhs == h)):
                raise DomainError(
                    f"level-{n} sides expected {{0, {h}}}, got {lhs} and {rhs}"
                )
            toggled = (lhs, rhs)
        else:
            if lhs != rhs:
                raise DomainError(
                    f"component {m} translation identity fails: {lhs} != {rhs}"
                )
            if m != n:
                equal_levels.append(m)
    if toggled is None:
        toggled = (Fraction(0), Fraction(0))
    return SlopeIdentityReport(n, t, t_shifted, h, tuple(equal_levels), toggled)


def sample_slope_identities(
    params: ParameterSet, samples: int, seed: int, *, max_level: Optional[int] = None
) -> int:
    """Run the identity on seeded admissible tuples; returns the pass count.

    Tuples are made admissible by construction: t in the first quarter of a
    cell (shift goes right) or the last quarter (shift goes left), and
    |h| < 1/(4 M_n) pointing inward.
    """
    max_level = max_level or min(5, params.n_max - 1)
    passed = 0
    rng = spawn_rng(seed)
    for _ in range(samples):
        n = rand_index(rng, 1, max_level)
        size = params.grid_size(n)
        idx = rand_index(rng, 1, size)
        cell = GridCell(n, idx, size)
        lo, _ = cell.interval()
        quarter = Fraction(1, 4 * size)
        u = rand_fraction(rng) * quarter
        v = rand_fraction(rng) * quarter
        if rng.getrandbits(1):
            t = lo + u  # first quarter, shift right, h >= 0
            h = v
        else:
            t = lo + 2 * quarter + u  # third quarter, shift left, h >= 0
            h = v
        report = slope_identity_check(params, n, cell, t, h)
        passed += report.passed
    return passed


# -- chord projection witnesses ------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionWitness:
    s1: Fraction
    s2: Fraction
    chord_norm: Fraction
    gap_measure: Fraction
    bound: Fraction  # positive value certifies a positive projection measure

    @property
    def positive(self) -> bool:
        return self.bound > 0


def projection_witness(
    evaluator: CurveEvaluator,
    a: IntervalUnion,
    weights: Sequence[Fraction],
    lipschitz: Fraction,
) -> Optional[ProjectionWitness]:
    """Search component endpoints of A for a chord certifying |x*(curve(A))| > 0.

    A pair (s1, s2) qualifies when A fills at least (1 - 1/(2 L^2)) of
    [s1, s2] and the functional sees more than half the chord's l1 norm; the
    certified lower bound is then ||chord||/2 - L * |[s1, s2] \\ A|. Only
    endpoint pairs are searched, which suffices on interval unions.
    """
    weights = tuple(Fraction(w) for w in weights)
    if max((abs(w) for w in weights), default=Fraction(0)) > 1:
        raise DomainError("functional weights must lie in the unit dual ball")
    if lipschitz < 1:
        raise DomainError("a bi-Lipschitz enclosure is at least 1")
    if not a.intervals:
        return None
    if a.intervals[0][0] < 0 or a.intervals[-1][1] > 1:
        raise DomainError("A must be a subset of [0, 1]")

    endpoints: list[Fraction] = []
    for lo, hi in a.intervals:
        endpoints.append(lo)
        endpoints.append(hi)
    density = 1 - Fraction(1, 2 * lipschitz**2)

    best: Optional[ProjectionWitness] = None
    for i, s1 in enumerate(endpoints):
        for s2 in endpoints[i + 1:]:
            if s2 <= s1:
                continue
            span = s2 - s1
            inside = a.intersect(
                IntervalUnion.from_intervals([(s1, s2)])
            ).measure
            if inside < density * span:
                continue
            p1 = evaluator.value(s1)
            p2 = evaluator.value(s2)
            chord = tuple(y - x for x, y in zip(p1, p2))
            chord_norm = sum((abs(c) for c in chord), Fraction(0))
            seen = abs(
                sum((w * c for w, c in zip(weights, chord)), Fraction(0))
            )
            if 2 * seen <= chord_norm:
                continue
            bound = chord_norm / 2 - lipschitz * (span - inside)
            if best is None or bound > best.bound:
                best = ProjectionWitness(s1, s2, chord_norm, span - inside, bound)
    return best


def curve_lipschitz_upper(evaluator: CurveEvaluator) -> Fraction:
    """Max segment speed of the parametrized polygon (an upper Lipschitz bound)."""
    tau = evaluator.tau
    block = tau.gap_len + tau.const_len
    best = Fraction(0)
    prev_s: Optional[Fraction] = None
    prev_p: Optional[tuple[Fraction, ...]] = None
    ss: list[Fraction] = [Fraction(0), tau.const_len]
    for i in range(1, tau.grid_size + 1):
        g_lo = tau.const_len + (i - 1) * block
        ss.extend((g_lo + tau.gap_len / 2, g_lo + tau.gap_len, g_lo + block))
    for s in ss:
        p = evaluator.value(s)
        if prev_s is not None and s > prev_s:
            speed = _l1_distance(p, prev_p) / (s - prev_s)
            if speed > best:
                best = speed
        prev_s, prev_p = s, p
    return best

"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one PASS line after its assertions; run with -v (or -s) to
see the per-criterion report. Stated runtime ceilings are asserted on the
wall time of the core computation.
"""

import time
from fractions import Fraction
from pathlib import Path

import pytest

import sawproj as sp
from sawproj.cli import circle_directions, main
from sawproj.diagnostics import (
    rand_fraction,
    rand_index,
    sample_secant_witnesses,
    sample_slope_identities,
    secant_threshold,
    spawn_rng,
)

from oracles import pl_image_oracle

F = Fraction


@pytest.fixture(scope="module")
def stopwatch():
    def run(fn):
        start = time.monotonic()
        result = fn()
        return result, time.monotonic() - start

    return run


def test_c01_parameter_certificate(d1, stopwatch):
    (report, enclosure), elapsed = stopwatch(
        lambda: (sp.validate(d1), d1.box_norm_sq_enclosure())
    )
    lo, hi = enclosure
    assert report.passed
    assert F(141, 100) < lo <= hi < F(142, 100)
    assert hi - lo <= F(1, 100)
    assert hi < 4  # the unit-box norm bound stays below 2
    assert elapsed < 1.0
    print(f"[criterion 1] PASS norm-bound^2 in [{float(lo):.6f}, {float(hi):.6f}], {elapsed:.3f}s")


def test_c02_event_measures_and_products(d1, stopwatch):
    def run():
        singles = {n: sp.event_set(d1, n).measure for n in range(1, 7)}
        pairs = {
            (i, j): sp.independence_check(d1, (i, j)).measure
            for i in range(2, 7)
            for j in range(i + 1, 7)
        }
        return singles, pairs

    (singles, pairs), elapsed = stopwatch(run)
    for n in range(1, 7):
        assert singles[n] == F(1, n)
    for (i, j), measure in pairs.items():
        assert measure == F(1, i * j)
    assert elapsed < 60.0
    print(f"[criterion 2] PASS 6 event measures and {len(pairs)} products exact, {elapsed:.2f}s")


def test_c03_projection_bracket(d1, f1, stopwatch):
    bracket, elapsed = stopwatch(lambda: sp.projection_bracket(d1, f1, 6))
    assert bracket.mu_levels[1] == F(9, 16)
    assert len(bracket.chain) == 6
    for link in bracket.chain:
        assert link.delta_mu <= link.bound
    assert bracket.lower > 0
    assert bracket.piece_count == 2 * d1.grid_size(6)
    assert elapsed < 300.0
    print(
        f"[criterion 3] PASS mu_1 = 9/16, chain exact, "
        f"bracket lower = {float(bracket.lower):.4f} > 0, {elapsed:.2f}s"
    )


def test_c04_direction_scan(d1, f1, stopwatch):
    directions = circle_directions(64)

    def run():
        return [sp.directional_measure(d1, f1, d, 6) for d in directions]

    brackets, elapsed = stopwatch(run)
    assert len(brackets) == 64
    assert all(b.mu > 0 for b in brackets)
    positive_lower = sum(1 for b in brackets if b.lower > 0)
    assert positive_lower >= 60
    assert elapsed < 1800.0
    print(
        f"[criterion 4] PASS 64/64 exact positive, {positive_lower}/64 bracket-positive, "
        f"{elapsed:.1f}s"
    )


def test_c05_curve_ledger(d2, r1, stopwatch):
    def run():
        curves = {n: sp.build_curve(d2, r1, n) for n in range(5)}
        return curves

    curves, elapsed = stopwatch(run)
    assert sp.curve_length(curves[1]) == F(5, 4)
    for n in range(1, 11):
        increment = sp.length_increment(d2, r1, n)
        assert increment <= F(3, 2) * abs(r1.coeff(n))
        assert sp.sup_distance_bound(d2, r1, n) <= F(3, 2) * abs(r1.coeff(n))
    # closed forms agree with fully materialized curves at small levels
    for n in range(1, 5):
        assert sp.length_difference(curves[n], curves[n - 1]) == sp.length_increment(d2, r1, n)
    for n in range(1, 4):
        assert sp.sup_distance(curves[n], curves[n - 1]) == sp.sup_distance_bound(d2, r1, n)
    assert elapsed < 60.0
    print(f"[criterion 5] PASS ledger exact for n = 1..10, length(level 1) = 5/4, {elapsed:.2f}s")


def test_c06_oscillation_and_covering_sums(d1, stopwatch):
    def run():
        rng = spawn_rng(60606)
        for _ in range(10_000):
            n = rand_index(rng, 0, 6)
            size = d1.grid_size(n)
            lo = F(rand_index(rng, 1, size) - 1, size)
            width = F(1, size)
            t = lo + rand_fraction(rng) * width
            u = lo + rand_fraction(rng) * width
            for k in range(9):
                if abs(sp.component_value(d1, k, t) - sp.component_value(d1, k, u)) > width:
                    return False, None
        reports = [sp.hausdorff_upper(d1, 8, n) for n in range(5)]
        return True, reports

    (oscillation_ok, reports), elapsed = stopwatch(run)
    assert oscillation_ok
    for report in reports:
        assert report.within_norm_bound
    print(
        f"[criterion 6] PASS 10^4 oscillation pairs exact, covering sums <= "
        f"{float(reports[0].norm_bound_upper):.4f} for levels 0..4, {elapsed:.1f}s"
    )


def test_c07_slope_identities(d1, stopwatch):
    passed, elapsed = stopwatch(lambda: sample_slope_identities(d1, 1000, 70707))
    assert passed == 1000
    assert elapsed < 10.0
    print(f"[criterion 7] PASS 1000/1000 translation identities exact, {elapsed:.2f}s")


def test_c08_secant_witnesses(d1, stopwatch):
    def run():
        return {n: sample_secant_witnesses(d1, n, 500, 80808) for n in range(4, 8)}

    results, elapsed = stopwatch(run)
    threshold = secant_threshold(d1)
    for n, (hits, total) in results.items():
        assert total == 500
        assert 10 * hits >= 9 * total
    assert elapsed < 300.0
    rates = {n: f"{hits}/{total}" for n, (hits, total) in results.items()}
    print(
        f"[criterion 8] PASS witness rates {rates} at threshold "
        f"{float(threshold):.5f}, {elapsed:.1f}s"
    )


def test_c09_oracle_equivalence(stopwatch):
    def run():
        rng = spawn_rng(90909)
        checked = 0
        grids = [
            sp.constant_refinement(2),
            sp.explicit_refinement([2, 4]),
            sp.explicit_refinement([4, 6]),
            sp.linear_refinement(2),
        ]
        while checked < 100:
            m = grids[rand_index(rng, 0, len(grids) - 1)]
            n_max = rand_index(rng, 1, 5)
            try:
                params = sp.ParameterSet(
                    alpha=sp.explicit([0] * n_max, 0, 0), m=m, n_max=n_max, model="L2"
                )
            except sp.DomainError:
                continue  # explicit grid shorter than n_max
            level = rand_index(rng, 0, n_max)
            if 2 * params.grid_size(level) > 64:
                continue
            coeffs = [
                F(rand_index(rng, 0, 16), rand_index(rng, 1, 16)) for _ in range(level)
            ]
            signs = tuple(1 if rng.getrandbits(1) else -1 for _ in range(level))
            functional = sp.Functional(
                alpha0=F(rand_index(rng, -8, 8), rand_index(rng, 1, 8)),
                rule=sp.explicit(coeffs, 0, 0),
                signs=signs,
            )
            union, mu = sp.image_measure(sp.build_pl(params, functional, level))
            o_union, o_mu = pl_image_oracle(params, functional, level)
            if mu != o_mu or list(union.intervals) != o_union:
                return checked, False
            checked += 1
        return checked, True

    (checked, ok), elapsed = stopwatch(run)
    assert ok and checked == 100
    print(f"[criterion 9] PASS 100 randomized images equal the pairwise-merge oracle, {elapsed:.1f}s")


CONFIG_L2 = """\
alpha.kind = "harmonic"
alpha.a = "1/2"
m.kind = "linear"
m.k = 2
n_max = 8
model = "L2"
sqrt_precision_bits = 64
functional.alpha0 = "1/2"
functional.rule.kind = "inverse_square"
functional.rule.a = "1/4"
functional.name = "F1"
"""

CONFIG_L1 = """\
alpha.kind = "geometric"
alpha.a = "1/2"
alpha.r = "1/2"
m.kind = "linear"
m.k = 2
n_max = 12
model = "L1"
functional.alpha0 = "1/1"
functional.rule.kind = "geometric"
functional.rule.a = "1/2"
functional.rule.r = "1/2"
functional.name = "R1"
"""


def _run_everything(cfg_l2: Path, cfg_l1: Path, out: Path, workers: int) -> dict:
    jobs = [
        ["validate", "--config", str(cfg_l2)],
        ["evaluate", "--config", str(cfg_l2), "--t", "3/8", "--level", "4"],
        ["measure", "--config", str(cfg_l2), "--level", "6", "--workers", str(workers), "--no-cache"],
        ["scan", "--config", str(cfg_l2), "--level", "6", "--circle", "64",
         "--workers", str(workers), "--no-cache"],
        ["curve", "--config", str(cfg_l1), "--level", "3"],
        ["diagnose", "--config", str(cfg_l2), "--check", "borel-cantelli",
         "--samples", "10000", "--seed", "101"],
        ["diagnose", "--config", str(cfg_l2), "--check", "slope-identity",
         "--samples", "200", "--seed", "101"],
    ]
    for job in jobs:
        assert main(job + ["--out", str(out)]) == 0
    return {
        p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()
    }


def test_c10_determinism(tmp_path, stopwatch):
    cfg_l2 = tmp_path / "l2.cfg"
    cfg_l2.write_text(CONFIG_L2)
    cfg_l1 = tmp_path / "l1.cfg"
    cfg_l1.write_text(CONFIG_L1)

    def run():
        first = _run_everything(cfg_l2, cfg_l1, tmp_path / "run1", workers=1)
        second = _run_everything(cfg_l2, cfg_l1, tmp_path / "run2", workers=1)
        many = _run_everything(cfg_l2, cfg_l1, tmp_path / "run3", workers=4)
        return first, second, many

    (first, second, many), elapsed = stopwatch(run)
    assert set(first) == set(second) == set(many)
    assert first == second  # byte-identical reruns
    assert first == many  # byte-identical across worker counts
    print(
        f"[criterion 10] PASS {len(first)} output files byte-identical over "
        f"two runs and 1 vs 4 workers, {elapsed:.1f}s"
    )

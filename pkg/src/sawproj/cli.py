"""Command-line front end: configuration, orchestration, caching, emission.

Every run is a pure function of its configuration document plus flags; output
files are byte-identical across reruns and worker counts. Exit codes:
0 success, 1 malformed config, 2 validation/diagnostic failure, 3 budget
exceeded. Errors and timings are emitted as JSON records on stderr; output
files never contain wall-clock data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .construction import (
    DEFAULT_PIECE_BUDGET,
    build_pl,
    component_value,
    truncated_point,
)
from .curve import (
    DEFAULT_VERTEX_BUDGET,
    build_curve,
    curve_length,
    curve_length_closed_form,
    length_increment,
    sup_distance_bound,
)
from .diagnostics import (
    GENERATOR_NAME,
    event_set,
    independence_check,
    rand_fraction,
    rand_index,
    sample_event_union,
    sample_secant_witnesses,
    sample_slope_identities,
    spawn_rng,
)
from .errors import BudgetExceeded, ConfigError, SawprojError
from .measure import directional_measure, projection_bracket
from .params import GridCell, validate
from .rational import format_rational, parse_rational
from .records import (
    SCHEMA_VERSION,
    content_hash,
    export_pieces_csv,
    finalize_record,
    functional_from_config,
    functional_to_config,
    load_config,
    params_from_config,
    params_to_config,
    read_jsonl,
    write_csv,
    write_jsonl,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3

BUDGET_ENV = "SAWPROJ_BUDGET"


def _stderr_record(record: dict) -> None:
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")


def _resolve_budget(args, config: dict) -> int:
    if getattr(args, "budget", None) is not None:
        return args.budget
    env = os.environ.get(BUDGET_ENV)
    if env is not None:
        return int(env)
    if "budget" in config:
        return int(config["budget"])
    return DEFAULT_PIECE_BUDGET


def _load(args) -> tuple[dict, object, Optional[object]]:
    config = load_config(args.config)
    params = params_from_config(config)
    functional = None
    if any(k.startswith("functional.") for k in config):
        functional = functional_from_config(config)
    return config, params, functional


def _out_dir(args, config: dict) -> Path:
    out = getattr(args, "out", None) or config.get("out") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _functional_id(functional) -> str:
    return functional.name or content_hash(
        {k: str(v) for k, v in functional_to_config(functional).items()}
    )[:16]


class _Cache:
    def __init__(self, root: Path, enabled: bool = True):
        self.dir = root / ".cache"
        self.enabled = enabled

    def key(self, payload: dict) -> str:
        return content_hash(payload)

    def get(self, key: str) -> Optional[dict]:
        if not self.enabled:
            return None
        path = self.dir / f"{key}.json"
        if not path.exists():
            return None
        stored = json.loads(path.read_text(encoding="utf-8"))
        if stored.get("schema_version") != SCHEMA_VERSION:
            return None
        return stored["record"]

    def put(self, key: str, record: dict) -> None:
        if not self.enabled:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        blob = json.dumps(
            {"schema_version": SCHEMA_VERSION, "record": record},
            sort_keys=True,
            separators=(",", ":"),
        )
        (self.dir / f"{key}.json").write_text(blob, encoding="utf-8")


# -- subcommands ---------------------------------------------------------------------


def cmd_validate(args) -> int:
    config, params, _ = _load(args)
    report = validate(params)
    records = [
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "validate",
            "check": c.kind,
            "passed": c.passed,
            "detail": c.detail,
        }
        for c in report.checks
    ]
    records.append(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "validate_summary",
            "passed": report.passed,
        }
    )
    write_jsonl(records, _out_dir(args, config) / "validate.jsonl")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_evaluate(args) -> int:
    config, params, _ = _load(args)
    level = args.level if args.level is not None else int(config.get("level", params.n_max))
    point = truncated_point(params, level, parse_rational(args.t))
    record = {
        "schema_version": SCHEMA_VERSION,
        "kind": "evaluate",
        "t": point.t,
        "level": point.level,
        "model": point.model,
        "coords": list(point.coords),
        "tail_l1_upper": point.tail_l1_upper,
        "tail_l2_lower": point.tail_l2_enclosure[0],
        "tail_l2_upper": point.tail_l2_enclosure[1],
    }
    write_jsonl([record], _out_dir(args, config) / "evaluate.jsonl")
    return EXIT_OK


def _bracket_record(functional, bracket) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "measure",
        "functional_id": _functional_id(functional),
        "level": bracket.level,
        "mu": bracket.mu,
        "tail": bracket.tail_upper,
        "lower": bracket.lower,
        "upper": bracket.upper,
        "piece_count": bracket.piece_count,
        "chain_holds": bracket.chain_holds,
    }


def cmd_measure(args) -> int:
    config, params, functional = _load(args)
    if functional is None:
        raise ConfigError("measure requires functional.* keys in the config")
    level = args.level if args.level is not None else int(config.get("level", 1))
    budget = _resolve_budget(args, config)
    out = _out_dir(args, config)
    if args.pieces:
        pl = build_pl(params, functional, level, piece_budget=budget)
        export_pieces_csv(pl, out / "pieces.csv")
    cache = _Cache(out, enabled=not args.no_cache)
    key = cache.key(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "measure",
            "params": params_to_config(params),
            "functional": functional_to_config(functional),
            "level": level,
        }
    )
    record = cache.get(key)
    if record is None:
        bracket = projection_bracket(
            params, functional, level, workers=args.workers, piece_budget=budget
        )
        record = finalize_record(_bracket_record(functional, bracket))
        cache.put(key, record)
    write_jsonl([record], out / "measure.jsonl")
    write_csv([record], out / "measure.csv")
    return EXIT_OK


def circle_directions(count: int) -> list[tuple[Fraction, Fraction]]:
    """count rational directions sweeping the half-turn of all lines."""
    out = []
    for k in range(count):
        p = (count - k) ** 2 - k**2
        q = 2 * k * (count - k)
        out.append((Fraction(p), Fraction(q)))
    return out


def cmd_scan(args) -> int:
    config, params, functional = _load(args)
    if functional is None:
        raise ConfigError("scan requires functional.* keys in the config")
    level = args.level if args.level is not None else int(config.get("level", 1))
    budget = _resolve_budget(args, config)
    out = _out_dir(args, config)
    cache = _Cache(out, enabled=not args.no_cache)

    if args.directions:
        directions = []
        for chunk in args.directions.split(";"):
            p_text, _, q_text = chunk.partition(",")
            directions.append((parse_rational(p_text), parse_rational(q_text)))
    else:
        directions = circle_directions(args.circle)

    records = []
    for idx, (p, q) in enumerate(directions):
        key = cache.key(
            {
                "schema_version": SCHEMA_VERSION,
                "kind": "scan",
                "params": params_to_config(params),
                "functional": functional_to_config(functional),
                "level": level,
                "direction": [format_rational(p), format_rational(q)],
            }
        )
        record = cache.get(key)
        if record is None:
            bracket = directional_measure(
                params, functional, (p, q), level,
                workers=args.workers, piece_budget=budget,
            )
            record = _bracket_record(functional, bracket)
            record.update(
                {
                    "kind": "scan",
                    "direction_index": idx,
                    "direction_p": p,
                    "direction_q": q,
                }
            )
            record = finalize_record(record)
            cache.put(key, record)
        records.append(record)
    records.sort(key=lambda r: r["direction_index"])
    write_jsonl(records, out / "scan.jsonl")
    write_csv(records, out / "scan.csv")
    return EXIT_OK


def cmd_curve(args) -> int:
    config, params, functional = _load(args)
    if functional is None:
        raise ConfigError("curve requires functional.* keys in the config")
    level = args.level if args.level is not None else int(config.get("level", 1))
    budget = args.vertex_budget or int(config.get("vertex_budget", DEFAULT_VERTEX_BUDGET))
    out = _out_dir(args, config)

    polygon = build_curve(params, functional, level, vertex_budget=budget)
    width = len(str(level))
    rows = []
    for idx, vertex in enumerate(polygon.vertices):
        row = {"vertex_index": idx, "t": vertex.t}
        for n, c in enumerate(vertex.coords):
            row[f"coord_{n:0{width}d}"] = c
        row["is_vertical"] = (
            polygon.vertical[idx] if idx < len(polygon.vertical) else False
        )
        rows.append(row)
    write_csv(rows, out / "curve.csv")

    ledger = [
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "curve_length",
            "functional_id": _functional_id(functional),
            "level": level,
            "length": curve_length(polygon),
            "length_closed_form": curve_length_closed_form(params, functional, level),
            "vertex_count": len(polygon.vertices),
        }
    ]
    for n in range(1, level + 1):
        ledger.append(
            {
                "schema_version": SCHEMA_VERSION,
                "kind": "curve_increment",
                "level": n,
                "increment": length_increment(params, functional, n),
                "increment_ceiling": Fraction(3, 2) * abs(functional.coeff(n)),
                "sup_distance": sup_distance_bound(params, functional, n),
            }
        )
    write_jsonl(ledger, out / "curve.jsonl")
    return EXIT_OK


def _diag_event_measure(params, args, rng) -> tuple[list[dict], bool]:
    records, ok = [], True
    for n in range(1, min(6, params.n_max) + 1):
        ev = event_set(params, n)
        expected = 2 * params.alpha_term(n)
        passed = ev.measure == expected
        ok &= passed
        records.append(
            {
                "check": "event-measure",
                "level": n,
                "measure": ev.measure,
                "expected": expected,
                "passed": passed,
            }
        )
    return records, ok


def _diag_independence(params, args, rng) -> tuple[list[dict], bool]:
    records, ok = [], True
    top = min(6, params.n_max)
    for i in range(2, top + 1):
        for j in range(i + 1, top + 1):
            res = independence_check(params, (i, j))
            ok &= res.multiplicative
            records.append(
                {
                    "check": "independence",
                    "levels": f"{i},{j}",
                    "measure": res.measure,
                    "expected": res.expected,
                    "passed": res.multiplicative,
                }
            )
    return records, ok


def _diag_borel_cantelli(params, args, rng) -> tuple[list[dict], bool]:
    levels = tuple(range(4, min(8, params.n_max) + 1))
    report = sample_event_union(params, levels, args.samples, args.seed)
    passed = report.within_sigmas(3)
    record = {
        "check": "borel-cantelli",
        "levels": ",".join(map(str, levels)),
        "samples": report.samples,
        "seed": report.seed,
        "generator": report.generator,
        "fraction": report.fraction,
        "expected": report.expected_probability,
        "passed": passed,
    }
    return [record], passed


def _diag_slope_identity(params, args, rng) -> tuple[list[dict], bool]:
    passed = sample_slope_identities(params, args.samples, args.seed)
    ok = passed == args.samples
    record = {
        "check": "slope-identity",
        "samples": args.samples,
        "seed": args.seed,
        "generator": GENERATOR_NAME,
        "passed_count": passed,
        "passed": ok,
    }
    return [record], ok


def _diag_secant(params, args, rng) -> tuple[list[dict], bool]:
    records, ok = [], True
    for n in range(4, min(7, params.n_max) + 1):
        hits, total = sample_secant_witnesses(params, n, args.samples, args.seed)
        passed = 10 * hits >= 9 * total
        ok &= passed
        records.append(
            {
                "check": "secant",
                "level": n,
                "samples": total,
                "seed": args.seed,
                "generator": GENERATOR_NAME,
                "passed_count": hits,
                "passed": passed,
            }
        )
    return records, ok


def _diag_oscillation(params, args, rng) -> tuple[list[dict], bool]:
    worst = Fraction(0)
    ok = True
    for _ in range(args.samples):
        n = rand_index(rng, 0, min(6, params.n_max))
        size = params.grid_size(n)
        idx = rand_index(rng, 1, size)
        cell = GridCell(n, idx, size)
        lo, _hi = cell.interval()
        t = lo + rand_fraction(rng) * cell.length
        u = lo + rand_fraction(rng) * cell.length
        for k in range(params.n_max + 1):
            osc = abs(component_value(params, k, t) - component_value(params, k, u))
            if osc > cell.length:
                ok = False
            if osc > worst:
                worst = osc
    record = {
        "check": "oscillation",
        "samples": args.samples,
        "seed": args.seed,
        "generator": GENERATOR_NAME,
        "worst": worst,
        "passed": ok,
    }
    return [record], ok


_DIAGNOSTICS = {
    "event-measure": _diag_event_measure,
    "independence": _diag_independence,
    "borel-cantelli": _diag_borel_cantelli,
    "slope-identity": _diag_slope_identity,
    "secant": _diag_secant,
    "oscillation": _diag_oscillation,
}


def cmd_diagnose(args) -> int:
    config, params, _ = _load(args)
    if args.check not in _DIAGNOSTICS:
        raise ConfigError(
            f"unknown check {args.check!r}; available: {', '.join(sorted(_DIAGNOSTICS))}"
        )
    rng = spawn_rng(args.seed)
    records, ok = _DIAGNOSTICS[args.check](params, args, rng)
    for record in records:
        record.setdefault("schema_version", SCHEMA_VERSION)
        record.setdefault("kind", "diagnose")
    name = args.check.replace("-", "_")
    write_jsonl(records, _out_dir(args, config) / f"diagnose_{name}.jsonl")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_emit(args) -> int:
    records = read_jsonl(args.records)
    if args.format == "csv":
        write_csv(records, args.out)
    else:
        write_jsonl(records, args.out)
    return EXIT_OK


_RUN_FORWARDS = {
    "validate": ("out",),
    "evaluate": ("t", "level", "out"),
    "measure": ("level", "out"),
    "scan": ("level", "out"),
    "curve": ("level", "out"),
    "diagnose": ("check", "seed", "samples", "out"),
}


def cmd_run(args) -> int:
    config = load_config(args.config)
    command = config.get("command")
    if command not in _RUN_FORWARDS:
        raise ConfigError(f"config 'command' must name a subcommand, got {command!r}")
    forwarded = [command, "--config", str(args.config)]
    for key in _RUN_FORWARDS[command]:
        if key in config:
            forwarded.extend([f"--{key}", str(config[key])])
    return main(forwarded)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sawproj",
        description="Exact-arithmetic sawtooth-sum constructions, projection "
        "measures, polygonal approximations, and diagnostics.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, functional_cmd=False):
        p.add_argument("--config", required=True, help="flat key = value document")
        p.add_argument("--out", help="output directory (default from config or ./out)")

    p = sub.add_parser("validate", help="check parameter invariants")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evaluate", help="truncated point at a rational parameter")
    common(p)
    p.add_argument("--t", required=True, help='parameter as "p/q"')
    p.add_argument("--level", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("measure", help="certified projection-measure bracket")
    common(p)
    p.add_argument("--level", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=int)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--pieces", action="store_true", help="also export the piece table CSV")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("scan", help="brackets across rational directions")
    common(p)
    p.add_argument("--level", type=int)
    p.add_argument("--circle", type=int, default=64, help="built-in direction count")
    p.add_argument("--directions", help='explicit list "p,q;p,q;..."')
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=int)
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("curve", help="polygonal approximation CSV and length ledger")
    common(p)
    p.add_argument("--level", type=int)
    p.add_argument("--vertex-budget", type=int, dest="vertex_budget")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("diagnose", help="named quantitative checks")
    common(p)
    p.add_argument("--check", required=True)
    p.add_argument("--seed", type=int, default=20260811)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("emit", help="convert stored records between formats")
    p.add_argument("--records", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("run", help="execute the command named in the config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        code = args.func(args)
    except ConfigError as exc:
        _stderr_record({"error": "config", "message": str(exc), "exit_code": EXIT_CONFIG})
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        _stderr_record(
            {
                "error": "budget",
                "message": str(exc),
                "count": exc.count,
                "budget": exc.budget,
                "exit_code": EXIT_BUDGET,
            }
        )
        return EXIT_BUDGET
    except SawprojError as exc:
        _stderr_record(
            {"error": "invalid", "message": str(exc), "exit_code": EXIT_VALIDATION}
        )
        return EXIT_VALIDATION
    except OSError as exc:
        _stderr_record({"error": "io", "message": str(exc), "exit_code": EXIT_CONFIG})
        return EXIT_CONFIG
    _stderr_record(
        {
            "event": "timing",
            "command": args.command,
            "wall_time_ms": int((time.monotonic() - started) * 1000),
        }
    )
    return code


if __name__ == "__main__":
    sys.exit(main())

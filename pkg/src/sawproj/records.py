"""Serialization: flat structured-text configs, JSONL/CSV records, caching.

Rationals always travel as "p/q" strings, never as floats; every rational
field in an emitted record is accompanied by a round-to-nearest double under
the same name with an ``_f64`` suffix. Records serialize with sorted keys and
fixed separators so identical runs produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import ConfigError
from .params import (
    ParameterSet,
    RefinementRule,
)
from .rational import format_rational, parse_rational
from .sequences import Functional, SequenceRule

SCHEMA_VERSION = 1


# -- flat config documents ---------------------------------------------------------

# line grammar:  key.path = "string"  |  key.path = 123
def parse_config_text(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            out[key] = value[1:-1]
        else:
            try:
                out[key] = int(value)
            except ValueError as exc:
                raise ConfigError(
                    f"line {lineno}: value must be an integer or a quoted string"
                ) from exc
    return out


def emit_config_text(doc: dict) -> str:
    lines = []
    for key in sorted(doc):
        value = doc[key]
        if value is None:
            continue
        if isinstance(value, bool):
            raise ConfigError("boolean config values are not supported")
        if isinstance(value, int):
            lines.append(f"{key} = {value}")
        elif isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        elif isinstance(value, Fraction):
            lines.append(f'{key} = "{format_rational(value)}"')
        else:
            raise ConfigError(f"unsupported config value type for {key!r}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def _rule_from_config(doc: dict, prefix: str) -> SequenceRule:
    kind = doc.get(f"{prefix}.kind")
    if kind is None:
        raise ConfigError(f"missing {prefix}.kind")
    if kind in ("harmonic", "inverse_square"):
        return SequenceRule(kind, a=_frac(doc, f"{prefix}.a"))
    if kind == "geometric":
        return SequenceRule(kind, a=_frac(doc, f"{prefix}.a"), r=_frac(doc, f"{prefix}.r"))
    if kind == "explicit":
        raw = doc.get(f"{prefix}.values", "")
        values = tuple(parse_rational(v) for v in str(raw).split(",") if v.strip())
        tail_l1 = _frac(doc, f"{prefix}.tail_l1", optional=True)
        tail_l2sq = _frac(doc, f"{prefix}.tail_l2sq", optional=True)
        return SequenceRule("explicit", values=values, tail_l1=tail_l1, tail_l2sq=tail_l2sq)
    raise ConfigError(f"unknown {prefix}.kind {kind!r}")


def _frac(doc: dict, key: str, optional: bool = False) -> Optional[Fraction]:
    if key not in doc:
        if optional:
            return None
        raise ConfigError(f"missing {key}")
    return parse_rational(str(doc[key]))


def params_from_config(doc: dict) -> ParameterSet:
    alpha = _rule_from_config(doc, "alpha")
    m_kind = doc.get("m.kind")
    if m_kind in ("linear", "constant"):
        m = RefinementRule(m_kind, k=int(doc.get("m.k", 0)))
    elif m_kind == "explicit":
        values = tuple(int(v) for v in str(doc.get("m.values", "")).split(",") if v.strip())
        m = RefinementRule("explicit", values=values)
    else:
        raise ConfigError(f"unknown m.kind {m_kind!r}")
    try:
        n_max = int(doc["n_max"])
        model = str(doc["model"])
    except KeyError as exc:
        raise ConfigError(f"missing {exc.args[0]}") from exc
    bits = int(doc.get("sqrt_precision_bits", 64))
    try:
        return ParameterSet(alpha=alpha, m=m, n_max=n_max, model=model, sqrt_bits=bits)
    except Exception as exc:
        raise ConfigError(str(exc)) from exc


def functional_from_config(doc: dict) -> Functional:
    rule = _rule_from_config(doc, "functional.rule")
    alpha0 = _frac(doc, "functional.alpha0")
    sign = int(doc.get("functional.sign", 1))
    signs = tuple(
        int(s) for s in str(doc.get("functional.signs", "")).split(",") if s.strip()
    )
    name = str(doc.get("functional.name", ""))
    return Functional(alpha0=alpha0, rule=rule, sign=sign, signs=signs, name=name)


def params_to_config(params: ParameterSet) -> dict:
    doc: dict = {}
    for key, value in params.doc().items():
        if isinstance(value, Fraction):
            doc[key] = format_rational(value)
        elif isinstance(value, list):
            doc[key] = ",".join(
                format_rational(v) if isinstance(v, Fraction) else str(v) for v in value
            )
        elif value is not None:
            doc[key] = value
    return doc


def functional_to_config(functional: Functional) -> dict:
    doc: dict = {}
    for key, value in functional.doc().items():
        out_key = f"functional.{key}"
        if isinstance(value, Fraction):
            doc[out_key] = format_rational(value)
        elif isinstance(value, list):
            doc[out_key] = ",".join(
                format_rational(v) if isinstance(v, Fraction) else str(v) for v in value
            )
        elif value is not None:
            doc[out_key] = value
    return doc


# -- records ------------------------------------------------------------------------


def finalize_record(record: dict) -> dict:
    """Expand Fractions into "p/q" plus float companions; order keys."""
    out: dict = {}
    for key, value in record.items():
        if isinstance(value, Fraction):
            out[key] = format_rational(value)
            out[f"{key}_f64"] = float(value)
        elif isinstance(value, (list, tuple)) and value and isinstance(value[0], Fraction):
            out[key] = [format_rational(v) for v in value]
            out[f"{key}_f64"] = [float(v) for v in value]
        else:
            out[key] = value
    return {k: out[k] for k in sorted(out)}


def dumps_record(record: dict) -> str:
    return json.dumps(finalize_record(record), sort_keys=True, separators=(",", ":"))


def write_jsonl(records: Iterable[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps_record(record))
            fh.write("\n")


def write_csv(records: Sequence[dict], path: str | Path) -> None:
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    finalized = [finalize_record(r) for r in records]
    fields: list[str] = []
    for rec in finalized:
        for key in rec:
            if key not in fields:
                fields.append(key)
    fields.sort()
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for rec in finalized:
            writer.writerow(
                {
                    k: (";".join(map(str, v)) if isinstance(v, list) else v)
                    for k, v in rec.items()
                }
            )


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def content_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def export_pieces_csv(pl, path: str | Path) -> int:
    """Write the piece table (index, endpoint, slope, value, jump) as CSV.

    Returns the piece count; every rational column gets a float companion.
    """
    rows = [
        {
            "piece_index": piece.index,
            "left_endpoint": piece.left,
            "length": piece.length,
            "slope": piece.slope,
            "left_value": piece.left_value,
            "jump_at_left": piece.jump_at_left,
        }
        for piece in pl.pieces()
    ]
    write_csv(rows, path)
    return len(rows)

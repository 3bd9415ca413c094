"""Deterministic report emission: JSON is the source of truth, CSV a projection.

Rationals serialize as {"num": "...", "den": "..."} with string payloads so
denominators like |G_n| * |G_m| survive 64-bit consumers.  JSON bytes are a
pure function of the payload: sorted keys, fixed indentation, no timestamps.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__


def fraction_json(value: Fraction) -> dict[str, str]:
    return {"num": str(value.numerator), "den": str(value.denominator)}


def jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return fraction_json(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            field.name: jsonable(getattr(obj, field.name))
            for field in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def envelope(command: str, config: dict, result: Any) -> dict:
    return {
        "artifact": "weqlab",
        "version": __version__,
        "command": command,
        "config": jsonable(config),
        "result": jsonable(result),
    }


def dumps_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def dump_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(dumps_json(payload))


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    def cell(value: Any) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if value is None:
            return ""
        return str(value)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    Path(path).write_text(csv_text(header, rows))


def wvector_csv_rows(vec) -> list[list]:
    """One row per entry: symbol, i, j, num, den."""
    return [
        [lab, i, j, vec.counts[s][i][j], vec.den]
        for s, lab in enumerate(vec.labels)
        for i in range(vec.k)
        for j in range(vec.k)
    ]

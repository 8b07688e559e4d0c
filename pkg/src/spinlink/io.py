"""Deterministic CSV and JSON writers (12 significant digits, LF, UTF-8)."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

SIG_DIGITS = 12

TRAJECTORY_COLUMNS = ("t_s", "pop_mw", "pop_m", "pop_e")
SWEEP_COLUMNS = ("g_hz", "q_mw", "eta_e_mw")
COMPARE_COLUMNS = ("eta", "scheme", "case", "rate_hz")
HERALD_COLUMNS = ("theta_rad", "protocol", "fidelity", "p_herald")
LEVELS_COLUMNS = ("eigenvalue_hz", "orbit_character", "spin_character")


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v == 0:
            return "0"
        return format(v, f".{SIG_DIGITS}g")
    return str(value)


def csv_text(records: Iterable[Mapping[str, Any] | Sequence[Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        if isinstance(rec, Mapping):
            extra = set(rec) - set(columns)
            if extra:
                raise ValueError(f"record has fields outside the schema: {sorted(extra)}")
            row = [rec.get(c) for c in columns]
        else:
            row = list(rec)
            if len(row) != len(columns):
                raise ValueError(f"record has {len(row)} fields, schema has {len(columns)}")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(path: str | Path, records, columns: Sequence[str]) -> Path:
    path = Path(path)
    text = csv_text(records, columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _clean(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return format_value(v)
        return float(format(v, f".{SIG_DIGITS}g"))
    return obj


def emit_json(path: str | Path, document: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(document), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path

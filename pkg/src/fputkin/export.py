"""Result tables with fixed schemas, written as CSV or JSON.

Every float is written with 17 significant digits and non-finite values
raise :class:`SerializationError`.  Each file carries the content hash of
the run configuration: CSV files start with a ``# config-sha256: <hash>``
comment line followed by the header, JSON files have a ``config_hash``
field.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SerializationError

SCHEMAS: dict[str, list[str]] = {
    "trajectory": ["time", "k", "re_b", "im_b"],
    "ensemble": ["time", "k", "mean", "stderr", "M"],
    "predictor": ["k", "n_in", "S_k", "resonant"],
    "wke": ["time", "k", "n"],
    "wke_totals": ["time", "action", "energy"],
    "counting": ["N", "T", "k", "m", "set", "raw_count", "weighted_sum", "bound_value", "ratio"],
    "couples": ["index", "order", "plus_scale", "minus_scale", "degenerate_nodes", "kernel_re", "kernel_im"],
    "compare": ["k", "n_in", "mc_mean", "mc_stderr", "S_k", "kinetic"],
}

HASH_PREFIX = "# config-sha256: "


@dataclass
class Table:
    schema: str
    rows: list

    def __post_init__(self) -> None:
        if self.schema not in SCHEMAS:
            raise SerializationError(f"unknown schema {self.schema!r}")
        width = len(SCHEMAS[self.schema])
        for row in self.rows:
            if len(row) != width:
                raise SerializationError(f"row of width {len(row)} does not match schema {self.schema!r}")

    @property
    def columns(self) -> list[str]:
        return SCHEMAS[self.schema]


def format_value(value) -> str:
    """Text form of a scalar cell; floats use 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if not math.isfinite(x):
            raise SerializationError(f"non-finite value {x!r} in results")
        return format(x, ".17g")
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    raise SerializationError(f"cannot serialize {type(value).__name__}")


def content_hash(payload) -> str:
    """SHA-256 of the canonical JSON text of ``payload``."""
    return hashlib.sha256(dumps_json(payload).encode()).hexdigest()


def csv_text(table: Table, config_hash: str) -> str:
    lines = [HASH_PREFIX + config_hash, ",".join(table.columns)]
    for row in table.rows:
        cells = []
        for v in row:
            text = format_value(v)
            if any(c in text for c in ',"\n'):
                text = '"' + text.replace('"', '""') + '"'
            cells.append(text)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_value(value, indent: int, level: int) -> str:
    if isinstance(value, dict):
        if not value:
            return "{}"
        pad = " " * (indent * (level + 1))
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + " " * (indent * level) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        seq = list(value)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json_value(v, indent, level + 1) for v in seq) + "]"
        pad = " " * (indent * (level + 1))
        return "[\n" + ",\n".join(pad + _json_value(v, indent, level + 1) for v in seq) + "\n" + " " * (indent * level) + "]"
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    text = format_value(value)
    if isinstance(value, (float, np.floating)) and not any(c in text for c in ".en"):
        text += ".0"  # keep floats (including -0.0) floats after parsing
    return text


def dumps_json(value, indent: int = 1) -> str:
    """Deterministic JSON text: key order kept, floats with 17 significant digits."""
    return _json_value(value, indent, 0) + "\n"


def table_json(table: Table, config_hash: str) -> dict:
    return {"schema": table.schema, "config_hash": config_hash, "columns": table.columns, "rows": table.rows}


def write_table(table: Table, path, fmt: str, config_hash: str) -> str:
    """Write ``table`` to ``path`` (CSV or JSON); returns the text written."""
    if fmt == "csv":
        text = csv_text(table, config_hash)
    elif fmt == "json":
        text = dumps_json(table_json(table, config_hash))
    else:
        raise SerializationError(f"unknown format {fmt!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def read_csv_table(path) -> tuple[str, list[str], list[list[str]]]:
    """Config hash, header and raw rows of a CSV written by :func:`write_table`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(HASH_PREFIX):
        raise SerializationError("missing config hash line")
    header = lines[1].split(",")
    return lines[0][len(HASH_PREFIX) :], header, [line.split(",") for line in lines[2:]]


# -- table builders ------------------------------------------------------------------


def trajectory_table(times, snapshots, k) -> Table:
    """One row per (time, mode) of a single trajectory."""
    rows = []
    for t, snap in zip(times, snapshots):
        for kv, b in zip(k, snap):
            rows.append([float(t), float(kv), float(b.real), float(b.imag)])
    return Table("trajectory", rows)


def ensemble_table(times, mean, stderr, k, M: int) -> Table:
    rows = []
    for t, mrow, srow in zip(times, mean, stderr):
        for kv, m, s in zip(k, mrow, srow):
            rows.append([float(t), float(kv), float(m), float(s), int(M)])
    return Table("ensemble", rows)

"""Loaders for the metric CSV and JSON outputs, checked against the shared schemas."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import jsonschema

SCHEMA_DIR = Path(__file__).with_name("schemas")
_GAMMA = re.compile(r"^gamma_(\d+)_([12])$")


class SchemaError(ValueError):
    """An input file does not match its declared schema."""


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / name).read_text())


@dataclass
class Metrics:
    path: Path
    arm: str
    columns: dict[str, list[float]]
    num_classes: int = 0
    gamma: dict[tuple[int, int], list[float]] = field(default_factory=dict)

    @property
    def t(self) -> list[float]:
        return self.columns["t"]


def _number(text: str, column: str, path: Path, line: int) -> float:
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"{path}:{line}: column {column!r} is not a number: {text!r}") from None


def load_metrics(path: str | Path) -> Metrics:
    path = Path(path)
    desc = schema("metrics_csv.json")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    fixed = desc["fixed_columns"]
    for i, name in enumerate(fixed):
        if i >= len(header) or header[i] != name:
            got = header[i] if i < len(header) else "<missing>"
            raise SchemaError(f"{path}: column {i} should be {name!r}, found {got!r}")
    gamma_cols = header[len(fixed):]
    for name in gamma_cols:
        if not _GAMMA.match(name):
            raise SchemaError(f"{path}: unexpected column {name!r}")
    if len(gamma_cols) % 2:
        raise SchemaError(f"{path}: gamma columns must come in modality pairs")
    if not body:
        raise SchemaError(f"{path}: no data rows")

    arms = {row[1] for row in body if len(row) > 1}
    if len(arms) != 1:
        raise SchemaError(f"{path}: expected one arm, found {sorted(arms)}")
    columns: dict[str, list[float]] = {name: [] for name in header if name != "arm"}
    for line, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{line}: {len(row)} fields, header has {len(header)}")
        for name, cell in zip(header, row):
            if name != "arm":
                columns[name].append(_number(cell, name, path, line))
    for name in desc["fraction_columns"]:
        bad = [v for v in columns[name] if not math.isnan(v) and not 0.0 <= v <= 1.0]
        if bad:
            raise SchemaError(f"{path}: column {name!r} has values outside [0, 1]")

    m = Metrics(path=path, arm=arms.pop(), columns=columns)
    for name in gamma_cols:
        j, r = _GAMMA.match(name).groups()
        m.gamma[(int(j), int(r))] = columns[name]
    m.num_classes = len(gamma_cols) // 2
    return m


def _load_json(path: str | Path, schema_name: str) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: malformed JSON: {e}") from None
    try:
        jsonschema.validate(doc, schema(schema_name))
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {where}: {e.message}") from None
    return doc


def load_gap_report(path: str | Path) -> dict:
    doc = _load_json(path, "gap_report.schema.json")
    if not doc["per_seed"]:
        raise SchemaError(f"{path}: report has no seeds")
    return doc


def load_arm_summary(path: str | Path) -> dict:
    doc = _load_json(path, "arm_summary.schema.json")
    if doc["competition"] is not None:
        jsonschema.validate(doc["competition"], schema("competition_report.schema.json"))
    return doc

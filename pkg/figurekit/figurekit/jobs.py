"""Figure job description and the CSV schema reader."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA = "momlab-csv-1"
BASE_COLUMNS = ["seed", "t", "observable", "index", "value"]


class SchemaError(ValueError):
    """Input file does not match the expected CSV schema."""


@dataclass
class FigureJob:
    kind: str
    inputs: list[str]
    output: str
    options: dict = field(default_factory=dict)

    @staticmethod
    def from_file(path) -> "FigureJob":
        d = json.loads(Path(path).read_text())
        return FigureJob(d["kind"], list(d["inputs"]), d["output"],
                         d.get("options", {}))


def read_rows(path):
    """Read a momlab CSV; returns (rows, param_keys).

    Raises SchemaError with an explicit column diagnostic on mismatch.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema="):
            raise SchemaError(f"{path}: missing '# schema=' header line")
        schema = first.strip().split("=", 1)[1]
        if schema != SCHEMA:
            raise SchemaError(f"{path}: schema {schema!r}, expected {SCHEMA!r}")
        reader = csv.reader(fh)
        header = next(reader)
        if header[: len(BASE_COLUMNS)] != BASE_COLUMNS:
            raise SchemaError(
                f"{path}: columns {header[:len(BASE_COLUMNS)]} do not match "
                f"the required prefix {BASE_COLUMNS}")
        param_keys = header[len(BASE_COLUMNS):]
        rows = []
        for rec in reader:
            d = {"seed": int(rec[0]), "t": float(rec[1]), "observable": rec[2],
                 "index": int(rec[3]), "value": float(rec[4])}
            for k, v in zip(param_keys, rec[len(BASE_COLUMNS):]):
                d[k] = v
            rows.append(d)
    return rows, param_keys


def require_params(path, param_keys, needed):
    missing = [k for k in needed if k not in param_keys]
    if missing:
        raise SchemaError(f"{path}: missing parameter column(s) {missing}; "
                          f"found {param_keys}")

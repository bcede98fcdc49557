"""Record serialization: versioned CSV for observable rows, JSON sidecars.

CSV layout (schema ``momlab-csv-1``): a comment header line, then columns
``seed,t,observable,index,value`` followed by the run's flattened sweep
parameters in sorted order.  Floats are written with ``repr`` so reruns of
the same RunSpec produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

SCHEMA = "momlab-csv-1"
BASE_COLUMNS = ["seed", "t", "observable", "index", "value"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))  # plain-float repr even for numpy scalars
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def records_to_csv(records) -> str:
    """Serialize TrajectoryRecords (each with meta['seed'] and meta['params'])."""
    param_keys = sorted({k for r in records for k in r.meta.get("params", {})})
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BASE_COLUMNS + param_keys)
    for r in records:
        seed = r.meta["seed"]
        params = r.meta.get("params", {})
        tail = [_fmt(params.get(k, "")) for k in param_keys]
        for t, name, index, value in r.rows:
            writer.writerow([seed, _fmt(t), name, index, _fmt(value)] + tail)
    return buf.getvalue()


def write_csv(path, records) -> None:
    Path(path).write_text(records_to_csv(records))


def read_csv(path):
    """Read a records CSV into a list of row dicts (params as strings)."""
    rows = []
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema="):
            raise ValueError(f"{path}: missing schema header")
        schema = first.strip().split("=", 1)[1]
        if schema != SCHEMA:
            raise ValueError(f"{path}: unsupported schema {schema!r}")
        reader = csv.reader(fh)
        header = next(reader)
        if header[: len(BASE_COLUMNS)] != BASE_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header[:5]}")
        param_keys = header[len(BASE_COLUMNS):]
        for rec in reader:
            d = {
                "seed": int(rec[0]),
                "t": float(rec[1]),
                "observable": rec[2],
                "index": int(rec[3]),
                "value": float(rec[4]),
            }
            for k, v in zip(param_keys, rec[len(BASE_COLUMNS):]):
                d[k] = v
            rows.append(d)
    return rows


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")

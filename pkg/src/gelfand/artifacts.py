"""CSV/JSON artifacts written by the command line, and a loader for them.

Floats are written with ``repr`` (shortest round-trip form, at most 17
significant digits), so identical runs produce byte-identical files.
"""

import csv
import json
import math
from pathlib import Path

SCHEMA_VERSION = 1


class ArtifactError(ValueError):
    pass


def fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    try:
        return repr(float(x))
    except (TypeError, ValueError):
        return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj


def write_json(path, kind, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema": f"gelfand.{kind}", "schema_version": SCHEMA_VERSION}
    doc.update(_jsonable(payload))
    path.write_text(json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n")
    return path


def _parse_cell(text):
    try:
        return float(text)
    except ValueError:
        return text


def load_artifact(path):
    """Read back a JSON report or CSV table written by this package."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if not str(doc.get("schema", "")).startswith("gelfand."):
            raise ArtifactError(f"{path} is not a gelfand artifact")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ArtifactError(f"{path}: schema version {doc.get('schema_version')} != {SCHEMA_VERSION}")
        return doc
    if path.suffix == ".csv":
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ArtifactError(f"{path} is empty")
        header, body = rows[0], rows[1:]
        return {"header": header, "rows": [[_parse_cell(c) for c in r] for r in body]}
    raise ArtifactError(f"unknown artifact type: {path}")

"""Readers for distance matrices and measures (UTF-8 CSV and JSON), and atomic writes."""

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, List, Optional, Tuple

from ..errors import MetricInputError


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MetricInputError(f"{path}: invalid JSON ({exc})") from exc


def read_matrix_csv(path: Path) -> List[List[float]]:
    rows = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise MetricInputError(f"{path}:{lineno}: non-numeric entry ({exc})") from exc
    return rows


def load_matrix(path: Path) -> Tuple[List[List[float]], Optional[List[str]]]:
    """Return (dist, labels) from a CSV (no header) or JSON {"n", "dist", "labels"} file."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_matrix_csv(path), None
    data = read_json(path)
    if not isinstance(data, dict) or "dist" not in data:
        raise MetricInputError(f"{path}: expected an object with a 'dist' matrix")
    dist = data["dist"]
    if "n" in data and data["n"] != len(dist):
        raise MetricInputError(f"{path}: n={data['n']} but dist has {len(dist)} rows")
    labels = data.get("labels")
    return dist, [str(x) for x in labels] if labels is not None else None


def load_weights(path: Path) -> List[float]:
    data = read_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("weights"), list):
        raise MetricInputError(f"{path}: expected an object with a 'weights' list")
    return data["weights"]


def atomic_write_text(path: Path, text: str) -> Path:
    """Write via a temp file in the target directory and rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path

from pathlib import Path
import csv
import io
import math
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from ..utils.io import atomic_write_text

ENTROPY_HEADER = ["eps", "n_cover", "sqrt_log", "cell_contribution"]
FRECHET_HEADER = ["index", "label", "value", "minimizer"]
SANDWICH_HEADER = ["x", "y", "d_p", "d_p_prime", "lower_bound", "slack"]
PROJECTION_HEADER = ["n", "projection_id", "p_value", "ks_p_value"]
VALIDATION_HEADER = ["i", "j", "k", "excess"]
ASSUMPTION_HEADER = ["D", "C", "worst_x", "worst_y", "holds", "margin"]

CSV_COLUMNS_HELP = (
    "CSV columns: validate -> " + ",".join(VALIDATION_HEADER)
    + "; embed -> distance matrix without header"
    + "; entropy -> " + ",".join(ENTROPY_HEADER)
    + "; frechet -> " + ",".join(FRECHET_HEADER)
    + "; lp-check -> " + ",".join(SANDWICH_HEADER)
    + "; clt -> " + ",".join(PROJECTION_HEADER)
)


def format_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def render_csv(rows: Iterable[Sequence[Any]], header: Optional[Sequence[str]] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: Path, rows: Iterable[Sequence[Any]], header: Optional[Sequence[str]] = None) -> Path:
    return atomic_write_text(path, render_csv(rows, header))

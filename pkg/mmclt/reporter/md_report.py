from pathlib import Path
from typing import Any, Dict

from ..utils.io import atomic_write_text


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)


def write_cone_demo_markdown(path: Path, result: Dict[str, Any]) -> Path:
    """Human-readable summary of a cone-demo result dict."""
    fr = result["frechet"]
    cp = result["closest_point"]
    inj = result["injectivity"]
    lines = []
    lines.append("# Cone demo\n")
    lines.append(
        f"- Grid: **{result['n_u']} x {result['n_v']}** ({result['n_points']} points), uniform measure, "
        f"seed {result['seed']}\n"
    )

    lines.append("## Frechet minimizers\n")
    lines.append(f"- Minimizers: **{len(fr['minimizers'])}** (unique: {fr['unique']})")
    lines.append(f"- Minimum value: {_fmt(fr['min_value'])}")
    lines.append(f"- Invariant under a one-step rotation: {fr['rotation_invariant']}")
    lines.append(f"- Labels: {', '.join(fr['labels'])}\n")

    lines.append("## Modified metric\n")
    lines.append(f"- Collapsed pairs: {result['collapsed_pairs']}")
    lines.append(f"- Smallest d_eta: {_fmt(inj['min_distance'])} at {inj['pair']}")
    lines.append(f"- Injectivity bound holds: {inj['bound_ok']}\n")

    lines.append("## Closest point to the hull mean\n")
    lines.append(f"- Frechet minimizers under d_eta: {cp['mu0']}")
    lines.append(f"- Closest points: {cp['closest']}")
    lines.append(f"- Coincide: **{cp['coincide']}**\n")

    lines.append("## CLT run\n")
    lines.append("| n | relative Frobenius error | passing | centered |")
    lines.append("|---:|---:|---:|---|")
    for row in result["clt"]:
        lines.append(
            f"| {row['n']} | {_fmt(row['relative_frobenius_error'])} | "
            f"{_fmt(row['fraction_passing'])} | {row['centered_ok']} |"
        )
    lines.append("")
    return atomic_write_text(path, "\n".join(lines))

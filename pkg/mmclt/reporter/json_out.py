from pathlib import Path
import json
import math
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel

from .. import __version__

TOOL_NAME = "mmclt"


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; numpy values unwrapped, non-finite floats as "inf" / "-inf" / "nan"."""
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump())
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(data: Any) -> str:
    """Sorted keys, 2-space indent, shortest round-trip floats, trailing newline."""
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2, allow_nan=False) + "\n"


def envelope(
    command: str, config: Any, seed: Optional[int], inputs: Dict[str, str], result: Any
) -> Dict[str, Any]:
    return {
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": inputs,
        "result": result,
    }

from pathlib import Path
from typing import List, Optional, Tuple
import json

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..models import CltConfig

try:
    import yaml as _yaml  # type: ignore
    _HAS_YAML = True
except Exception:
    _yaml = None
    _HAS_YAML = False


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ToleranceSettings(_Section):
    metric: float = Field(default=1e-9, gt=0.0)
    tie: float = Field(default=1e-9, gt=0.0)


class EntropySettings(_Section):
    grid_cells: int = Field(default=256, ge=1)
    exact_max_n: int = Field(default=24, ge=1)
    dyadic_k_max: int = Field(default=4, ge=0)
    series_k_max: int = Field(default=60, ge=1)


class FrechetSettings(_Section):
    oracle_max_iter: int = Field(default=10_000, ge=1)
    oracle_restarts: int = Field(default=8, ge=1)
    gradient_probes: int = Field(default=5, ge=1)


class LpSettings(_Section):
    d_grid: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.3, 0.5])
    c_max: float = Field(default=0.9, ge=0.0, lt=1.0)
    p_pairs: List[Tuple[float, float]] = Field(default_factory=lambda: [(1.0, float("inf")), (2.0, float("inf"))])

    @field_validator("d_grid")
    @classmethod
    def _in_unit_interval(cls, v):
        if not v or any(not 0.0 < d < 1.0 for d in v):
            raise ValueError("d_grid entries must lie in (0, 1)")
        return v

    @field_validator("p_pairs")
    @classmethod
    def _ordered(cls, v):
        for p, q in v:
            if not 1.0 <= p < q:
                raise ValueError(f"p pair ({p}, {q}) must satisfy 1 <= p < p'")
        return v


class ConeDemoSettings(_Section):
    nu: int = Field(default=8, ge=2)
    nv: int = Field(default=24, ge=3)
    seed: int = 7
    clt_n_list: List[int] = Field(default_factory=lambda: [200])
    clt_replicates: int = Field(default=100, ge=100)


class Settings(_Section):
    tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
    entropy: EntropySettings = Field(default_factory=EntropySettings)
    frechet: FrechetSettings = Field(default_factory=FrechetSettings)
    lp: LpSettings = Field(default_factory=LpSettings)
    cone_demo: ConeDemoSettings = Field(default_factory=ConeDemoSettings)
    clt: CltConfig = Field(default_factory=CltConfig)


def load_settings(path: Optional[Path] = None) -> Settings:
    """Settings from a YAML (or, without PyYAML, JSON) file; defaults when no path is given."""
    if path is None:
        return Settings()
    text = Path(path).read_text(encoding="utf-8")
    if _HAS_YAML:
        try:
            data = _yaml.safe_load(text)
        except _yaml.YAMLError as exc:
            raise ValueError(f"{path}: invalid YAML ({exc})") from exc
    else:
        try:
            data = json.loads(text)
        except Exception:
            raise RuntimeError(
                "PyYAML is not installed and the config file is not valid JSON.\n"
                "Install PyYAML (pip install PyYAML) to load YAML config."
            )

    if data is None:
        return Settings()
    if not isinstance(data, dict):
        raise ValueError("Config file must be a YAML/JSON mapping of sections")
    return Settings.model_validate(data)

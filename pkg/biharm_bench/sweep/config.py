import logging
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, field_validator, model_validator

from biharm_bench.criteria.residuals import CRITERIA

logger = logging.getLogger(__name__)

MIN_GRID_COUNT = 4


class Tolerances(BaseModel):
    """
    Pass/fail thresholds of a run.
    """

    # Structure defects (Lagrangian, fit, PNMC, Codazzi). Advisory: these get
    # structure verdicts and warnings but never change the exit status.
    geometry: float = 1e-8
    # Relative criterion residuals.
    criteria: float = 1e-6
    # Closed-form classification identities.
    identities: float = 1e-10

    @field_validator("geometry", "criteria", "identities")
    @classmethod
    def check_positive(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("Tolerances must be positive.")
        return value


class RunConfig(BaseModel):
    """
    Configuration of a verify run, loaded from YAML and overridden by flags.
    """

    # Catalog key of the immersion.
    immersion: str = "chen"
    # Dimension of the submanifold.
    m: int = 2
    # Index into the four mu roots (descending); ignored when mu is given.
    mu_root: Optional[int] = None
    # Explicit mu (exploratory or control values).
    mu: Optional[float] = None
    # Points per chart axis; one value is broadcast to every axis.
    grid: Optional[List[int]] = None
    tolerances: Tolerances = Tolerances()
    # Subset of the criteria; the catalog default when None.
    criteria: Optional[List[str]] = None
    # Report path; nothing is written when None.
    out: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    workers: int = 1
    # Seeds a random rotation of e_2..e_m per point.
    seed: Optional[int] = None
    # Run tracking.
    wandb_mode: Literal["disabled", "offline", "online"] = "disabled"
    wandb_project: str = "biharm-bench"

    @field_validator("m")
    @classmethod
    def check_dimension(cls, value: int) -> int:
        if value < 1:
            raise ValueError("m must be positive.")
        return value

    @field_validator("mu_root")
    @classmethod
    def check_root(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not 0 <= value <= 3:
            raise ValueError("mu_root must be in 0..3.")
        return value

    @field_validator("grid")
    @classmethod
    def check_grid(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and any(count < MIN_GRID_COUNT for count in value):
            raise ValueError(f"Grid counts must be at least {MIN_GRID_COUNT}.")
        return value

    @field_validator("criteria")
    @classmethod
    def check_criteria(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None:
            unknown = [name for name in value if name not in CRITERIA]
            if unknown:
                raise ValueError(f"Unknown criteria {unknown}; choose from {list(CRITERIA)}.")
        return value

    @field_validator("workers")
    @classmethod
    def check_workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("workers must be at least 1.")
        return value

    @model_validator(mode="after")
    def check_mu(self) -> "RunConfig":
        if self.mu is not None and self.mu == 0.0:
            raise ValueError("mu must be nonzero.")
        return self

    def grid_counts(self, chart_dimension: int) -> List[int]:
        if self.grid is None:
            return [32 if chart_dimension <= 2 else 8] * chart_dimension
        if len(self.grid) == 1:
            return list(self.grid) * chart_dimension
        if len(self.grid) != chart_dimension:
            raise ValueError(
                f"Grid has {len(self.grid)} counts for a {chart_dimension}-dimensional chart."
            )
        return list(self.grid)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read a YAML config (if any) and apply overrides; flags win over the file.
    """
    values: Dict[str, Any] = {}
    if path is not None:
        with open(path) as f:
            values = yaml.safe_load(f) or {}
        if not isinstance(values, dict):
            raise ValueError(f"Config {path} must be a key/value mapping.")
        logger.info("Loaded config from %s.", path)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "tolerances":
            merged = dict(values.get("tolerances") or {})
            merged.update({k: v for k, v in value.items() if v is not None})
            values["tolerances"] = merged
        else:
            values[key] = value
    return RunConfig(**values)

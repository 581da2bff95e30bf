"""Experiment configuration.

A config is a JSON document validated into ExperimentConfig. Command-line
flags override individual fields; flags that were not given are None and
leave the file value alone.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Literal, get_args

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from pbarrier.barriers.specs import FamilySpec
from pbarrier.core.errors import ParameterError
from pbarrier.core.models import PParams, SpaceTimePoint
from pbarrier.geometry.domains import DomainSpec
from pbarrier.residual.operators import DEGENERATE_FLOOR
from pbarrier.solver.probes import Verdict

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "PBARRIER_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "reports"

Command = Literal["verify-barrier", "probe", "scaling", "comparison", "calibrate"]
SenseName = Literal["supersolution", "subsolution", "solution"]

SENSE_CODES = {"supersolution": "super", "subsolution": "sub", "solution": "solution"}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSpec(_Section):
    """Spatial spacing and time levels of a rasterized mask."""

    h: float = Field(1.0 / 32, gt=0.0, description="Spatial grid spacing")
    levels: int | None = Field(None, ge=1, description="Uniform time levels; from level_factor when None")
    level_factor: float = Field(1.0, gt=0.0, description="Level length in units of h")
    align: Literal["cell", "node"] = "cell"


class SamplingSpec(_Section):
    samples: int = Field(10_000, ge=1)
    seed: int = 0
    tol: float = Field(1e-8, ge=0.0, description="Relative residual tolerance")
    step: float | None = Field(None, gt=0.0, description="FD step; 1e-4·bbox diameter when None")
    floor: float = Field(DEGENERATE_FLOOR, gt=0.0)
    per_point: bool = False
    sense: SenseName | None = Field(None, description="Defaults to the family's own sense")
    workers: int = Field(1, ge=1)


class ProbeSpec(_Section):
    point: str | None = Field("lateral", description="Named boundary point")
    target: SpaceTimePoint | None = Field(None, description="Explicit boundary point; wins over point")
    refinements: list[float] | None = Field(
        None, min_length=1, description="Grid spacings; scaled to the domain width when None"
    )
    r_max: float | None = Field(None, gt=0.0)
    alpha: float = Field(1.0, gt=0.0, description="Exponent of the datum |xi - xi0|^alpha")
    level_factor: float = Field(1.0, gt=0.0)
    workers: int = Field(1, ge=1)
    expect: Verdict | None = Field(None, description="Fail the run unless the verdict matches")
    export_grid: bool = False


class ScalingSpec(_Section):
    a: float = Field(8.0, gt=0.0, description="Time multiplier of the multiplied run")
    tol: float = Field(1e-10, ge=0.0)


class ComparisonSpec(_Section):
    pairs: int = Field(20, ge=1)
    bumps: int = Field(3, ge=1)
    tol: float = Field(1e-12, ge=0.0)


class ExperimentConfig(BaseModel):
    """Everything a command needs to run reproducibly."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    params: PParams
    domain: DomainSpec | None = None
    family: FamilySpec | None = None
    j: int | Literal["auto"] = Field("auto", description="Member index, or auto for j_min")
    ladder: bool = Field(False, description="Certify j_min, 2·j_min and 10·j_min")
    run_validation: bool = Field(False, description="Also run the family-condition checks")
    grid: GridSpec = Field(default_factory=GridSpec)
    sampling: SamplingSpec = Field(default_factory=SamplingSpec)
    probe: ProbeSpec = Field(default_factory=ProbeSpec)
    scaling: ScalingSpec = Field(default_factory=ScalingSpec)
    comparison: ComparisonSpec = Field(default_factory=ComparisonSpec)
    output_dir: str | None = None

    def config_checksum(self) -> str:
        """sha256 of the canonical JSON dump; output_dir is not part of the experiment."""
        data = self.model_dump(mode="json", exclude={"output_dir"})
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def resolved_output_dir(self) -> Path:
        """Explicit output_dir, else $PBARRIER_OUTPUT_DIR, else ./reports."""
        return resolve_output_dir(self.output_dir)

    def sense_code(self, default: str) -> str:
        if self.sampling.sense is None:
            return default
        return SENSE_CODES[self.sampling.sense]


def resolve_output_dir(explicit: str | Path | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def spec_fields(union: Any, kind: str) -> set[str]:
    """Field names of the member of a kind-discriminated spec union."""
    members = get_args(get_args(union)[0])
    for model in members:
        if model.model_fields["kind"].default == kind:
            return set(model.model_fields)
    return set()


def merge_overrides(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Recursively overlay the non-None values of overrides on base."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Load the raw JSON of a config file.

    Raises:
        ParameterError: If the file is missing or is not a JSON object
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ParameterError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ParameterError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ParameterError(f"config file {path} must hold a JSON object")
    return data


def build_config(
    data: dict[str, Any], overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """Validate data with overrides applied.

    Raises:
        ParameterError: If the merged document is not a valid config
    """
    merged = merge_overrides(data, overrides or {})
    try:
        config = ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ParameterError(f"invalid experiment config: {e}") from e
    logger.debug(f"Config {config.command} checksum {config.config_checksum()[:12]}")
    return config


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    return build_config(read_config_file(path), overrides)


def save_config(config: ExperimentConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.model_dump(mode="json"), f, indent=2, ensure_ascii=False)
    return path


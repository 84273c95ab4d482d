from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Any, Dict, List, Optional, Tuple
import hashlib
import json

import numpy as np

SCHEMA_VERSION = 1


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, validate_assignment=True)


class TargetConfig(StrictModel):
    n: int = Field(5, ge=1, le=8, description="Target photon number")
    delta_max: float = Field(30.0, gt=0, description="Upper bound on the detuning, units of chi")
    dim: Optional[int] = Field(None, ge=2, description="Truncation dimension; null applies the default rule")


class OptimizerConfig(StrictModel):
    seed: int = Field(1, ge=0, description="Seed of the perturbation generator")
    vertices: int = Field(60, ge=5, description="Number of path vertices")
    max_sweeps: int = Field(150, ge=1, description="Upper bound on sweeps per pass")
    min_sweeps: int = Field(60, ge=0, description="Sweeps before the convergence test is applied")
    sigma0: float = Field(0.5, gt=0, description="Initial perturbation amplitude")
    sigma_decay: float = Field(0.9, gt=0, le=1, description="Per-sweep amplitude decay")
    rel_tol: float = Field(1e-4, gt=0, description="Relative improvement per sweep that counts as converged")
    samples_per_edge: int = Field(8, ge=1, description="Quadrature samples per edge")
    rule: str = Field("midpoint", pattern="^(midpoint|gauss)$", description="Quadrature rule per edge")
    reweight: bool = Field(True, description="Redistribute vertices by sqrt(Q) after the first pass")


class ScheduleConfig(StrictModel):
    total_time: float = Field(11.0, gt=0, description="Total time T, units of 1/chi")
    stretch: float = Field(1.0, ge=1, description="Region-B stretch factor k")
    time_grid: List[float] = Field(
        default_factory=lambda: [float(t) for t in np.round(np.geomspace(1.0, 100.0, 9), 6)],
        min_length=1, description="Total times scanned by sweep and requirements")
    stretch_grid: List[float] = Field(
        default_factory=lambda: [1.0 + 0.25 * i for i in range(9)],
        min_length=1, description="Stretch factors scanned by sweep and requirements")
    grid_points: int = Field(4096, ge=2, description="Uniform time samples of an emitted schedule")

    @field_validator("time_grid")
    @classmethod
    def positive_times(cls, values: List[float]) -> List[float]:
        if any(v <= 0 for v in values):
            raise ValueError("total times must be positive")
        return values

    @field_validator("stretch_grid")
    @classmethod
    def stretches_at_least_one(cls, values: List[float]) -> List[float]:
        if any(v < 1 for v in values):
            raise ValueError("stretch factors must be >= 1")
        return values


class LossConfig(StrictModel):
    kappa: float = Field(1e-3, ge=0, description="Single-photon loss rate kappa/chi")
    kappa_grid: List[float] = Field(
        default_factory=lambda: [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
        min_length=1, description="Loss rates scanned downward by requirements")

    @field_validator("kappa_grid")
    @classmethod
    def non_negative(cls, values: List[float]) -> List[float]:
        if any(v < 0 for v in values):
            raise ValueError("loss rates must be non-negative")
        return values


class SimulationConfig(StrictModel):
    output_points: int = Field(201, ge=2, description="Output samples of a trajectory")
    snapshot_fractions: List[float] = Field(
        default_factory=lambda: [0.0, 0.03, 0.06, 0.1, 0.2, 1.0],
        min_length=1, description="t/T values at which Wigner grids are exported")
    wigner_resolution: int = Field(81, ge=3, description="Points per Wigner grid axis")
    step_factor: float = Field(0.05, gt=0, description="Bound on ||H|| dt for the RK4 step")
    verify_steps: bool = Field(False, description="Repeat each run with half the step and compare")

    @field_validator("snapshot_fractions")
    @classmethod
    def unit_interval(cls, values: List[float]) -> List[float]:
        if any(v < 0 or v > 1 for v in values):
            raise ValueError("snapshot fractions must lie in [0, 1]")
        return values


class ExportConfig(StrictModel):
    path: bool = True
    schedule: bool = True
    trajectory: bool = True
    wigner: bool = True
    sweep_table: bool = True


class OutputConfig(StrictModel):
    directory: str = Field("results", description="Directory for all artifacts")


class RunConfig(StrictModel):
    target: TargetConfig = Field(default_factory=TargetConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    exports: ExportConfig = Field(default_factory=ExportConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def sweep_bounds(self):
        if self.optimizer.min_sweeps > self.optimizer.max_sweeps:
            raise ValueError("optimizer.min_sweeps exceeds optimizer.max_sweeps")
        return self

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude={"output"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ArtifactBase(StrictModel):
    schema_version: int = SCHEMA_VERSION
    config_hash: str
    seed: int

    @field_validator("schema_version")
    @classmethod
    def known_version(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {value}")
        return value


class PathDocument(ArtifactBase):
    n_target: int
    delta_max: float
    delta_f: float
    dim: int
    total_penalty: float
    search: Dict[str, Any]
    vertices: List[Tuple[float, float]]
    regions: List[str]


class ScheduleDocument(ArtifactBase):
    n_target: int
    delta_max: float
    delta_f: float
    total_time: float
    stretch: float
    total_penalty: float
    columns: List[str]
    rows: List[Tuple[float, float, float, float, str]]


class SweepRow(StrictModel):
    n: int
    kappa: float
    T: float
    k: float
    fidelity: float = Field(ge=0, le=1 + 1e-9)
    penalty: float
    runtime: float

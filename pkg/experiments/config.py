"""
Experiment configuration and result models.

Configurations are JSON documents parsed with ExperimentConfig.model_validate_json;
command-line flags override individual fields.
"""
import hashlib
import math
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from config.settings import (
    MIE_CONFIG,
    PROBLEM_DEFAULTS,
    QUADRATURE_CONFIG,
    RESULTS_CONFIG,
    RESULTS_DIR,
    SOLVER_CONFIG,
)
from mesh.annulus import AnnulusMeshSpec, balanced_sectors, mesh_for_target_h
from pwdg.assembly import FluxParams
from reference.truncated import BoundaryCondition
from special_functions.dtn_symbols import recommended_truncation_order

CSV_COLUMNS = [
    "k", "h", "p", "N", "bc", "alpha", "beta", "delta", "Nh",
    "err_vs_exact", "err_vs_truncated", "cond_est", "seconds",
]


class SweepAxis(str, Enum):
    """Parameter varied across the points of one experiment."""
    NONE = "none"
    N = "N"
    H = "h"
    P = "p"
    HP = "hp"
    BC = "bc"


class ProblemConfig(BaseModel):
    """Scattering problem: disk of radius a, artificial circle of radius R."""
    model_config = {"frozen": True}

    k: float = Field(default=PROBLEM_DEFAULTS["k"], gt=0, description="Wavenumber")
    a: float = Field(default=PROBLEM_DEFAULTS["a"], gt=0, description="Scatterer radius")
    R: float = Field(default=PROBLEM_DEFAULTS["R"], gt=0, description="Artificial boundary radius")
    incident_angle: float = Field(
        default=PROBLEM_DEFAULTS["incident_angle"],
        description="Direction of the incident plane wave in radians",
    )

    @model_validator(mode="after")
    def _check_radii(self):
        if not self.a < self.R:
            raise ValueError(f"Need a < R, got a={self.a}, R={self.R}")
        return self


class SweepPoint(BaseModel):
    """One solve of a sweep; index fixes the CSV row order."""
    model_config = {"frozen": True}

    index: int
    n_layers: int
    n_sectors: int
    p: int
    N: int
    bc: BoundaryCondition

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_layers * self.n_sectors * self.p


class ExperimentConfig(BaseModel):
    """
    Full description of a single solve or a sweep.

    The mesh is given either by n_layers (sectors default to the balanced
    count) or by h_target. Sweep lists that do not belong to the chosen
    axis are ignored.
    """
    model_config = {"frozen": True}

    name: str = Field(default="experiment", description="Prefix of the output files")
    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    n_layers: Optional[int] = Field(default=None, ge=1, description="Radial mesh layers")
    n_sectors: Optional[int] = Field(default=None, ge=3, description="Angular mesh sectors")
    h_target: Optional[float] = Field(default=None, gt=0, description="Largest admissible mesh width")
    p: int = Field(default=7, ge=3, description="Plane waves per element")
    N: Union[int, Literal["auto"]] = Field(default="auto", description="DtN truncation order")
    flux: FluxParams = Field(default_factory=FluxParams)
    bc: BoundaryCondition = Field(default=BoundaryCondition.DTN, description="Artificial boundary condition")

    sweep: SweepAxis = Field(default=SweepAxis.NONE, description="Swept parameter")
    n_values: List[int] = Field(default_factory=list, description="Truncation orders for an N sweep")
    n_over_kr: List[float] = Field(default_factory=list, description="N / kR ratios for an N sweep")
    layers: List[int] = Field(default_factory=list, description="Radial layer counts for h sweeps")
    p_values: List[int] = Field(default_factory=list, description="Plane-wave counts for p sweeps")
    bcs: List[BoundaryCondition] = Field(
        default_factory=lambda: [BoundaryCondition.IMPEDANCE, BoundaryCondition.DTN],
        description="Boundary conditions compared by a bc sweep",
    )

    edge_points: int = Field(default=QUADRATURE_CONFIG["edge_points"], ge=2)
    l2_radial_points: int = Field(default=QUADRATURE_CONFIG["l2_radial_points"], ge=2)
    l2_angular_points: int = Field(default=QUADRATURE_CONFIG["l2_angular_points"], ge=8)
    n_exact: Optional[int] = Field(default=None, ge=1, description="Mie series truncation order")

    output_dir: Path = Field(default=RESULTS_DIR)
    write_svg: bool = True
    record_timings: bool = Field(default=True, description="False writes seconds=0 for byte-identical reruns")
    seed: int = Field(default=0, description="Seed for randomised checks")
    workers: int = Field(default=SOLVER_CONFIG["workers"], ge=1, description="Concurrent sweep points")
    max_dofs: int = Field(default=SOLVER_CONFIG["max_dofs"], ge=1, description="Upper bound on N_h")

    @field_validator("N")
    @classmethod
    def _check_order(cls, value):
        if isinstance(value, int) and value < 0:
            raise ValueError(f"N must be >= 0 or 'auto', got {value}")
        return value

    @field_validator("n_values", "layers")
    @classmethod
    def _check_positive_ints(cls, values: List[int]) -> List[int]:
        if any(v < 0 for v in values):
            raise ValueError(f"Sweep values must be non-negative, got {values}")
        return values

    @field_validator("p_values")
    @classmethod
    def _check_p_values(cls, values: List[int]) -> List[int]:
        if any(v < 3 for v in values):
            raise ValueError(f"Every p must be >= 3, got {values}")
        return values

    @field_validator("n_over_kr")
    @classmethod
    def _check_ratios(cls, values: List[float]) -> List[float]:
        if any(v <= 0.0 for v in values):
            raise ValueError(f"N/kR ratios must be positive, got {values}")
        return values

    @model_validator(mode="after")
    def _check_sweep(self):
        if self.n_layers is None and self.h_target is None and not self.layers:
            raise ValueError("Give n_layers, h_target or a list of layers")
        required = {
            SweepAxis.N: self.n_values or self.n_over_kr,
            SweepAxis.H: self.layers,
            SweepAxis.P: self.p_values,
            SweepAxis.HP: self.layers and self.p_values,
            SweepAxis.BC: self.bcs,
        }
        if self.sweep in required and not required[self.sweep]:
            raise ValueError(f"Sweep over {self.sweep.value} has no values")
        if self.n_exact is not None:
            floor = MIE_CONFIG["slope"] * self.problem.k * self.problem.a + MIE_CONFIG["min_margin"]
            if self.n_exact < floor:
                raise ValueError(f"n_exact={self.n_exact} below 1.5 ka + 30 = {floor:.1f}")
        return self

    def truncation_order(self) -> int:
        """N, resolving 'auto' to ceil(1.2 kR)."""
        if self.N == "auto":
            return recommended_truncation_order(self.problem.k, self.problem.R)
        return int(self.N)

    def mesh_spec(self, n_layers: Optional[int] = None) -> AnnulusMeshSpec:
        a, R = self.problem.a, self.problem.R
        if n_layers is None and self.n_layers is None and self.h_target is not None:
            return mesh_for_target_h(a, R, self.h_target)
        layers = n_layers if n_layers is not None else (self.n_layers or self.layers[-1])
        sectors = self.n_sectors if self.n_sectors is not None else balanced_sectors(a, R, layers)
        return AnnulusMeshSpec(a=a, R=R, n_layers=layers, n_sectors=sectors)

    def _n_values(self) -> List[int]:
        kr = self.problem.k * self.problem.R
        orders = list(self.n_values) + [int(math.ceil(ratio * kr)) for ratio in self.n_over_kr]
        return sorted(set(orders))

    def points(self) -> List[SweepPoint]:
        """Expand the sweep into ordered solve points."""
        base = self.mesh_spec() if self.sweep not in (SweepAxis.H, SweepAxis.HP) else None
        N = self.truncation_order()
        combos = []
        if self.sweep == SweepAxis.N:
            combos = [(base, self.p, n, self.bc) for n in self._n_values()]
        elif self.sweep == SweepAxis.H:
            combos = [(self.mesh_spec(layers), self.p, N, self.bc) for layers in self.layers]
        elif self.sweep == SweepAxis.P:
            combos = [(base, p, N, self.bc) for p in self.p_values]
        elif self.sweep == SweepAxis.HP:
            combos = [
                (self.mesh_spec(layers), p, N, self.bc)
                for p in self.p_values for layers in self.layers
            ]
        elif self.sweep == SweepAxis.BC:
            meshes = [self.mesh_spec(layers) for layers in self.layers] or [base]
            combos = [(spec, self.p, N, bc) for bc in self.bcs for spec in meshes]
        else:
            combos = [(base, self.p, N, self.bc)]
        return [
            SweepPoint(
                index=i, n_layers=spec.n_layers, n_sectors=spec.n_sectors, p=p, N=n, bc=bc,
            )
            for i, (spec, p, n, bc) in enumerate(combos)
        ]

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        return cls.model_validate_json(Path(path).read_text())


class ResultRow(BaseModel):
    """One CSV row; every numeric field finite."""
    model_config = {"frozen": True}

    k: float
    h: float = Field(description="Achieved mesh width")
    p: int
    N: int
    bc: BoundaryCondition
    alpha: float
    beta: float
    delta: float
    Nh: int = Field(description="Number of degrees of freedom")
    err_vs_exact: float = Field(description="Relative L2 error against the Mie series")
    err_vs_truncated: float = Field(description="Relative L2 error against the truncated reference")
    cond_est: float = Field(description="1-norm condition estimate")
    seconds: float = Field(ge=0.0, description="Wall time of the point")

    @field_validator("k", "h", "alpha", "beta", "delta", "err_vs_exact", "err_vs_truncated", "cond_est", "seconds")
    @classmethod
    def _check_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"Non-finite value {value}")
        return value

    def as_record(self) -> dict:
        record = self.model_dump()
        record["bc"] = self.bc.value
        return {column: record[column] for column in CSV_COLUMNS}


SCHEMA_VERSION = RESULTS_CONFIG["schema_version"]

"""
Experiment pipeline: validate, discretise, solve every sweep point, report.

Sweep points are independent. They run in worker threads bounded by a
semaphore and are reported in sweep order regardless of completion order.
"""
import asyncio
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from experiments import metrics
from experiments.config import ExperimentConfig, ResultRow, SweepAxis, SweepPoint
from experiments.report import write_field_csv, write_results_csv, write_svg
from experiments.validators import validate_experiment
from logging_config.logger import get_logger
from mesh.annulus import AnnulusMeshSpec, Mesh, build_annulus_mesh
from mesh.quadrature import QuadratureRule, annulus_l2_quadrature
from pwdg.assembly import assemble_system
from pwdg.basis import PlaneWaveSpace
from pwdg.dtn import DtnOperator
from pwdg.exceptions import SingularSystemError
from pwdg.linalg import factorize
from pwdg.solution import DiscreteSolution
from reference.incident import dirichlet_datum, dirichlet_modes, incident_direction
from reference.l2_error import relative_l2_error
from reference.mie import MieSeries
from reference.truncated import BoundaryCondition, truncated_mode_reference

logger = get_logger(__name__)

FIELD_RADIAL_SAMPLES = 40
FIELD_ANGULAR_SAMPLES = 180


@dataclass
class _Discretisation:
    mesh: Mesh
    space: PlaneWaveSpace
    dtn: Optional[DtnOperator] = None


@dataclass
class ExperimentResult:
    """Rows in sweep order plus the files written."""
    rows: List[ResultRow]
    solutions: Dict[int, DiscreteSolution] = field(default_factory=dict)
    csv_path: Optional[Path] = None
    svg_path: Optional[Path] = None


class ExperimentRunner:
    """Runs one ExperimentConfig end to end."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.problem = config.problem
        self.points: List[SweepPoint] = config.points()
        direction = incident_direction(self.problem.incident_angle)
        self.g = dirichlet_datum(self.problem.k, direction)

        self._meshes: Dict[Tuple[int, int], Mesh] = {}
        self._discretisations: Dict[Tuple[int, int, int], _Discretisation] = {}
        self.quadrature: Optional[QuadratureRule] = None
        self.mie: Optional[MieSeries] = None
        self._mie_values: Optional[np.ndarray] = None
        self._g_modes: Optional[np.ndarray] = None
        logger.info(f"Experiment runner initialized: '{config.name}', {len(self.points)} points")

    # ------------------------------------------------------------------
    # preparation
    # ------------------------------------------------------------------

    def _mesh(self, n_layers: int, n_sectors: int) -> Mesh:
        key = (n_layers, n_sectors)
        if key not in self._meshes:
            with metrics.time_phase("mesh"):
                spec = AnnulusMeshSpec(a=self.problem.a, R=self.problem.R, n_layers=n_layers, n_sectors=n_sectors)
                self._meshes[key] = build_annulus_mesh(spec)
        return self._meshes[key]

    def prepare(self):
        """
        Build meshes, spaces and DtN operators for every sweep point, and the
        Mie reference sampled on the L2 quadrature.

        One DtN operator of the largest requested order is built per
        discretisation; lower orders reuse its projection matrices.
        """
        config = self.config
        k, a, R = self.problem.k, self.problem.a, self.problem.R

        self.quadrature = annulus_l2_quadrature(a, R, config.l2_radial_points, config.l2_angular_points)
        self.mie = MieSeries.build(k, a, config.n_exact, self.problem.incident_angle)
        self._mie_values = self.mie(self.quadrature.nodes)
        self._g_modes = dirichlet_modes(k, a, self.mie.n_exact, self.problem.incident_angle)

        for point in self.points:
            key = (point.n_layers, point.n_sectors, point.p)
            if key not in self._discretisations:
                mesh = self._mesh(point.n_layers, point.n_sectors)
                self._discretisations[key] = _Discretisation(mesh, PlaneWaveSpace.build(mesh, k, point.p))

        for key, disc in self._discretisations.items():
            orders = [
                pt.N for pt in self.points
                if (pt.n_layers, pt.n_sectors, pt.p) == key and pt.bc == BoundaryCondition.DTN
            ]
            if orders:
                with metrics.time_phase("dtn"):
                    disc.dtn = DtnOperator.build(disc.mesh, disc.space, k, R, max(orders), config.edge_points)

        logger.info(
            f"Prepared {len(self._meshes)} meshes, {len(self._discretisations)} spaces, "
            f"Mie series to order {self.mie.n_effective}"
        )

    # ------------------------------------------------------------------
    # single point
    # ------------------------------------------------------------------

    def solve_point(self, point: SweepPoint) -> Tuple[ResultRow, DiscreteSolution]:
        """
        Assemble, factorise and solve one sweep point and measure its errors.

        Raises:
            SingularSystemError: Exactly singular system or infinite condition estimate
            ModeResonanceError: The truncated reference is resonant
        """
        if self.quadrature is None:
            self.prepare()
        config = self.config
        k, a, R = self.problem.k, self.problem.a, self.problem.R
        disc = self._discretisations[(point.n_layers, point.n_sectors, point.p)]
        impedance = point.bc == BoundaryCondition.IMPEDANCE
        started = time.perf_counter()

        try:
            with metrics.time_phase("assembly"):
                dtn = None if impedance else disc.dtn.with_order(point.N)
                system = assemble_system(
                    disc.mesh, disc.space, config.flux, k, dtn,
                    impedance=impedance, g=self.g, n_points=config.edge_points,
                )

            with metrics.time_phase("solve"):
                factors = factorize(system.A)
                coefficients = factors.solve(system.F)
                cond_est = factors.condition_estimate()
            if not math.isfinite(cond_est):
                raise SingularSystemError(-1, "Condition estimate is infinite")

            with metrics.time_phase("error"):
                solution = DiscreteSolution(disc.mesh, disc.space, coefficients)
                u_h = solution(self.quadrature.nodes)
                err_exact = relative_l2_error(u_h, self._mie_values, self.quadrature)
                truncated = truncated_mode_reference(k, a, R, point.N, self._g_modes, point.bc)
                err_truncated = relative_l2_error(u_h, truncated, self.quadrature)
        except Exception as e:
            metrics.record_failure(type(e).__name__)
            logger.error(f"Sweep point {point.index} failed: {e}")
            raise

        seconds = time.perf_counter() - started if config.record_timings else 0.0
        metrics.record_solve(point.bc.value, cond_est)
        row = ResultRow(
            k=k,
            h=disc.mesh.h,
            p=point.p,
            N=point.N,
            bc=point.bc,
            alpha=config.flux.alpha,
            beta=config.flux.beta,
            delta=config.flux.delta,
            Nh=disc.space.n_dofs,
            err_vs_exact=err_exact,
            err_vs_truncated=err_truncated,
            cond_est=cond_est,
            seconds=seconds,
        )
        logger.info(
            f"Point {point.index}: h={row.h:.4f}, p={row.p}, N={row.N}, bc={row.bc.value}, "
            f"N_h={row.Nh}, err={err_exact:.3e}, err_trunc={err_truncated:.3e}, cond={cond_est:.2e}"
        )
        return row, solution

    # ------------------------------------------------------------------
    # sweeps
    # ------------------------------------------------------------------

    async def solve_all(self) -> List[Tuple[ResultRow, DiscreteSolution]]:
        """Solve every point, at most config.workers at a time."""
        semaphore = asyncio.Semaphore(self.config.workers)

        async def run_one(point: SweepPoint):
            async with semaphore:
                return await asyncio.to_thread(self.solve_point, point)

        # gather keeps the order of its arguments
        return await asyncio.gather(*(run_one(point) for point in self.points))

    async def run_async(self, write_outputs: bool = True) -> ExperimentResult:
        config = self.config
        logger.info("=" * 70)
        logger.info(f"STARTING EXPERIMENT '{config.name}' (sweep={config.sweep.value})")
        logger.info("=" * 70)

        logger.info("Step 1: Validating configuration...")
        validate_experiment(config)

        logger.info("Step 2: Building meshes, spaces and references...")
        self.prepare()

        logger.info(f"Step 3: Solving {len(self.points)} points with {config.workers} worker(s)...")
        solved = await self.solve_all()
        result = ExperimentResult(
            rows=[row for row, _ in solved],
            solutions={point.index: solution for point, (_, solution) in zip(self.points, solved)},
        )

        if write_outputs:
            logger.info("Step 4: Writing results...")
            self.write_outputs(result)

        logger.info("=" * 70)
        logger.info(f"EXPERIMENT '{config.name}' COMPLETE")
        if result.csv_path is not None:
            logger.info(f"Results at: {result.csv_path}")
        logger.info("=" * 70)
        return result

    def run(self, write_outputs: bool = True) -> ExperimentResult:
        """Synchronous entry point."""
        return asyncio.run(self.run_async(write_outputs))

    # ------------------------------------------------------------------
    # outputs
    # ------------------------------------------------------------------

    def write_outputs(self, result: ExperimentResult) -> ExperimentResult:
        config = self.config
        output_dir = Path(config.output_dir)
        result.csv_path = write_results_csv(
            result.rows,
            output_dir / f"{config.name}.csv",
            config.config_hash(),
            config.name,
            config.sweep,
        )
        if config.write_svg and config.sweep != SweepAxis.NONE:
            result.svg_path = write_svg(
                result.rows, config.sweep, output_dir / f"{config.name}.svg",
                title=f"{config.name}: k={self.problem.k:g}",
            )
        return result

    def write_field(self, solution: DiscreteSolution, path: Path) -> Path:
        """Sample u_h and the exact field on a polar grid of cell midpoints."""
        a, R = self.problem.a, self.problem.R
        r = a + (R - a) * (np.arange(FIELD_RADIAL_SAMPLES) + 0.5) / FIELD_RADIAL_SAMPLES
        theta = 2.0 * math.pi * np.arange(FIELD_ANGULAR_SAMPLES) / FIELD_ANGULAR_SAMPLES
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        rr, tt = rr.ravel(), tt.ravel()
        points = np.column_stack([rr * np.cos(tt), rr * np.sin(tt)])
        return write_field_csv(path, rr, tt, solution(points), self.mie(points))


def run_experiment(config: ExperimentConfig, write_outputs: bool = True) -> ExperimentResult:
    """Main entry point for one experiment."""
    return ExperimentRunner(config).run(write_outputs)

"""
Tests for the experiment harness: configuration, validators, reports,
metrics, the runner and the command line.

Run:
    pytest tests/test_experiments.py -v
"""
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from config.settings import EXPERIMENT_CONFIG_DIR
from experiments import metrics
from experiments.cli import EXIT_CONFIG, EXIT_DOF_CAP, EXIT_NUMERICAL, EXIT_OK, build_parser, config_from_args, main
from experiments.config import CSV_COLUMNS, ExperimentConfig, ProblemConfig, ResultRow, SweepAxis
from experiments.report import (
    algebraic_rate,
    exponential_rate,
    fitted_rates,
    read_results_csv,
    render_svg,
    rows_to_frame,
    write_results_csv,
)
from experiments.runner import ExperimentRunner
from experiments.validators import validate_dof_cap, validate_experiment, validate_problem_envelope
from mesh import build_annulus_mesh
from pwdg import DofCapExceededError, SingularSystemError
from reference import BoundaryCondition, ZeroReferenceNormError
from special_functions import SpecialFunctionDomainError


# ============================================================================
# FIXTURES
# ============================================================================

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def tiny_config(tmp_path):
    """Smallest sensible solve: one layer, eight sectors, three plane waves."""
    return ExperimentConfig(
        name="tiny",
        problem=ProblemConfig(k=2.0),
        n_layers=1,
        n_sectors=8,
        p=3,
        N=3,
        output_dir=tmp_path,
        record_timings=False,
    )


def make_row(h, err, p=7, N=10, bc="dtn"):
    return ResultRow(
        k=4.0, h=h, p=p, N=N, bc=bc, alpha=0.5, beta=0.5, delta=0.5, Nh=100,
        err_vs_exact=err, err_vs_truncated=err / 2.0, cond_est=1.0e3, seconds=0.0,
    )


def tiny_argv(tmp_path, *extra):
    return [
        "solve", "--name", "tiny", "--k", "2", "--layers", "1", "--sectors", "8",
        "--p", "3", "--N", "3", "--output-dir", str(tmp_path), "--no-timings", *extra,
    ]


# ============================================================================
# CONFIGURATION
# ============================================================================

class TestExperimentConfig:
    """Validation and sweep expansion."""

    def test_single_point_defaults(self):
        """N='auto' resolves to ceil(1.2 kR) and sectors to the balanced count."""
        config = ExperimentConfig(n_layers=4)
        points = config.points()
        assert len(points) == 1
        point = points[0]
        assert point.N == 10
        assert point.n_sectors == 50
        assert point.n_dofs == 2 * 4 * 50 * 7
        assert point.bc == BoundaryCondition.DTN

    def test_h_target_mesh(self):
        """h_target picks a mesh no coarser than the target."""
        spec = ExperimentConfig(h_target=0.3).mesh_spec()
        assert build_annulus_mesh(spec).h <= 0.3

    def test_scatterer_inside_boundary(self):
        """a >= R is rejected."""
        with pytest.raises(ValidationError, match="a < R"):
            ProblemConfig(a=1.0, R=1.0)

    def test_mesh_required(self):
        """Some mesh description is mandatory."""
        with pytest.raises(ValidationError, match="n_layers, h_target or a list of layers"):
            ExperimentConfig()

    def test_empty_sweep(self):
        """A sweep axis without values is rejected."""
        with pytest.raises(ValidationError, match="Sweep over h has no values"):
            ExperimentConfig(n_layers=2, sweep="h")
        with pytest.raises(ValidationError, match="Sweep over N has no values"):
            ExperimentConfig(n_layers=2, sweep="N")

    def test_invalid_values(self):
        """Negative orders, p below 3 and a short Mie series raise."""
        with pytest.raises(ValidationError, match="N must be >= 0"):
            ExperimentConfig(n_layers=2, N=-1)
        with pytest.raises(ValidationError, match="p must be >= 3"):
            ExperimentConfig(n_layers=2, sweep="p", p_values=[2, 5])
        with pytest.raises(ValidationError, match="below 1.5 ka"):
            ExperimentConfig(n_layers=2, n_exact=10)
        with pytest.raises(ValidationError):
            ExperimentConfig(n_layers=2, p=2)

    def test_n_sweep_merges_ratios(self):
        """Explicit orders and ceil(ratio kR) are merged, sorted and deduplicated."""
        config = ExperimentConfig(n_layers=2, sweep="N", n_values=[2, 10], n_over_kr=[0.5, 1.2])
        assert [point.N for point in config.points()] == [2, 4, 10]
        assert [point.index for point in config.points()] == [0, 1, 2]

    def test_hp_order_is_p_major(self):
        """hp sweeps run every mesh for one p before the next p."""
        config = ExperimentConfig(sweep="hp", layers=[2, 3], p_values=[3, 5], N=4)
        assert [(pt.p, pt.n_layers) for pt in config.points()] == [(3, 2), (3, 3), (5, 2), (5, 3)]
        assert [pt.n_sectors for pt in config.points()] == [25, 38, 25, 38]

    def test_bc_order_is_bc_major(self):
        """bc sweeps list impedance first, then DtN, each over all meshes."""
        config = ExperimentConfig(sweep="bc", layers=[2, 3], N=4)
        assert [(pt.bc, pt.n_layers) for pt in config.points()] == [
            (BoundaryCondition.IMPEDANCE, 2),
            (BoundaryCondition.IMPEDANCE, 3),
            (BoundaryCondition.DTN, 2),
            (BoundaryCondition.DTN, 3),
        ]

    def test_config_hash(self):
        """Stable across instances, sensitive to every field."""
        first = ExperimentConfig(n_layers=2, p=5)
        assert first.config_hash() == ExperimentConfig(n_layers=2, p=5).config_hash()
        assert first.config_hash() != ExperimentConfig(n_layers=2, p=7).config_hash()
        assert len(first.config_hash()) == 64

    def test_from_file(self, tmp_path):
        """JSON files round-trip to an equal configuration."""
        config = ExperimentConfig(name="file", n_layers=3, sweep="p", p_values=[5, 7], N=12)
        path = tmp_path / "config.json"
        path.write_text(config.model_dump_json())
        assert ExperimentConfig.from_file(path) == config

    def test_shipped_configurations(self):
        """Every bundled configuration parses and passes the feasibility checks."""
        paths = sorted(Path(EXPERIMENT_CONFIG_DIR).glob("*.json"))
        assert len(paths) >= 6
        for path in paths:
            config = ExperimentConfig.from_file(path).model_copy(update={"max_dofs": 6000})
            assert validate_experiment(config) is True


class TestResultRow:
    """CSV rows."""

    def test_record_order(self):
        """as_record follows the CSV column order with the bc value as text."""
        record = make_row(0.1, 1e-3).as_record()
        assert list(record) == CSV_COLUMNS
        assert record["bc"] == "dtn"

    def test_non_finite_rejected(self):
        """NaN and infinite errors are refused."""
        with pytest.raises(ValidationError, match="Non-finite"):
            make_row(0.1, math.nan)
        with pytest.raises(ValidationError, match="Non-finite"):
            ResultRow.model_validate({**make_row(0.1, 1e-3).model_dump(), "cond_est": math.inf})

    def test_negative_seconds(self):
        """Wall time is non-negative."""
        with pytest.raises(ValidationError):
            ResultRow.model_validate({**make_row(0.1, 1e-3).model_dump(), "seconds": -1.0})


# ============================================================================
# VALIDATORS
# ============================================================================

class TestValidators:
    """Feasibility checks before allocation."""

    def test_small_experiment_passes(self, tiny_config):
        """The tiny configuration is feasible."""
        assert validate_experiment(tiny_config) is True

    def test_dof_cap(self):
        """N_h above max_dofs raises with both numbers."""
        config = ExperimentConfig(n_layers=10, p=30, max_dofs=6000)
        with pytest.raises(DofCapExceededError) as info:
            validate_dof_cap(config)
        assert info.value.cap == 6000
        assert info.value.n_dofs > 6000

    def test_argument_envelope(self):
        """kR beyond the special-function envelope raises."""
        config = ExperimentConfig(problem=ProblemConfig(k=600.0), n_layers=1)
        with pytest.raises(SpecialFunctionDomainError, match="kR"):
            validate_problem_envelope(config)

    def test_order_envelope(self):
        """Truncation and Mie orders above the supported order raise."""
        with pytest.raises(SpecialFunctionDomainError, match="N=250"):
            validate_problem_envelope(ExperimentConfig(n_layers=1, N=250))
        with pytest.raises(SpecialFunctionDomainError, match="n_exact=250"):
            validate_problem_envelope(ExperimentConfig(n_layers=1, n_exact=250))

    def test_dof_cap_checked_before_assembly(self, tmp_path):
        """A capped run never reaches assembly."""
        config = ExperimentConfig(n_layers=10, p=30, max_dofs=6000, output_dir=tmp_path)
        with patch("experiments.runner.assemble_system") as assemble:
            with pytest.raises(DofCapExceededError):
                ExperimentRunner(config).run(write_outputs=False)
        assemble.assert_not_called()


# ============================================================================
# REPORTS
# ============================================================================

class TestRates:
    """Fitted convergence rates."""

    def test_algebraic_rate(self):
        """err = C h^3.5 fits slope 3.5."""
        h = [0.4, 0.2, 0.1, 0.05]
        assert algebraic_rate(h, [3.0 * x ** 3.5 for x in h]) == pytest.approx(3.5, rel=1e-10)

    def test_exponential_rate(self):
        """err = C exp(-1.3 p) fits 1.3."""
        p = [5, 7, 9, 11]
        assert exponential_rate(p, [2.0 * math.exp(-1.3 * x) for x in p]) == pytest.approx(1.3, rel=1e-10)

    def test_rate_needs_two_points(self):
        """One point or non-positive data raise."""
        with pytest.raises(ValueError, match="two distinct"):
            algebraic_rate([0.1], [1e-3])
        with pytest.raises(ValueError, match="positive"):
            algebraic_rate([0.2, 0.1], [1e-3, 0.0])

    def test_grouped_labels(self):
        """hp sweeps report one rate per p, bc sweeps one per condition."""
        rows = [make_row(h, h ** (p - 2), p=p) for p in (5, 7) for h in (0.4, 0.2, 0.1)]
        rates = fitted_rates(rows_to_frame(rows), SweepAxis.HP)
        assert rates["rate_h[p=5]"] == pytest.approx(3.0, rel=1e-10)
        assert rates["rate_h[p=7]"] == pytest.approx(5.0, rel=1e-10)
        assert rates["rate_h_truncated[p=7]"] == pytest.approx(5.0, rel=1e-10)

        rows = [make_row(h, h ** 2, bc=bc) for bc in ("impedance", "dtn") for h in (0.4, 0.2)]
        assert set(fitted_rates(rows_to_frame(rows), SweepAxis.BC)) == {
            "rate_h[bc=impedance]", "rate_h_truncated[bc=impedance]",
            "rate_h[bc=dtn]", "rate_h_truncated[bc=dtn]",
        }

    def test_n_sweep_plateau(self):
        """N sweeps report the final error."""
        rows = [make_row(0.1, err, N=n) for n, err in ((2, 1e-1), (8, 1e-3), (16, 5e-4))]
        assert fitted_rates(rows_to_frame(rows), SweepAxis.N) == {"plateau_error": 5e-4}


class TestResultsCsv:
    """Preamble, rows and footer."""

    def test_layout_and_round_trip(self, tmp_path):
        """Header lines are fixed and the footer rates read back."""
        h = [0.4, 0.2, 0.1]
        rows = [make_row(x, 3.0 * x ** 3.5) for x in h]
        path = write_results_csv(rows, tmp_path / "out.csv", "abc123", "demo", SweepAxis.H)

        lines = path.read_text().splitlines()
        assert lines[0] == "# pwdg results schema=1 config_sha256=abc123 name=demo"
        assert lines[1] == ",".join(CSV_COLUMNS)
        assert lines[-2].startswith("# rate_h = ")

        frame, rates = read_results_csv(path)
        assert list(frame.columns) == CSV_COLUMNS
        assert len(frame) == 3
        assert list(frame["bc"]) == ["dtn"] * 3
        assert rates["rate_h"] == pytest.approx(3.5, rel=1e-6)
        assert rates["rate_h_truncated"] == pytest.approx(3.5, rel=1e-6)


class TestSvg:
    """Line charts."""

    def test_h_sweep_chart(self):
        """Well-formed SVG with one polyline per error series."""
        rows = [make_row(x, x ** 3) for x in (0.4, 0.2, 0.1)]
        root = ET.fromstring(render_svg(rows, SweepAxis.H, "h sweep"))
        assert root.tag == f"{SVG_NS}svg"
        assert len(root.findall(f"{SVG_NS}polyline")) == 2
        assert any(text.text == "1/h" for text in root.findall(f"{SVG_NS}text"))

    def test_grouped_chart(self):
        """hp charts draw one polyline per p."""
        rows = [make_row(h, h ** p, p=p) for p in (3, 5, 7) for h in (0.4, 0.2)]
        root = ET.fromstring(render_svg(rows, SweepAxis.HP, "hp sweep"))
        assert len(root.findall(f"{SVG_NS}polyline")) == 3


# ============================================================================
# RUNNER
# ============================================================================

@pytest.mark.integration
class TestRunner:
    """End-to-end runs on the tiny configuration."""

    def test_single_solve(self, tiny_config):
        """One row with the expected discretisation and positive errors."""
        result = ExperimentRunner(tiny_config).run()
        assert len(result.rows) == 1
        row = result.rows[0]
        assert row.Nh == 2 * 1 * 8 * 3
        assert row.N == 3
        assert row.seconds == 0.0
        assert row.err_vs_exact > 0.0
        assert row.err_vs_truncated > 0.0
        assert result.csv_path == tiny_config.output_dir / "tiny.csv"
        assert result.svg_path is None

    def test_rerun_is_byte_identical(self, tiny_config):
        """Without timings two runs write the same bytes."""
        first = ExperimentRunner(tiny_config).run().csv_path.read_bytes()
        second = ExperimentRunner(tiny_config).run().csv_path.read_bytes()
        assert first == second
        assert first.decode().splitlines()[0].endswith(f"config_sha256={tiny_config.config_hash()} name=tiny")

    @pytest.mark.asyncio
    async def test_concurrent_sweep_keeps_order(self, tiny_config):
        """Rows come back in sweep order with several workers."""
        config = tiny_config.model_copy(update={"sweep": SweepAxis.N, "n_values": [0, 2, 4], "workers": 2})
        result = await ExperimentRunner(config).run_async(write_outputs=False)
        assert [row.N for row in result.rows] == [0, 2, 4]
        assert set(result.solutions) == {0, 1, 2}
        assert result.csv_path is None

    def test_sweep_writes_svg(self, tiny_config):
        """Sweeps also produce a chart."""
        config = tiny_config.model_copy(update={"sweep": SweepAxis.N, "n_values": [1, 3]})
        result = ExperimentRunner(config).run()
        assert result.svg_path is not None
        ET.fromstring(result.svg_path.read_text())

    def test_field_samples(self, tiny_config, tmp_path):
        """The field CSV holds the polar grid with both fields."""
        runner = ExperimentRunner(tiny_config)
        result = runner.run(write_outputs=False)
        path = runner.write_field(result.solutions[0], tmp_path / "field.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "r,theta,x,y,abs_uh,re_uh,abs_u,re_u"
        assert len(lines) == 1 + 40 * 180

    def test_solve_counter(self, tiny_config):
        """Each solve increments the Prometheus counter."""
        before = metrics.REGISTRY.get_sample_value("pwdg_solves_total", {"bc": "dtn"}) or 0.0
        ExperimentRunner(tiny_config).run(write_outputs=False)
        after = metrics.REGISTRY.get_sample_value("pwdg_solves_total", {"bc": "dtn"})
        assert after == before + 1.0

    def test_unknown_phase(self):
        """Only the known phases are timed."""
        with pytest.raises(ValueError, match="Unknown phase"):
            metrics.time_phase("plotting")


# ============================================================================
# COMMAND LINE
# ============================================================================

@pytest.mark.integration
class TestCli:
    """Argument parsing and exit codes."""

    def test_solve(self, tmp_path):
        """solve exits 0 and writes results, field samples and metrics."""
        metrics_file = tmp_path / "metrics.prom"
        field_csv = tmp_path / "field.csv"
        code = main(tiny_argv(tmp_path, "--metrics-file", str(metrics_file), "--field-csv", str(field_csv)))
        assert code == EXIT_OK
        assert (tmp_path / "tiny.csv").exists()
        assert field_csv.exists()
        assert "pwdg_solves_total" in metrics_file.read_text()

    def test_configuration_errors(self, tmp_path):
        """Invalid values exit 2."""
        assert main(tiny_argv(tmp_path, "--a", "2")) == EXIT_CONFIG
        assert main(["solve", "--layers", "1", "--N", "abc", "--output-dir", str(tmp_path)]) == EXIT_CONFIG
        assert main(["sweep-h", "--p", "3", "--output-dir", str(tmp_path)]) == EXIT_CONFIG

    def test_dof_cap_exit(self, tmp_path):
        """Discretisations above the cap exit 4."""
        assert main(["solve", "--layers", "10", "--p", "30", "--output-dir", str(tmp_path)]) == EXIT_DOF_CAP

    def test_singular_exit(self, tmp_path):
        """A singular factorisation exits 3."""
        with patch("experiments.runner.factorize", side_effect=SingularSystemError(0)):
            assert main(tiny_argv(tmp_path)) == EXIT_NUMERICAL

    def test_zero_reference_norm_exit(self, tmp_path):
        """A zero reference norm is a numerical failure, not a configuration error."""
        error = ZeroReferenceNormError("Reference field has zero L2 norm")
        with patch("experiments.runner.relative_l2_error", side_effect=error):
            assert main(tiny_argv(tmp_path)) == EXIT_NUMERICAL

    def test_flags_override_config_file(self, tmp_path):
        """--config supplies defaults, flags win."""
        path = tmp_path / "base.json"
        path.write_text(json.dumps({
            "name": "base",
            "problem": {"k": 4.0, "a": 0.5, "R": 1.0},
            "n_layers": 3,
            "p": 9,
            "N": 12,
        }))
        args = build_parser().parse_args(["sweep-p", "--config", str(path), "--k", "6", "--p-values", "5", "7"])
        config = config_from_args(args)
        assert config.name == "base"
        assert config.problem.k == 6.0
        assert config.n_layers == 3
        assert config.N == 12
        assert config.sweep == SweepAxis.P
        assert config.p_values == [5, 7]

    def test_auto_order_flag(self, tmp_path):
        """--N auto is kept as text."""
        args = build_parser().parse_args(["solve", "--layers", "2", "--N", "auto", "--output-dir", str(tmp_path)])
        assert config_from_args(args).N == "auto"

"""
Result tables, fitted convergence rates and SVG line charts.

CSV layout:
    # pwdg results schema=<version> config_sha256=<hash> name=<name>
    k,h,p,N,bc,alpha,beta,delta,Nh,err_vs_exact,err_vs_truncated,cond_est,seconds
    ... one row per sweep point, in sweep order ...
    # <rate label> = <value>
"""
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import RESULTS_CONFIG
from experiments.config import CSV_COLUMNS, SCHEMA_VERSION, ResultRow, SweepAxis
from logging_config.logger import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = RESULTS_CONFIG["float_format"]
SVG_WIDTH = RESULTS_CONFIG["svg_width"]
SVG_HEIGHT = RESULTS_CONFIG["svg_height"]
SERIES_COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def rows_to_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.as_record() for row in rows], columns=CSV_COLUMNS)


# ============================================================================
# RATES
# ============================================================================

def algebraic_rate(h: Sequence[float], errors: Sequence[float]) -> float:
    """
    Least-squares slope of log(error) against log(h).

    Raises:
        ValueError: Fewer than two points or non-positive data
    """
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if h.size < 2 or np.unique(h).size < 2:
        raise ValueError("A rate needs at least two distinct mesh widths")
    if np.any(h <= 0.0) or np.any(errors <= 0.0):
        raise ValueError("Mesh widths and errors must be positive")
    slope, _ = np.polyfit(np.log(h), np.log(errors), 1)
    return float(slope)


def exponential_rate(values: Sequence[float], errors: Sequence[float]) -> float:
    """b in error ~ C exp(-b x), fitted on a semi-log scale."""
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if values.size < 2 or np.unique(values).size < 2:
        raise ValueError("A rate needs at least two distinct parameter values")
    if np.any(errors <= 0.0):
        raise ValueError("Errors must be positive")
    slope, _ = np.polyfit(values, np.log(errors), 1)
    return float(-slope)


def _group_column(frame: pd.DataFrame, axis: SweepAxis) -> Optional[str]:
    if axis == SweepAxis.HP:
        return "p"
    if axis == SweepAxis.BC:
        return "bc"
    return None


def fitted_rates(frame: pd.DataFrame, axis: SweepAxis) -> Dict[str, float]:
    """Rates written to the CSV footer, keyed by label."""
    rates: Dict[str, float] = {}
    if axis in (SweepAxis.H, SweepAxis.HP, SweepAxis.BC):
        column = _group_column(frame, axis)
        groups = frame.groupby(column, sort=False) if column else [(None, frame)]
        for key, group in groups:
            if group["h"].nunique() < 2:
                continue
            label = "rate_h" if key is None else f"rate_h[{column}={key}]"
            rates[label] = algebraic_rate(group["h"], group["err_vs_exact"])
            rates[label.replace("rate_h", "rate_h_truncated")] = algebraic_rate(
                group["h"], group["err_vs_truncated"]
            )
    elif axis == SweepAxis.P and frame["p"].nunique() >= 2:
        rates["rate_p_exponential"] = exponential_rate(frame["p"], frame["err_vs_exact"])
    elif axis == SweepAxis.N and len(frame) >= 1:
        rates["plateau_error"] = float(frame["err_vs_exact"].iloc[-1])
    return rates


# ============================================================================
# CSV
# ============================================================================

def write_results_csv(
    rows: Sequence[ResultRow],
    path: Path,
    config_hash: str,
    name: str,
    axis: SweepAxis = SweepAxis.NONE,
) -> Path:
    """
    Write rows with a provenance preamble and a rate footer.

    Args:
        rows: Result rows in sweep order
        path: Output file
        config_hash: SHA-256 of the experiment configuration
        name: Experiment name
        axis: Swept parameter, selects the fitted rates

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = rows_to_frame(rows)
    rates = fitted_rates(frame, axis)

    with open(path, "w", newline="") as handle:
        handle.write(f"# pwdg results schema={SCHEMA_VERSION} config_sha256={config_hash} name={name}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        for label, value in rates.items():
            handle.write(f"# {label} = {value:.6e}\n")

    logger.info(f"Results written to {path} ({len(frame)} rows)")
    for label, value in rates.items():
        logger.info(f"  {label} = {value:.4f}")
    return path


def read_results_csv(path: Path) -> Tuple[pd.DataFrame, Dict[str, float]]:
    """Read a results file back into a frame and its footer rates."""
    path = Path(path)
    frame = pd.read_csv(path, comment="#")
    rates = {}
    for line in path.read_text().splitlines()[1:]:
        if line.startswith("# ") and " = " in line:
            label, value = line[2:].split(" = ", 1)
            rates[label] = float(value)
    return frame, rates


def write_field_csv(
    path: Path,
    r: np.ndarray,
    theta: np.ndarray,
    u_h: np.ndarray,
    u: np.ndarray,
) -> Path:
    """Samples of the discrete and exact scattered fields on a polar grid."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({
        "r": r,
        "theta": theta,
        "x": r * np.cos(theta),
        "y": r * np.sin(theta),
        "abs_uh": np.abs(u_h),
        "re_uh": np.real(u_h),
        "abs_u": np.abs(u),
        "re_u": np.real(u),
    })
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Field samples written to {path} ({len(frame)} points)")
    return path


# ============================================================================
# SVG
# ============================================================================

class _Scale:
    """Affine map from (optionally logarithmic) data to pixels."""

    def __init__(self, low: float, high: float, start: float, stop: float, log: bool):
        self.log = log
        self.low = math.log10(low) if log else low
        self.high = math.log10(high) if log else high
        if self.high == self.low:
            self.low, self.high = self.low - 0.5, self.high + 0.5
        self.start, self.stop = start, stop

    def __call__(self, value: float) -> float:
        value = math.log10(value) if self.log else value
        return self.start + (value - self.low) / (self.high - self.low) * (self.stop - self.start)

    def ticks(self) -> List[float]:
        if self.log:
            decades = [10.0 ** e for e in range(math.ceil(self.low), math.floor(self.high) + 1)]
            return decades if len(decades) >= 2 else list(10.0 ** np.linspace(self.low, self.high, 4))
        return list(np.linspace(self.low, self.high, 5))


def _axis_x(frame: pd.DataFrame, axis: SweepAxis) -> Tuple[np.ndarray, str, bool]:
    if axis in (SweepAxis.H, SweepAxis.HP, SweepAxis.BC):
        return 1.0 / frame["h"].to_numpy(), "1/h", True
    if axis == SweepAxis.P:
        return frame["p"].to_numpy(dtype=float), "p", False
    return frame["N"].to_numpy(dtype=float), "N", False


def _series(frame: pd.DataFrame, axis: SweepAxis) -> List[Tuple[str, np.ndarray, np.ndarray]]:
    x, _, _ = _axis_x(frame, axis)
    column = _group_column(frame, axis)
    series = []
    if column is None:
        series.append(("vs exact", x, frame["err_vs_exact"].to_numpy()))
        series.append(("vs truncated", x, frame["err_vs_truncated"].to_numpy()))
    else:
        for key in pd.unique(frame[column]):
            mask = (frame[column] == key).to_numpy()
            series.append((f"{column}={key}", x[mask], frame["err_vs_exact"].to_numpy()[mask]))
    return series


def render_svg(rows: Sequence[ResultRow], axis: SweepAxis, title: str) -> str:
    """
    Line chart of the relative L2 errors: log-log against 1/h for h sweeps,
    semi-log against N or p otherwise.
    """
    frame = rows_to_frame(rows)
    _, x_label, x_log = _axis_x(frame, axis)
    series = _series(frame, axis)
    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2] for s in series])
    ys = ys[ys > 0.0]
    if ys.size == 0:
        ys = np.array([1.0])

    left, right, top, bottom = 70, SVG_WIDTH - 150, 40, SVG_HEIGHT - 50
    sx = _Scale(float(xs.min()), float(xs.max()), left, right, x_log)
    sy = _Scale(float(ys.min()), float(ys.max()), bottom, top, True)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{SVG_WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>',
        f'<text x="{(left + right) / 2:.1f}" y="{SVG_HEIGHT - 12}" text-anchor="middle">{x_label}</text>',
        f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(top + bottom) / 2:.1f})">relative L2 error</text>',
    ]
    for tick in sx.ticks():
        px = sx(tick)
        parts.append(f'<line x1="{px:.1f}" y1="{bottom}" x2="{px:.1f}" y2="{bottom + 4}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{bottom + 16}" text-anchor="middle">{tick:.3g}</text>')
    for tick in sy.ticks():
        py = sy(tick)
        parts.append(f'<line x1="{left - 4}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="black"/>')
        parts.append(f'<text x="{left - 6}" y="{py + 4:.1f}" text-anchor="end">{tick:.0e}</text>')

    for i, (label, x, y) in enumerate(series):
        colour = SERIES_COLOURS[i % len(SERIES_COLOURS)]
        keep = y > 0.0
        points = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x[keep], y[keep]))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        for a, b in zip(x[keep], y[keep]):
            parts.append(f'<circle cx="{sx(a):.1f}" cy="{sy(b):.1f}" r="2.5" fill="{colour}"/>')
        ly = top + 16 * i
        parts.append(f'<line x1="{right + 15}" y1="{ly}" x2="{right + 35}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        parts.append(f'<text x="{right + 40}" y="{ly + 4}">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(rows: Sequence[ResultRow], axis: SweepAxis, path: Path, title: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(rows, axis, title))
    logger.info(f"Plot written to {path}")
    return path

"""
Prometheus metrics for experiment runs.

The collectors live in their own registry so a batch run can dump them with
write_to_textfile instead of serving an HTTP endpoint.
"""
from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

from logging_config.logger import get_logger

logger = get_logger(__name__)

METRIC_NAMESPACE = "pwdg"

REGISTRY = CollectorRegistry()

# ========== Custom Prometheus Metrics ==========

solves_total = Counter(
    "solves_total",
    "Completed PWDG solves by artificial boundary condition",
    labelnames=["bc"],
    namespace=METRIC_NAMESPACE,
    registry=REGISTRY,
)

failures_total = Counter(
    "failures_total",
    "Failed sweep points by failure kind",
    labelnames=["kind"],
    namespace=METRIC_NAMESPACE,
    registry=REGISTRY,
)

phase_seconds = Histogram(
    "phase_seconds",
    "Wall time per solver phase",
    labelnames=["phase"],
    namespace=METRIC_NAMESPACE,
    registry=REGISTRY,
    buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0),
)

condition_estimate = Gauge(
    "condition_estimate",
    "1-norm condition estimate of the last factorised system",
    namespace=METRIC_NAMESPACE,
    registry=REGISTRY,
)

PHASES = ("mesh", "assembly", "dtn", "solve", "error")


# ========== Helper Functions ==========

def time_phase(phase: str):
    """Context manager observing the duration of one phase."""
    if phase not in PHASES:
        raise ValueError(f"Unknown phase '{phase}', expected one of {PHASES}")
    return phase_seconds.labels(phase=phase).time()


def record_solve(bc: str, cond_est: float):
    solves_total.labels(bc=bc).inc()
    condition_estimate.set(cond_est)


def record_failure(kind: str):
    failures_total.labels(kind=kind).inc()
    logger.debug(f"Failure tracked: {kind}")


def write_metrics(path: Path) -> Path:
    """Write the registry in the Prometheus text format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
    logger.info(f"Metrics written to {path}")
    return path

"""
Solver and experiment configuration settings.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base paths
PROJECT_ROOT = Path(__file__).parent.parent
RESULTS_DIR = Path(os.getenv("PWDG_RESULTS_DIR", PROJECT_ROOT / "results"))
EXPERIMENT_CONFIG_DIR = PROJECT_ROOT / "experiment_configs"

# Ensure directories exist
RESULTS_DIR.mkdir(parents=True, exist_ok=True)

# Logging configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")  # INFO, DEBUG, WARNING, ERROR
VERBOSE = os.getenv("VERBOSE", "false").lower() == "true"

# Scattering problem (disk of radius a inside the artificial circle of radius R)
PROBLEM_DEFAULTS = {
    "k": 8.0,
    "a": 0.5,
    "R": 1.0,
    "incident_angle": 0.0,
}

# Numerical flux coefficients
FLUX_DEFAULTS = {
    "alpha": 0.5,
    "beta": 0.5,
    "delta": 0.5,
}

QUADRATURE_CONFIG = {
    "edge_points": 20,
    "l2_radial_points": 32,
    "l2_angular_points": 256,
    "arc_samples": 33,
}

# Supported envelope of the Bessel/Hankel kernels
SPECFUN_CONFIG = {
    "max_order": 200,
    "max_argument": 500.0,
    "asymptotic_threshold": 25.0,
    "asymptotic_terms": 24,
    "rescale_threshold": 1.0e250,
}

SOLVER_CONFIG = {
    "max_dofs": int(os.getenv("PWDG_MAX_DOFS", "6000")),
    "workers": int(os.getenv("PWDG_WORKERS", "1")),
    "nonnegativity_tolerance": 1.0e-10,
    "condition_warning": 1.0e12,
    "growth_warning": 1.0e8,
}

MIE_CONFIG = {
    "default_truncation": 100,
    "min_margin": 30,
    "slope": 1.5,
}

# DtN truncation rule of thumb, N >= factor * kR
DTN_CONFIG = {
    "auto_factor": 1.2,
}

RESULTS_CONFIG = {
    "schema_version": 1,
    "float_format": "%.12e",
    "svg_width": 640,
    "svg_height": 420,
}

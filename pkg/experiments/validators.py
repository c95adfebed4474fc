"""
Feasibility checks run on an experiment before anything is allocated.
"""
from config.settings import SPECFUN_CONFIG
from experiments.config import ExperimentConfig
from logging_config.logger import get_logger
from pwdg.exceptions import DofCapExceededError
from reference.mie import default_truncation
from reference.truncated import BoundaryCondition
from special_functions.bessel import SpecialFunctionDomainError
from special_functions.dtn_symbols import recommended_truncation_order

logger = get_logger(__name__)


def validate_problem_envelope(config: ExperimentConfig) -> bool:
    """Validate the problem against the special-function envelope."""
    problem = config.problem
    max_argument = SPECFUN_CONFIG["max_argument"]
    max_order = SPECFUN_CONFIG["max_order"]

    if problem.k * problem.R > max_argument:
        raise SpecialFunctionDomainError(
            f"kR={problem.k * problem.R:.4g} exceeds the supported argument {max_argument}"
        )

    n_exact = config.n_exact if config.n_exact is not None else default_truncation(problem.k, problem.a)
    # the reference solutions need one order above n_exact
    if n_exact + 1 > max_order:
        raise SpecialFunctionDomainError(f"n_exact={n_exact} needs orders above {max_order}")

    for point in config.points():
        if point.N > max_order:
            raise SpecialFunctionDomainError(f"N={point.N} exceeds the supported order {max_order}")

    return True


def validate_dof_cap(config: ExperimentConfig) -> bool:
    """Every sweep point must stay within max_dofs."""
    for point in config.points():
        if point.n_dofs > config.max_dofs:
            raise DofCapExceededError(point.n_dofs, config.max_dofs)
    return True


def validate_experiment(config: ExperimentConfig) -> bool:
    """
    Run every feasibility check.

    Raises:
        SpecialFunctionDomainError: Orders or arguments outside the envelope
        DofCapExceededError: A sweep point exceeds the DOF cap
    """
    validate_problem_envelope(config)
    validate_dof_cap(config)

    recommended = recommended_truncation_order(config.problem.k, config.problem.R)
    for point in config.points():
        if point.bc == BoundaryCondition.DTN and point.N < recommended:
            logger.debug(f"N={point.N} below the recommended order {recommended} (point {point.index})")

    logger.debug(f"Experiment '{config.name}' validated: {len(config.points())} points")
    return True

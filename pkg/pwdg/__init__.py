from .assembly import (
    FluxParams,
    LinearSystem,
    apply_form,
    assemble_rhs,
    assemble_system,
    dg_seminorm,
    quadratic_form_terms,
)
from .basis import PlaneWaveSpace, directions, eval_plane_wave
from .dtn import (
    DtnOperator,
    adjoint_symbol_diagonal,
    apply_truncated_dtn,
    assemble_dtn_block,
    build_projection_matrices,
    build_symbol_diagonal,
    project_trace,
)
from .exceptions import (
    DofCapExceededError,
    NonNegativityViolation,
    PwdgError,
    SingularSystemError,
    SystemDimensionError,
)
from .linalg import LuFactorization, condition_estimate, factorize, lu_solve
from .solution import DiscreteSolution

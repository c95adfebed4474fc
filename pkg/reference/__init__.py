from .incident import dirichlet_datum, dirichlet_modes, incident_direction, incident_wave
from .l2_error import ZeroReferenceNormError, l2_norm, relative_l2_error
from .mie import MieSeries, default_truncation, exact_scattered_field
from .truncated import (
    BoundaryCondition,
    ModeResonanceError,
    TruncatedModeReference,
    truncated_mode_reference,
)

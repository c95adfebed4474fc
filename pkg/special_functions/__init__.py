from .bessel import (
    SpecialFunctionDomainError,
    bessel_j,
    bessel_y,
    bessel_jy_sequence,
    hankel2,
    hankel2_sequence,
    largest_finite_order,
)
from .dtn_symbols import (
    DtnSymbol,
    dtn_symbol,
    dtn_symbols,
    hankel2_ratio_sequence,
    recommended_truncation_order,
)

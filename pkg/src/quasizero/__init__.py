"""Zero-count bounds for weighted classes of analytic functions in the unit disc."""
from __future__ import annotations

from .analytic import CoefFn, from_coefficients, from_zeros, stirling2
from .bound import BoundResult, bound_curve, dm_bound, verify_certificate, zero_count_bound
from .errors import (
    BudgetExceeded,
    ContourError,
    DivergenceError,
    MembershipError,
    NormalizationError,
    ParameterError,
    QuasizeroError,
    UnreachableThreshold,
)
from .moments import MomentTable, jacobi_moment_diagnostic, quasi_diagnostic
from .weights import (
    MSequence,
    WeightSequence,
    check_regularity,
    from_descriptor,
    gevrey_weight,
    table_weight,
    weight_from_M,
)
from .zeros import (
    TrialConfig,
    argument_count,
    count_in_disc,
    jensen_residual,
    roots,
    run_soundness,
    soundness_trial,
)

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "BudgetExceeded",
    "CoefFn",
    "ContourError",
    "DivergenceError",
    "MSequence",
    "MembershipError",
    "MomentTable",
    "NormalizationError",
    "ParameterError",
    "QuasizeroError",
    "TrialConfig",
    "UnreachableThreshold",
    "WeightSequence",
    "argument_count",
    "bound_curve",
    "check_regularity",
    "count_in_disc",
    "dm_bound",
    "from_coefficients",
    "from_descriptor",
    "from_zeros",
    "gevrey_weight",
    "jacobi_moment_diagnostic",
    "jensen_residual",
    "quasi_diagnostic",
    "roots",
    "run_soundness",
    "soundness_trial",
    "stirling2",
    "table_weight",
    "verify_certificate",
    "weight_from_M",
    "zero_count_bound",
]

"""Binegativity, positive-part normal forms and positivity certificates for bipartite states."""

__version__ = "0.1.0"

from .binegativity import (  # noqa: E402
    binegativity,
    check_positivity,
    negative_decomposition,
    negativity,
    separable_approximation,
    summary,
)
from .certificates import certify  # noqa: E402
from .config import DEFAULT, Tolerances  # noqa: E402
from .linalg import hermitian_eig, operator_abs, partial_transpose, trace_norm  # noqa: E402
from .normal_form import filter_normal_form, kernel_state  # noqa: E402
from .states import EnsembleSpec, bell_diagonal, random_state, validate, werner  # noqa: E402

__all__ = [
    "DEFAULT",
    "EnsembleSpec",
    "Tolerances",
    "bell_diagonal",
    "binegativity",
    "certify",
    "check_positivity",
    "filter_normal_form",
    "hermitian_eig",
    "kernel_state",
    "negative_decomposition",
    "negativity",
    "operator_abs",
    "partial_transpose",
    "random_state",
    "separable_approximation",
    "summary",
    "trace_norm",
    "validate",
    "werner",
]

"""Numerical verification of trace inequalities on weighted block-trace algebras."""

__version__ = "0.1.0"

from .algebra import AlgebraElement, TracialAlgebra, make_algebra  # noqa: E402
from .functions import Convexity, ScalarFunction, parse_function  # noqa: E402
from .spectral import (  # noqa: E402
    StepFunction,
    schatten_p_norm,
    singular_values,
    trace_function_mu,
    trace_function_spectral,
)
from .inequalities import InequalityReport, Tolerance  # noqa: E402
from .harness import TrialConfig, run_campaign  # noqa: E402

__all__ = [
    "__version__",
    "AlgebraElement", "TracialAlgebra", "make_algebra",
    "Convexity", "ScalarFunction", "parse_function",
    "StepFunction", "schatten_p_norm", "singular_values",
    "trace_function_mu", "trace_function_spectral",
    "InequalityReport", "Tolerance",
    "TrialConfig", "run_campaign",
]

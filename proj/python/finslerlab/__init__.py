"""Finsler (alpha,beta)-metric curvature and criteria checks."""

from ._core import (
    Expression,
    FinslerError,
    Instance,
    Model,
    __version__,
    berwald_residual,
    builtin_models,
    douglas_residual,
    emit_model,
    load_model,
    make_instance,
    parse_expression,
    phi_admissible,
    run_checks,
)

__all__ = [
    "Expression",
    "FinslerError",
    "Instance",
    "Model",
    "__version__",
    "berwald_residual",
    "builtin_models",
    "douglas_residual",
    "emit_model",
    "load_model",
    "make_instance",
    "parse_expression",
    "phi_admissible",
    "run_checks",
]

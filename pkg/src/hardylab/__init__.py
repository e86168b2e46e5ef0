"""Power means, mixed means and their Hardy constants."""

from __future__ import annotations

from .errors import (ConstructionError, DomainError, EvaluationError, HardyLabError,
                     InfiniteConstant, ParseError, UnaryCase)
from .grammar import format_expr, parse_expr
from .means import (Circ, EvalOptions, MeanExpr, Power, Square, WeightedSample, eval_batch,
                    eval_mean, eval_power, eval_repeated, expand_pairs, homogenize_estimate,
                    prefix_means)
from .hardy import (OptimizerConfig, gamma, hardy_bracket, hardy_n_lower, harmonic_lower_bound,
                    hlp_bound, kaluza_szego_bound, superinvariant_upper_bound, truncated_hardy_check)
from .rho import rho, rho_closed, rho_finiteness
from .kedlaya import KedlayaMatrix, build, check_mixing_inequality, verify

__version__ = "0.1.0"

__all__ = [
    "Circ", "ConstructionError", "DomainError", "EvalOptions", "EvaluationError", "HardyLabError",
    "InfiniteConstant", "KedlayaMatrix", "MeanExpr", "OptimizerConfig", "ParseError", "Power",
    "Square", "UnaryCase", "WeightedSample", "build", "check_mixing_inequality", "eval_batch",
    "eval_mean", "eval_power", "eval_repeated", "expand_pairs", "format_expr", "gamma",
    "hardy_bracket", "hardy_n_lower", "harmonic_lower_bound", "hlp_bound", "homogenize_estimate",
    "kaluza_szego_bound", "parse_expr", "prefix_means", "rho", "rho_closed", "rho_finiteness",
    "superinvariant_upper_bound", "truncated_hardy_check", "verify",
]

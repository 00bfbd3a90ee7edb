"""Fast polynomial multiplication over prime fields F_p."""

from .config import DEFAULT_CONFIG, MulConfig
from .crandall_fagin import CfPlan, cf_plan, cf_recombine, cf_split_weight, find_theta
from .dft import DftPlan, bluestein, build_plan, cyclic_convolve, dft, dft_direct, idft
from .errors import (ContextMismatchError, FpMulError, NoInverseError, NotPrimeError,
                     ParameterError, PlanningError, SearchExhaustedError)
from .extfield import (ExtElement, ExtField, ext_div_rem, ext_mul, ext_pow, find_irreducible,
                       find_root_of_order)
from .kronecker import ks_bivariate_multiply, ks_cyclic_multiply, ks_multiply
from .multiplier import (MulPlan, cyclic_multiply, cyclic_multiply_batch, multiply,
                         plan_parameters)
from .primefield import FpPoly, PrimeContext, get_context, poly_cyclic_naive, poly_mul_naive
from .smooth import SmoothParams, build_M, choose_lambda, compute_H, h_table, package_lengths

__all__ = [
    "DEFAULT_CONFIG", "MulConfig",
    "CfPlan", "cf_plan", "cf_recombine", "cf_split_weight", "find_theta",
    "DftPlan", "bluestein", "build_plan", "cyclic_convolve", "dft", "dft_direct", "idft",
    "ContextMismatchError", "FpMulError", "NoInverseError", "NotPrimeError",
    "ParameterError", "PlanningError", "SearchExhaustedError",
    "ExtElement", "ExtField", "ext_div_rem", "ext_mul", "ext_pow", "find_irreducible",
    "find_root_of_order",
    "ks_bivariate_multiply", "ks_cyclic_multiply", "ks_multiply",
    "MulPlan", "cyclic_multiply", "cyclic_multiply_batch", "multiply", "plan_parameters",
    "FpPoly", "PrimeContext", "get_context", "poly_cyclic_naive", "poly_mul_naive",
    "SmoothParams", "build_M", "choose_lambda", "compute_H", "h_table", "package_lengths",
]

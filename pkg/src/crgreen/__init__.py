"""Green kernels of the Kohn Laplacian on quadric CR manifolds."""
from .forms import FormCoefficients, MultiIndex, increasing_tuples
from .kernel import KernelValue, dimensional_constant, eval_kernel, eval_kernel_deriv
from .quadric import (Direction, LeviSpectrum, QuadricForm, SignatureReport, levi_matrix,
                      levi_spectrum, load_quadric, parse_quadric, verify_nondegenerate)
from .quadrature import QuadratureOptions

__all__ = [
    "Direction", "FormCoefficients", "KernelValue", "LeviSpectrum", "MultiIndex",
    "QuadratureOptions", "QuadricForm", "SignatureReport", "dimensional_constant", "eval_kernel",
    "eval_kernel_deriv", "increasing_tuples", "levi_matrix", "levi_spectrum", "load_quadric",
    "parse_quadric", "verify_nondegenerate",
]

"""Double Aztec diamond tilings, finite-size kernels and the tacnode limit."""

__version__ = "0.1.0"

from double_aztec.errors import DoubleAztecError, NumericalError, UsageError
from double_aztec.types import Estimate, KernelValue, ModelShape, TacnodePoint

__all__ = [
    "DoubleAztecError",
    "Estimate",
    "KernelValue",
    "ModelShape",
    "NumericalError",
    "TacnodePoint",
    "UsageError",
    "__version__",
]

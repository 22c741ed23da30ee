"""Doubly-weighted ergodic perturbations of almost periodic functions.

Weights are written in a small DSL (``"exp(abs(x))"``, ``"x^2+1"``), almost
periodic parts are :class:`TrigPoly` objects, and every limit as
``T -> infinity`` is judged from a geometric schedule of horizons.
"""

__version__ = "0.1.0"

from .weight_dsl import WeightSyntaxError, classify_polynomial, parse_weight, to_text  # noqa: E402
from .limits import LimitVerdict, Schedule  # noqa: E402
from .weights import Weight, check_V, check_W, check_WInv, check_Ws, equivalent  # noqa: E402
from .apfun import FunctionHandle, TrigPoly, bohr_spectrum_scan, bohr_transform  # noqa: E402
from .ergodic import dw_mean, ergodic_curve, membership_pap0, oscillatory_decay, theta  # noqa: E402
from .transforms import composition_check, conv_membership, convolve, gauss, laplace, box  # noqa: E402

__all__ = [
    "__version__",
    "WeightSyntaxError",
    "classify_polynomial",
    "parse_weight",
    "to_text",
    "LimitVerdict",
    "Schedule",
    "Weight",
    "check_W",
    "check_V",
    "check_WInv",
    "check_Ws",
    "equivalent",
    "FunctionHandle",
    "TrigPoly",
    "bohr_transform",
    "bohr_spectrum_scan",
    "dw_mean",
    "ergodic_curve",
    "membership_pap0",
    "oscillatory_decay",
    "theta",
    "convolve",
    "conv_membership",
    "composition_check",
    "gauss",
    "laplace",
    "box",
]

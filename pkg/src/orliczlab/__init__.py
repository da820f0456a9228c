"""Discrete Orlicz-space norms, fractional maximal operators and their commutators, with verification suites."""

from .grid import Grid, SampledFunction, Window, WindowFamily
from .norms import NormResult, luxemburg_norm, weak_norm
from .report import VerificationReport
from .young import YoungFunction, conjugate, from_spec, inverse_young

__version__ = "0.1.0"

__all__ = [
    "Grid", "SampledFunction", "Window", "WindowFamily", "NormResult", "luxemburg_norm", "weak_norm",
    "VerificationReport", "YoungFunction", "conjugate", "from_spec", "inverse_young",
]

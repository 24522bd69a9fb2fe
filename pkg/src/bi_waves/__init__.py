"""Standing waves of the scalar Born-Infeld equation between conducting plates.

Two solution methods (a Lindstedt series in eps = A k / b and an exact
parametric construction from initial data) plus a residual checker.
"""

from .errors import BIWavesError
from .lindstedt import LindstedtSolution, dispersion, solve_order

__all__ = ["BIWavesError", "LindstedtSolution", "dispersion", "solve_order"]
__version__ = "0.1.0"

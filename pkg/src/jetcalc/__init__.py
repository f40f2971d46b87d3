"""
Symbolic jet bundles, linear differential operators, linear PDEs and
distributional functional calculus, with executable law suites.
"""

from .diffop import BundleMap, LinDiffOp, apply, compose
from .expr import equivalent
from .grammar import parse, to_text
from .jet import JetContext, JetSection, Section, prolong, total_derivative
from .lpde import LPDE, check_solution
from .numeric import Grid

__version__ = "0.1.0"

__all__ = [
    "BundleMap", "Grid", "JetContext", "JetSection", "LPDE", "LinDiffOp", "Section",
    "apply", "check_solution", "compose", "equivalent", "parse", "prolong", "to_text",
    "total_derivative", "__version__",
]

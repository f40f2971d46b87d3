"""Distributional and jet-distributional calculus: deltas, pairings, EL equations."""

from .distribution import *  # noqa: F401,F403
from .distribution import __all__ as _distribution_all
from .functionals import *  # noqa: F401,F403
from .functionals import __all__ as _functionals_all
from .variational import *  # noqa: F401,F403
from .variational import __all__ as _variational_all

__all__ = _distribution_all + _functionals_all + _variational_all

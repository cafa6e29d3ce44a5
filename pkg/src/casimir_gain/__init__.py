"""Casimir and Casimir-Polder forces with amplifying media in planar geometry."""

from .forces import *  # noqa: F401,F403
from .greens import *  # noqa: F401,F403
from .materials import *  # noqa: F401,F403
from .numerics import *  # noqa: F401,F403
from .potentials import *  # noqa: F401,F403
from . import forces, greens, materials, numerics, potentials

__version__ = "0.1.0"

__all__ = (forces.__all__ + greens.__all__ + materials.__all__ + numerics.__all__
           + potentials.__all__ + ["__version__"])

"""entroscope: up/down density transformations, informational measures,
and verification of the associated moment-entropy-Fisher inequalities."""

from . import errors
from .core import (
    Density,
    QuadResult,
    Support,
    builtin,
    integrate,
    invert_monotone,
    parse_density,
    quantiles,
    reflect,
    rescale,
    translate,
)

__version__ = "0.1.0"

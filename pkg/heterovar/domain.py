"""Module with domain-related code."""

from enum import Enum


class Design(Enum):
    """Enum with supported regression designs."""
    FIXED = 'fixed'
    RANDOM_UNIFORM = 'random-uniform'


class Method(Enum):
    """Enum with variance estimation methods."""
    DIFFERENCE = 'difference-based'
    RESIDUAL = 'residual-based'


class Noise(Enum):
    """Enum with noise families.

    Both have zero mean, unit variance and a finite fourth moment.
    """
    GAUSSIAN = 'gaussian'
    TWO_POINT = 'scaled-symmetric-two-point'


class MeanId(Enum):
    """Enum with mean functions of the simulation study."""
    F1 = 'f1'
    F2 = 'f2'
    F3 = 'f3'
    F4 = 'f4'
    CUSTOM = 'custom'


class VarianceId(Enum):
    """Enum with variance functions of the simulation study."""
    QUADRATIC = 'v-quadratic'
    CUSTOM = 'custom'


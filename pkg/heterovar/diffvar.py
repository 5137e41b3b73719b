"""Module with the difference-based variance estimator.

Squared first-order differences ``d_i = y_i - y_{i+1}`` are kernel-smoothed with
the bin weights of kernelkit: ``V(x) = 1/2 sum_i K_i^h(x) d_i^2``.
"""

import logging

import numpy as np

from .domain import Design, Method
from .dto import DifferenceSeries, Sample, VarianceEstimate
from .exception import InvalidConfiguration, InvalidInput
from .kernelkit import design_edges, weight_matrix


logger = logging.getLogger(__name__)


def default_bandwidth(n, beta=2.0):
    """Rate-optimal bandwidth n^(-1/(1+2 beta))."""
    return float(n) ** (-1.0 / (1.0 + 2.0 * beta))


def detect_design(x):
    n = len(x)
    if np.array_equal(np.asarray(x, dtype=float), np.arange(1, n + 1) / n):
        return Design.FIXED
    return Design.RANDOM_UNIFORM


def make_sample(x, y, design=None):
    """Builds a validated Sample, detecting the design when it isn't given."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if design is None:
        design = detect_design(x)
    sample = Sample(x=x, y=y, design=design)
    validate_sample(sample)
    return sample


def validate_sample(sample):
    """Checks the Sample invariants.

    Raises:
        InvalidInput: If lengths differ, n < 3, x is not strictly increasing
            inside [0, 1] or a fixed design deviates from i/n.

    """
    x, y = sample.x, sample.y
    if len(x) != len(y):
        raise InvalidInput(
            message='x and y must have the same length.',
            payload={'x_length': len(x), 'y_length': len(y)}
        )
    if len(x) < 3:
        raise InvalidInput(
            message='At least 3 observations are required.',
            payload={'n': len(x)}
        )
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise InvalidInput(message='Sample contains non-finite values.', payload={'n': len(x)})
    if np.any(np.diff(x) <= 0):
        raise InvalidInput(message='x must be strictly increasing.', payload={'n': len(x)})
    if x[0] < 0.0 or x[-1] > 1.0:
        raise InvalidInput(
            message='x must lie in [0, 1].',
            payload={'x_min': float(x[0]), 'x_max': float(x[-1])}
        )
    if sample.design == Design.FIXED and not np.array_equal(x, np.arange(1, len(x) + 1) / len(x)):
        raise InvalidInput(
            message='Fixed design requires x_i = i/n.',
            payload={'n': len(x)}
        )


def difference_series(sample):
    """Returns d_i = y_i - y_{i+1}, i = 1..n-1.

    Raises:
        InvalidInput: If the sample has fewer than 3 observations.

    """
    if len(sample.y) < 3:
        raise InvalidInput(
            message='At least 3 observations are required.',
            payload={'n': len(sample.y)}
        )
    y = np.asarray(sample.y, dtype=float)
    return DifferenceSeries(d=y[:-1] - y[1:])


class EstimateVariance:
    """Use-case for the difference-based variance estimate on a grid.

    Negative values produced by higher-order kernels are kept unless
    truncation is requested.

    """

    def __init__(self, weight_matrix=weight_matrix):
        self._weight_matrix = weight_matrix

    def __call__(self, sample, h=None, order=2, grid=None, truncate=False):
        validate_sample(sample)
        if h is None:
            h = default_bandwidth(sample.n)
        if not 0.0 < h < 0.5:
            raise InvalidConfiguration(
                message='Bandwidth must lie in (0, 1/2).',
                payload={'h': h}
            )
        grid = sample.x if grid is None else np.asarray(grid, dtype=float)
        if grid.size == 0:
            raise InvalidInput(message='Evaluation grid is empty.', payload={'grid': []})
        if np.any(grid < 0.0) or np.any(grid > 1.0):
            raise InvalidInput(
                message='Grid points must lie in [0, 1].',
                payload={'grid_min': float(grid.min()), 'grid_max': float(grid.max())}
            )
        squared = difference_series(sample).d ** 2
        weights = self._weight_matrix(order, h, grid, design_edges(sample.x))
        values = 0.5 * (weights @ squared)
        if truncate:
            values = np.clip(values, 0.0, None)
        logger.debug('difference estimate: n=%d h=%.5f order=%d points=%d', sample.n, h, order, grid.size)
        return VarianceEstimate(
            grid=grid,
            values=values,
            h=float(h),
            method=Method.DIFFERENCE,
            truncated=bool(truncate)
        )

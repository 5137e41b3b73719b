"""Module with the residual-based (two-step local linear) variance estimator."""

import logging

import numpy as np

from .domain import Method
from .dto import MeanFit, VarianceEstimate
from .exception import BandwidthTooSmall, InvalidInput
from .kernelkit import make_interior_kernel


logger = logging.getLogger(__name__)

CHUNK_CELLS = 2_000_000

# relative floor for the determinant of the 2x2 normal matrix
SINGULAR_TOLERANCE = 1e-12


def local_linear_smooth(x, y, h, points, train_mask=None, kernel=None):
    """Local linear fit of y on x at every point.

    Weights are K((x_i - x0)/h) of the order-1 interior kernel. Columns masked
    out by train_mask get zero weight.

    Args:
        x (array): Design points.
        y (array): Responses.
        h (float): Bandwidth.
        points (array): Evaluation points.
        train_mask (array): Boolean mask of usable observations.
        kernel (Kernel): Kernel override, order-1 interior kernel by default.

    Returns:
        tuple: (fitted, valid) where valid marks points with at least two
        positively weighted observations and a nonsingular normal matrix.

    """
    if kernel is None:
        kernel = make_interior_kernel(1)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    mask = np.ones(len(x), dtype=bool) if train_mask is None else np.asarray(train_mask, dtype=bool)
    fitted = np.full(len(points), np.nan)
    valid = np.zeros(len(points), dtype=bool)
    chunk = max(1, CHUNK_CELLS // max(len(x), 1))
    for start in range(0, len(points), chunk):
        rows = slice(start, start + chunk)
        dx = x[None, :] - points[rows][:, None]
        w = kernel.evaluate(dx / h) * mask[None, :]
        s0 = w.sum(axis=1)
        s1 = (w * dx).sum(axis=1)
        s2 = (w * dx * dx).sum(axis=1)
        t0 = w @ y
        t1 = (w * dx) @ y
        det = s0 * s2 - s1 * s1
        enough = (w > 0).sum(axis=1) >= 2
        ok = enough & (det > SINGULAR_TOLERANCE * np.maximum(s0 * s2, np.finfo(float).tiny))
        with np.errstate(divide='ignore', invalid='ignore'):
            fitted[rows] = np.where(ok, (s2 * t0 - s1 * t1) / det, np.nan)
        valid[rows] = ok
    return fitted, valid


def local_linear_fit(sample, h, x0):
    """Returns the local linear estimate of the mean at x0.

    Raises:
        BandwidthTooSmall: If fewer than two points get positive weight or the
            normal matrix is singular.

    """
    fitted, valid = local_linear_smooth(sample.x, sample.y, h, [x0])
    if not valid[0]:
        raise BandwidthTooSmall(
            message='Too few observations inside the bandwidth window.',
            payload={'h': h, 'x0': float(x0)}
        )
    return float(fitted[0])


def _strict_smooth(x, y, h, points):
    fitted, valid = local_linear_smooth(x, y, h, points)
    if not np.all(valid):
        bad = np.asarray(points, dtype=float)[~valid]
        raise BandwidthTooSmall(
            message='Too few observations inside the bandwidth window.',
            payload={'h': h, 'points': bad[:5].tolist(), 'count': int(bad.size)}
        )
    return fitted


class FitMean:
    """Use-case for the preliminary local linear mean fit."""

    def __call__(self, sample, h, grid=None):
        grid = sample.x if grid is None else np.asarray(grid, dtype=float)
        fitted = _strict_smooth(sample.x, sample.y, h, grid)
        return MeanFit(grid=grid, fitted=fitted, h=float(h))


class FanYaoVariance:
    """Use-case for the two-step residual-based variance estimate.

    Step one fits the mean at the design points, step two smooths the squared
    residuals with the same local linear smoother.

    """

    def __init__(self, fit_mean):
        self._fit_mean = fit_mean

    def __call__(self, sample, h_mean, h_var, grid=None):
        grid = sample.x if grid is None else np.asarray(grid, dtype=float)
        if grid.size == 0:
            raise InvalidInput(message='Evaluation grid is empty.', payload={'grid': []})
        mean_fit = self._fit_mean(sample, h_mean)
        squared_residuals = (sample.y - mean_fit.fitted) ** 2
        values = _strict_smooth(sample.x, squared_residuals, h_var, grid)
        logger.debug('residual estimate: n=%d h_mean=%.5f h_var=%.5f', sample.n, h_mean, h_var)
        return VarianceEstimate(
            grid=grid,
            values=values,
            h=float(h_var),
            method=Method.RESIDUAL,
            truncated=False,
            h_mean=float(h_mean)
        )

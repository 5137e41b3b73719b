"""Module with vanishing-moment kernels and bin-integrated kernel weights.

Kernels are the minimal-degree polynomials meeting the moment conditions
``int K = 1`` and ``int x^j K = 0`` for ``j = 1..order`` on their support.
Interior kernels live on [-1, 1]; boundary kernels K_t live on [-1, t].

The weight of bin ``i`` at an evaluation point ``x`` is the integral of
``(1/h) K((x - u)/h)`` over the bin, computed exactly from the polynomial
antiderivative. Bins partition [0, 1], so the weights of every row sum to one.
"""

import logging

import numpy as np
from numpy.polynomial import polynomial as P

from .dto import Kernel, WeightVector
from .exception import InvalidConfiguration


logger = logging.getLogger(__name__)

# rows x bins handled per chunk in weight_matrix
CHUNK_CELLS = 2_000_000


def monomial_moments(lo, hi, count):
    """Returns ``int_lo^hi x^k dx`` for k = 0..count-1."""
    k = np.arange(1, count + 1)
    return (np.power(float(hi), k) - np.power(float(lo), k)) / k


def _moment_system(order, lo, hi):
    moments = monomial_moments(lo, hi, 2 * order + 1)
    size = order + 1
    matrix = np.array([[moments[j + k] for k in range(size)] for j in range(size)])
    rhs = np.zeros(size)
    rhs[0] = 1.0
    return matrix, rhs


def _solve_kernel(order, lo, hi):
    matrix, rhs = _moment_system(order, lo, hi)
    coeffs = np.linalg.solve(matrix, rhs)
    assert np.all(np.isfinite(coeffs)), 'singular moment system'
    squared = P.polyint(P.polymul(coeffs, coeffs))
    l2_norm_sq = float(P.polyval(hi, squared) - P.polyval(lo, squared))
    coeffs.setflags(write=False)
    return Kernel(
        support_lo=float(lo),
        support_hi=float(hi),
        coeffs=coeffs,
        order=int(order),
        l2_norm_sq=l2_norm_sq
    )


def make_interior_kernel(order):
    """Builds the interior kernel of the given order on [-1, 1].

    Args:
        order (int): Highest moment index forced to zero.

    Returns:
        Kernel: The unique polynomial of degree <= order meeting the moment conditions.

    Raises:
        InvalidConfiguration: If order is negative.

    """
    _validate_order(order)
    kernel = _solve_kernel(order, -1.0, 1.0)
    # the moment system on [-1, 1] decouples by parity: odd coefficients vanish
    coeffs = np.array(kernel.coeffs)
    coeffs[1::2] = 0.0
    coeffs.setflags(write=False)
    return Kernel(kernel.support_lo, kernel.support_hi, coeffs, kernel.order, kernel.l2_norm_sq)


def make_boundary_kernel(order, t):
    """Builds the boundary kernel K_t of the given order on [-1, t].

    Args:
        order (int): Highest moment index forced to zero.
        t (float): Right end of the support, 0 <= t <= 1.

    Returns:
        Kernel: Polynomial boundary kernel.

    Raises:
        InvalidConfiguration: If order is negative or t is outside [0, 1].

    """
    _validate_order(order)
    if not 0.0 <= t <= 1.0:
        raise InvalidConfiguration(
            message='Boundary kernel support end must lie in [0, 1].',
            payload={'t': t}
        )
    return _solve_kernel(order, -1.0, t)


def design_edges(x):
    """Returns the n edges of the n-1 difference bins of a sorted design.

    Bin i spans [(x_{i-1}+x_i)/2, (x_i+x_{i+1})/2] for i = 1..n-1; the first
    bin starts at 0 and the last one ends at 1, so x_n owns no bin.
    """
    x = np.asarray(x, dtype=float)
    edges = np.empty(len(x))
    edges[0] = 0.0
    edges[1:-1] = 0.5 * (x[:-2] + x[1:-1])
    edges[-1] = 1.0
    return edges


def fixed_design(n):
    return np.arange(1, n + 1) / n


def boundary_position(h, points):
    """Classifies evaluation points into kernel regimes.

    Returns:
        tuple: (t, reflected) where t is the support end of the kernel used at
        each point (1 in the interior) and reflected marks right-boundary points.

    """
    points = np.asarray(points, dtype=float)
    left = points <= h
    reflected = (points >= 1.0 - h) & ~left
    t = np.ones_like(points)
    t[left] = points[left] / h
    t[reflected] = (1.0 - points[reflected]) / h
    return np.clip(t, 0.0, 1.0), reflected


def _row_coefficients(order, t):
    unique_t, inverse = np.unique(t, return_inverse=True)
    coeffs = np.empty((len(unique_t), order + 1))
    for row, value in enumerate(unique_t):
        if value == 1.0:
            coeffs[row] = make_interior_kernel(order).coeffs
        else:
            coeffs[row] = make_boundary_kernel(order, float(value)).coeffs
    return coeffs[inverse]


def _primitive(coeffs, s):
    """Evaluates row-wise antiderivatives at s (rows x columns) by Horner."""
    degree = coeffs.shape[1]
    result = np.zeros_like(s)
    for k in range(degree - 1, -1, -1):
        result = (result + coeffs[:, k:k + 1] / (k + 1)) * s
    return result


def weight_matrix(order, h, points, edges):
    """Returns bin weights for every evaluation point.

    Args:
        order (int): Kernel order.
        h (float): Bandwidth, 0 < h < 1/2.
        points (array): Evaluation points in [0, 1].
        edges (array): Bin edges as produced by design_edges.

    Returns:
        np.ndarray: Matrix with one row per point and one column per bin.

    """
    _validate_bandwidth(h)
    points = np.asarray(points, dtype=float)
    edges = np.asarray(edges, dtype=float)
    t, reflected = boundary_position(h, points)
    coeffs = _row_coefficients(order, t)
    lower_edges = edges[:-1][None, :]
    upper_edges = edges[1:][None, :]
    bins = len(edges) - 1
    weights = np.empty((len(points), bins))
    chunk = max(1, CHUNK_CELLS // max(bins, 1))
    for start in range(0, len(points), chunk):
        rows = slice(start, start + chunk)
        x = points[rows][:, None]
        flip = reflected[rows][:, None]
        # reflected kernels are integrated in the mirrored variable (u - x)/h
        lo = np.where(flip, (lower_edges - x) / h, (x - upper_edges) / h)
        hi = np.where(flip, (upper_edges - x) / h, (x - lower_edges) / h)
        right = t[rows][:, None]
        lo = np.clip(lo, -1.0, right)
        hi = np.clip(hi, -1.0, right)
        row_coeffs = coeffs[rows]
        weights[rows] = _primitive(row_coeffs, hi) - _primitive(row_coeffs, lo)
    return weights


def effective_kernel(order, h, x):
    """Returns the kernel used at x and whether it is reflected."""
    t, reflected = boundary_position(h, [x])
    if t[0] == 1.0:
        return make_interior_kernel(order), bool(reflected[0])
    return make_boundary_kernel(order, float(t[0])), bool(reflected[0])


def bin_weights(order, h, x, n, design_x=None):
    """Returns the weights K_i^h(x) for bins i = 1..n-1.

    Args:
        order (int): Kernel order.
        h (float): Bandwidth, 0 < h < 1/2.
        x (float): Evaluation point in [0, 1].
        n (int): Number of design points, n >= 3.
        design_x (array): Observed design; defaults to the fixed design i/n.

    Returns:
        WeightVector: Weights and the L2 norm of the kernel used at x.

    Raises:
        InvalidConfiguration: If h, n or x are out of range.

    """
    if n < 3:
        raise InvalidConfiguration(
            message='At least 3 design points are required.',
            payload={'n': n}
        )
    if not 0.0 <= x <= 1.0:
        raise InvalidConfiguration(
            message='Evaluation point must lie in [0, 1].',
            payload={'x': x}
        )
    _validate_bandwidth(h)
    if design_x is None:
        design_x = fixed_design(n)
    weights = weight_matrix(order, h, [x], design_edges(design_x))[0]
    kernel, _ = effective_kernel(order, h, x)
    return WeightVector(x=float(x), h=float(h), weights=weights, kernel_l2_norm_sq=kernel.l2_norm_sq)


def _validate_order(order):
    if order < 0:
        raise InvalidConfiguration(
            message='Kernel order must be nonnegative.',
            payload={'order': order}
        )


def _validate_bandwidth(h):
    if not 0.0 < h < 0.5:
        raise InvalidConfiguration(
            message='Bandwidth must lie in (0, 1/2).',
            payload={'h': h}
        )

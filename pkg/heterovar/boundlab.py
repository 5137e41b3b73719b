"""Module with the numerical side of the two-point lower bound.

The alternative hypothesis is a Gaussian location mixture over a discrete,
compactly supported distribution G whose first q moments equal those of the
standard normal. G is the Gauss quadrature measure of the normal weight, taken
from the eigen-decomposition of the Hermite three-term recurrence matrix.
"""

import logging

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.linalg import eigh_tridiagonal
from scipy.stats import norm

from .diffvar import default_bandwidth
from .domain import Design
from .dto import (
    AdversarialMean,
    LowerBoundResult,
    LowerBoundRow,
    LowerBoundSlope,
    MomentDistribution,
    Sample,
    TestingProblem
)
from .exception import InvalidConfiguration, InvalidInput, NumericToleranceError
from .kernelkit import fixed_design
from .modelsel import pointwise_squared_error
from .simlab import log_log_slope, minimax_rate_exponent


logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-10
HALF_WIDTH = 8.0
ORACLE_POINTS = 400_001
LOWER_BOUND_M_F = 20.0
EVALUATION_POINT = 0.5


def moment_distribution(q):
    """Returns the symmetric discrete distribution matching normal moments through q.

    Args:
        q (int): Odd matched moment order.

    Returns:
        MomentDistribution: (q+1)/2 nodes and positive weights.

    Raises:
        InvalidInput: If q is even or smaller than 1.

    """
    if q < 1 or q % 2 == 0:
        raise InvalidInput(message='q must be an odd integer >= 1.', payload={'q': q})
    m = (q + 1) // 2
    if m == 1:
        nodes, weights = np.zeros(1), np.ones(1)
    else:
        # recurrence x He_k = He_{k+1} + k He_{k-1} in orthonormal form
        off_diagonal = np.sqrt(np.arange(1, m, dtype=float))
        nodes, vectors = eigh_tridiagonal(np.zeros(m), off_diagonal)
        weights = vectors[0] ** 2
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
        weights = weights / weights.sum()
    return MomentDistribution(nodes=nodes, weights=weights, q=int(q), B=float(np.max(np.abs(nodes))))


def smallest_odd_q(alpha):
    """Smallest odd q with (q + 1) alpha > 1."""
    if alpha <= 0:
        raise InvalidConfiguration(message='alpha must be positive.', payload={'alpha': alpha})
    q = 1
    while (q + 1) * alpha <= 1.0:
        q += 2
    return q


def testing_problem(n, alpha, q, M_f=1.0):
    G = moment_distribution(q)
    scale = G.B if G.B > 0 else 1.0
    theta = M_f / (2.0 * scale) * float(n) ** (-alpha)
    return TestingProblem(theta=theta, n=int(n), G=G, alpha=float(alpha), M_f=float(M_f))


def null_density(theta, t):
    """Density of N(0, 1 + theta^2) at t."""
    return norm.pdf(t, scale=np.sqrt(1.0 + theta ** 2))


def mixture_density(G, theta, t):
    """Density of the normal location mixture sum_k w_k N(theta v_k, 1) at t."""
    t = np.asarray(t, dtype=float)
    shifted = t[..., None] - theta * G.nodes
    return np.sum(G.weights * norm.pdf(shifted), axis=-1)


def _tail_mass(G, theta, bound):
    null_tail = 2.0 * norm.sf(bound, scale=np.sqrt(1.0 + theta ** 2))
    mixture_tail = np.sum(G.weights * (norm.sf(bound - theta * G.nodes) + norm.cdf(-bound - theta * G.nodes)))
    return float(null_tail + mixture_tail)


def squared_hellinger(G, theta):
    """Returns 1/2 int (sqrt(d0) - sqrt(d1))^2 dt for a single observation.

    Raises:
        NumericToleranceError: If quadrature error plus the neglected tail
            exceeds the absolute tolerance.

    """
    if theta == 0:
        return 0.0
    bound = HALF_WIDTH + theta * G.B

    def integrand(t):
        return 0.5 * (np.sqrt(null_density(theta, t)) - np.sqrt(mixture_density(G, theta, t))) ** 2

    value, error, *_ = quad(integrand, -bound, bound, epsabs=1e-15, epsrel=1e-10, limit=200, full_output=1)
    tail = 0.5 * _tail_mass(G, theta, bound)
    if error + tail > QUADRATURE_TOLERANCE:
        raise NumericToleranceError(
            message='Hellinger quadrature did not reach the requested tolerance.',
            payload={'theta': theta, 'error': error, 'tail': tail}
        )
    return float(value)


def single_sample_affinity(G, theta):
    """Returns int sqrt(d0 d1) dt, computed as 1 - squared Hellinger distance."""
    return 1.0 - squared_hellinger(G, theta)


def single_sample_affinity_trapezoid(G, theta, points=ORACLE_POINTS):
    """Fixed-grid trapezoid evaluation of int sqrt(d0 d1) dt."""
    bound = HALF_WIDTH + 4.0 + theta * G.B
    t = np.linspace(-bound, bound, points)
    return float(trapezoid(np.sqrt(null_density(theta, t) * mixture_density(G, theta, t)), t))


def hellinger_affinity(problem):
    """Returns the affinity of the n-fold products, (int sqrt(d0 d1))^n, in (0, 1]."""
    distance = squared_hellinger(problem.G, problem.theta)
    return float(np.exp(problem.n * np.log1p(-distance)))


def hc_integrand(x, d):
    """x / (e^{x/2} + e^{-x/2}) times the N(0, d) density times e^{-d/8}; odd in x."""
    x = np.asarray(x, dtype=float)
    damping = np.exp(-0.5 * np.abs(x)) / (1.0 + np.exp(-np.abs(x)))
    return x * damping * np.exp(-x ** 2 / (2.0 * d) - d / 8.0) / np.sqrt(2.0 * np.pi * d)


def hc_integral(d):
    """Integrates hc_integrand over the real line.

    Raises:
        InvalidInput: If d is not positive.
        NumericToleranceError: If quadrature error exceeds the tolerance.

    """
    if d <= 0:
        raise InvalidInput(message='d must be positive.', payload={'d': d})
    value, error, *_ = quad(lambda x: float(hc_integrand(x, d)), -np.inf, np.inf, epsabs=1e-13, limit=200, full_output=1)
    if error > QUADRATURE_TOLERANCE:
        raise NumericToleranceError(
            message='Integral did not reach the requested tolerance.',
            payload={'d': d, 'error': error}
        )
    return float(value)


def adversarial_mean(n, alpha, q, M_f, seed):
    """Draws the random mean built from disjoint triangular bumps.

    Raises:
        InvalidConfiguration: If (q + 1) alpha <= 1 or n < 3.

    """
    if (q + 1) * alpha <= 1.0:
        raise InvalidConfiguration(
            message='Moment order too small for alpha: (q + 1) alpha must exceed 1.',
            payload={'q': q, 'alpha': alpha}
        )
    if n < 3:
        raise InvalidConfiguration(message='At least 3 design points are required.', payload={'n': n})
    problem = testing_problem(n, alpha, q, M_f)
    G = problem.G
    r = np.random.default_rng(seed).choice(G.nodes, size=n, p=G.weights)
    return AdversarialMean(
        n=int(n),
        theta=problem.theta,
        r=r,
        design_x=fixed_design(n),
        values=problem.theta * r
    )


class LowerBoundExperiment:
    """Use-case for the empirical slope of the pointwise risk under adversarial means.

    For every alpha and n the difference-based estimator runs at the
    rate-optimal bandwidth on data with V = 1 and a fresh adversarial mean per
    replication; the median squared error at x = 1/2 is recorded. A zero-mean
    control row shows the variance-driven slope.

    """

    def __init__(self, estimate_variance, runner):
        self._estimate_variance = estimate_variance
        self._runner = runner

    def __call__(
            self,
            alphas,
            ns,
            replications=50,
            master_seed=0,
            M_f=LOWER_BOUND_M_F,
            q=None,
            include_control=True
            ):
        for alpha in alphas:
            if not 0.0 < alpha < 0.25:
                raise InvalidConfiguration(
                    message='alpha must lie in (0, 1/4).',
                    payload={'alpha': alpha}
                )
        cells = [(index, alpha, q if q is not None else smallest_odd_q(alpha)) for index, alpha in enumerate(alphas)]
        if include_control:
            cells.append((len(cells), None, None))
        rows, slopes = [], []
        for index, alpha, cell_q in cells:
            medians = []
            for n in ns:
                errors = self._runner.map(
                    lambda rep: self._replicate(index, alpha, cell_q, n, rep, master_seed, M_f),
                    range(replications)
                )
                medians.append(float(np.median(errors)))
                rows.append(LowerBoundRow(alpha=alpha, q=cell_q, n=int(n), median_sq_error=medians[-1]))
                logger.info('lower bound alpha=%s n=%d median squared error=%.6g', alpha, n, medians[-1])
            expected = minimax_rate_exponent(alpha, 2.0) if alpha is not None else -0.8
            slopes.append(LowerBoundSlope(alpha=alpha, q=cell_q, slope=log_log_slope(ns, medians), expected_slope=expected))
        return LowerBoundResult(rows=rows, slopes=slopes)

    def _replicate(self, index, alpha, q, n, rep, master_seed, M_f):
        stream = np.random.SeedSequence(master_seed, spawn_key=(index, int(n), rep))
        mean_stream, noise_stream = stream.spawn(2)
        x = fixed_design(n)
        if alpha is None:
            mean = np.zeros(n)
        else:
            mean_seed = int(mean_stream.generate_state(1)[0])
            mean = adversarial_mean(n, alpha, q, M_f, mean_seed).values
        y = mean + np.random.default_rng(noise_stream).standard_normal(n)
        sample = Sample(x=x, y=y, design=Design.FIXED)
        estimate = self._estimate_variance(sample, h=default_bandwidth(n), order=2, grid=[EVALUATION_POINT])
        return pointwise_squared_error(estimate, 1.0, EVALUATION_POINT)

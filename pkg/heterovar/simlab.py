"""Module with the Monte-Carlo harness: data generation, the four-mean study and rate studies.

Every replication owns a random stream derived from (master_seed, replication
index), so results do not depend on how replications are scheduled.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.integrate import quad

from .diffvar import validate_sample
from .domain import Design, MeanId, Method, Noise, VarianceId
from .dto import (
    CVConfig,
    ExperimentConfig,
    ExperimentSummary,
    FunctionSpec,
    RateStudyResult,
    ReplicationRecord,
    Sample
)
from .exception import (
    HeterovarBaseException,
    InsufficientPoints,
    InvalidConfiguration,
    UnsupportedMean
)
from .modelsel import DEFAULT_FOLDS, cdmse, default_h_grid


logger = logging.getLogger(__name__)

AMPLITUDE = 0.75
FREQUENCIES = {
    MeanId.F2: 10.0 * np.pi,
    MeanId.F3: 20.0 * np.pi,
    MeanId.F4: 40.0 * np.pi,
}
TABLE1_N = 1000
TABLE1_REPLICATIONS = 100
FAST_REPLICATIONS = 30
MIN_RATE_N = 50


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _sine(omega):
    def mean(x):
        return AMPLITUDE * np.sin(omega * np.asarray(x, dtype=float))

    def derivative(x):
        return AMPLITUDE * omega * np.cos(omega * np.asarray(x, dtype=float))

    return mean, derivative


def quadratic_variance(x):
    x = np.asarray(x, dtype=float)
    return (x - 0.5) ** 2 + 0.5


def resolve_mean(functions):
    """Returns (mean, derivative) callables for a FunctionSpec."""
    if functions.mean_id == MeanId.F1:
        return _zero, _zero
    if functions.mean_id in FREQUENCIES:
        return _sine(FREQUENCIES[functions.mean_id])
    if functions.mean is None:
        raise InvalidConfiguration(
            message='Custom mean requires a callable.',
            payload={'mean_id': functions.mean_id.value}
        )
    return functions.mean, functions.mean_derivative


def resolve_variance(functions):
    if functions.variance_id == VarianceId.QUADRATIC:
        return quadratic_variance
    if functions.variance is None:
        raise InvalidConfiguration(
            message='Custom variance requires a callable.',
            payload={'variance_id': functions.variance_id.value}
        )
    return functions.variance


def roughness_by_quadrature(derivative):
    """Returns int_0^1 f'(x)^2 dx by adaptive quadrature."""
    value, _ = quad(lambda x: float(derivative(x)) ** 2, 0.0, 1.0, epsabs=1e-11, epsrel=1e-13, limit=500)
    return float(value)


def roughness(mean_id, derivative=None):
    """Returns the roughness functional int_0^1 f'(x)^2 dx.

    Closed form for the study means (for amplitude a and frequency w the
    integral is a^2 w^2 / 2), adaptive quadrature for custom means.

    Raises:
        UnsupportedMean: If a custom mean comes without a derivative.

    """
    if mean_id == MeanId.F1:
        return 0.0
    if mean_id in FREQUENCIES:
        return 0.5 * AMPLITUDE ** 2 * FREQUENCIES[mean_id] ** 2
    if derivative is None:
        raise UnsupportedMean(
            message='Roughness needs a differentiable mean with a known derivative.',
            payload={'mean_id': mean_id.value}
        )
    return roughness_by_quadrature(derivative)


def replication_stream(master_seed, index):
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def replication_seed(master_seed, index):
    return int(replication_stream(master_seed, index).generate_state(1)[0])


def draw_noise(rng, noise, size):
    """Draws zero-mean unit-variance noise.

    Both families have a bounded fourth moment (3 and 1 respectively).
    """
    if noise == Noise.GAUSSIAN:
        return rng.standard_normal(size)
    if noise == Noise.TWO_POINT:
        return rng.choice(np.array([-1.0, 1.0]), size=size)
    raise InvalidConfiguration(message='Unknown noise family.', payload={'noise': str(noise)})


def minimax_rate_exponent(alpha, beta):
    return max(-4.0 * alpha, -2.0 * beta / (1.0 + 2.0 * beta))


def residual_rate_exponent(alpha, beta):
    """Exponent attained when residuals come from an optimally smoothed mean."""
    return max(-4.0 * alpha / (2.0 * alpha + 1.0), -2.0 * beta / (2.0 * beta + 1.0))


def log_log_slope(ns, values):
    """Least-squares slope of log(values) against log(ns).

    Raises:
        InsufficientPoints: If fewer than 3 distinct n are given.

    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.unique(ns).size < 3:
        raise InsufficientPoints(
            message='At least 3 distinct sample sizes are required for a slope.',
            payload={'ns': ns.tolist()}
        )
    slope, _ = np.polyfit(np.log(ns), np.log(values), 1)
    return float(slope)


def validate_experiment_config(config):
    if config.n < 10:
        raise InvalidConfiguration(message='n must be at least 10.', payload={'n': config.n})
    if config.replications < 1:
        raise InvalidConfiguration(
            message='At least one replication is required.',
            payload={'replications': config.replications}
        )
    if config.master_seed < 0:
        raise InvalidConfiguration(
            message='master_seed must be nonnegative.',
            payload={'master_seed': config.master_seed}
        )


def table1_configs(master_seed=0, fast=False, n=TABLE1_N, noise=Noise.GAUSSIAN):
    """Returns the four configurations of the mean-roughness study."""
    replications = FAST_REPLICATIONS if fast else TABLE1_REPLICATIONS
    return [
        ExperimentConfig(
            n=n,
            replications=replications,
            functions=FunctionSpec(mean_id=mean_id, variance_id=VarianceId.QUADRATIC),
            noise=noise,
            design=Design.FIXED,
            cv=CVConfig(folds=DEFAULT_FOLDS, h_grid=None, seed=master_seed, method=Method.DIFFERENCE),
            master_seed=master_seed
        )
        for mean_id in (MeanId.F1, MeanId.F2, MeanId.F3, MeanId.F4)
    ]


class TaskRunner:
    """Simple service for running independent tasks.

    Results always come back in task order.

    """

    def __init__(self, max_workers=1):
        self._max_workers = max_workers

    def map(self, function, items):
        items = list(items)
        if self._max_workers <= 1 or len(items) <= 1:
            return [function(item) for item in items]
        with ThreadPoolExecutor(max_workers=self._max_workers) as executor:
            return list(executor.map(function, items))


class Generate:
    """Use-case for drawing one replication of the regression model."""

    def __call__(self, config, replication_index):
        validate_experiment_config(config)
        mean, _ = resolve_mean(config.functions)
        variance = resolve_variance(config.functions)
        rng = np.random.default_rng(replication_stream(config.master_seed, replication_index))
        n = config.n
        if config.design == Design.FIXED:
            x = np.arange(1, n + 1) / n
        else:
            x = np.sort(rng.uniform(0.0, 1.0, size=n))
        z = draw_noise(rng, config.noise, n)
        y = np.asarray(mean(x), dtype=float) + np.sqrt(np.asarray(variance(x), dtype=float)) * z
        sample = Sample(x=x, y=y, design=config.design)
        validate_sample(sample)
        return sample


class RunTable1:
    """Use-case for the difference-based vs residual-based comparison.

    Each replication cross-validates and runs both estimators and scores them
    with CDMSE at the design points. Failed replications are recorded and left
    out of the aggregates.

    """

    def __init__(
            self,
            generate,
            cv_diff,
            cv_fanyao,
            estimate_variance,
            fan_yao_variance,
            runner
            ):
        self._generate = generate
        self._cv_diff = cv_diff
        self._cv_fanyao = cv_fanyao
        self._estimate_variance = estimate_variance
        self._fan_yao_variance = fan_yao_variance
        self._runner = runner

    def __call__(self, config):
        validate_experiment_config(config)
        records = self._runner.map(
            lambda index: self._replicate(config, index),
            range(config.replications)
        )
        per_replication = [record for pair in records for record in pair]
        return summarize(per_replication)

    def _replicate(self, config, index):
        seed = replication_seed(config.master_seed, index)
        h_grid = config.cv.h_grid if config.cv.h_grid is not None else default_h_grid(config.n)
        sample = self._generate(config, index)
        truth = resolve_variance(config.functions)(sample.x)
        records = (
            self._run_difference(sample, truth, config, h_grid, index, seed),
            self._run_residual(sample, truth, config, h_grid, index, seed)
        )
        logger.info(
            'replication %d: %s',
            index,
            ', '.join('%s=%s' % (record.method.value, record.cdmse) for record in records)
        )
        return records

    def _run_difference(self, sample, truth, config, h_grid, index, seed):
        cv_config = CVConfig(folds=config.cv.folds, h_grid=h_grid, seed=seed, method=Method.DIFFERENCE)
        try:
            h = self._cv_diff(sample, cv_config).h_selected
            estimate = self._estimate_variance(sample, h=h, order=config.order)
            return ReplicationRecord(
                replication=index, seed=seed, method=Method.DIFFERENCE, h=h, cdmse=cdmse(estimate, truth)
            )
        except HeterovarBaseException as e:
            logger.warning('replication %d failed for %s: %s', index, Method.DIFFERENCE.value, e)
            return ReplicationRecord(
                replication=index, seed=seed, method=Method.DIFFERENCE, h=None, cdmse=None,
                error=type(e).__name__
            )

    def _run_residual(self, sample, truth, config, h_grid, index, seed):
        cv_config = CVConfig(folds=config.cv.folds, h_grid=h_grid, seed=seed, method=Method.RESIDUAL)
        try:
            h_mean, h_var = self._cv_fanyao(sample, cv_config)
            estimate = self._fan_yao_variance(sample, h_mean, h_var)
            return ReplicationRecord(
                replication=index, seed=seed, method=Method.RESIDUAL, h=h_var, cdmse=cdmse(estimate, truth),
                h_mean=h_mean
            )
        except HeterovarBaseException as e:
            logger.warning('replication %d failed for %s: %s', index, Method.RESIDUAL.value, e)
            return ReplicationRecord(
                replication=index, seed=seed, method=Method.RESIDUAL, h=None, cdmse=None,
                error=type(e).__name__
            )


def summarize(per_replication):
    """Aggregates per-replication records into medians and quartiles per method."""
    medians, quartiles, failures = {}, {}, {}
    for method in Method:
        records = [record for record in per_replication if record.method == method]
        if not records:
            continue
        values = np.array([record.cdmse for record in records if record.error is None], dtype=float)
        failures[method] = len(records) - values.size
        if values.size == 0:
            medians[method] = None
            quartiles[method] = (None, None)
            continue
        q1, q3 = np.percentile(values, [25, 75])
        medians[method] = float(np.median(values))
        quartiles[method] = (float(q1), float(q3))
    return ExperimentSummary(
        per_replication=per_replication,
        median_cdmse=medians,
        quartiles=quartiles,
        failures=failures
    )


class RateStudy:
    """Use-case for the empirical convergence rate of the difference-based estimator.

    Uses the fixed bandwidth h = n^rule at every sample size. The result also
    carries the exponent the residual-based estimator would attain.

    """

    def __init__(self, generate, estimate_variance, runner):
        self._generate = generate
        self._estimate_variance = estimate_variance
        self._runner = runner

    def __call__(self, ns, config, fixed_h_rule=-0.2):
        ns = [int(n) for n in ns]
        if len(set(ns)) < 3:
            raise InsufficientPoints(
                message='At least 3 distinct sample sizes are required for a slope.',
                payload={'ns': ns}
            )
        if any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < MIN_RATE_N:
            raise InvalidConfiguration(
                message='Sample sizes must be increasing and at least %d.' % MIN_RATE_N,
                payload={'ns': ns}
            )
        medians = []
        for n in ns:
            sized = replace(config, n=n)
            h = float(n) ** fixed_h_rule
            errors = self._runner.map(lambda index: self._replicate(sized, index, h), range(sized.replications))
            medians.append(float(np.median(errors)))
            logger.info('rate study n=%d h=%.5f median cdmse=%.6g', n, h, medians[-1])
        points = [(float(np.log(n)), float(np.log(median))) for n, median in zip(ns, medians)]
        return RateStudyResult(
            slope=log_log_slope(ns, medians),
            points=points,
            expected_slope=minimax_rate_exponent(config.functions.alpha, config.functions.beta),
            residual_expected_slope=residual_rate_exponent(config.functions.alpha, config.functions.beta)
        )

    def _replicate(self, config, index, h):
        sample = self._generate(config, index)
        estimate = self._estimate_variance(sample, h=h, order=config.order)
        return cdmse(estimate, resolve_variance(config.functions)(sample.x))

"""Module with bandwidth selection by K-fold cross-validation and loss metrics."""

import logging

import numpy as np
from sklearn.model_selection import KFold

from .domain import Method
from .dto import CVConfig, CVResult, FanYaoCVResult
from .exception import InsufficientPoints, InvalidConfiguration, InvalidInput
from .kernelkit import design_edges, weight_matrix
from .residvar import local_linear_smooth


logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 10
DEFAULT_GRID_SIZE = 20
# candidates must stay strictly below 1/2
MAX_BANDWIDTH = 0.49
TIE_RTOL = 1e-9
TIE_ATOL = 1e-24
MAX_SEED = 2 ** 32


def default_h_grid(n, count=DEFAULT_GRID_SIZE):
    """Log-spaced grid around the rate-optimal bandwidth n^(-1/5)."""
    center = float(n) ** (-0.2)
    return np.geomspace(0.5 * center, min(5.0 * center, MAX_BANDWIDTH), count)


def default_cv_config(n, method=Method.DIFFERENCE, seed=0, folds=DEFAULT_FOLDS):
    return CVConfig(folds=folds, h_grid=default_h_grid(n), seed=seed, method=method)


def make_folds(count, folds, seed):
    """Assigns each of count indices to one of folds groups uniformly at random.

    Group sizes differ by at most one.
    """
    assignment = np.empty(count, dtype=int)
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    for fold, (_, held) in enumerate(splitter.split(np.arange(count))):
        assignment[held] = fold
    return assignment


def select_bandwidth(h_grid, scores):
    """Returns the candidate with the smallest score, smallest h on ties.

    Raises:
        InsufficientPoints: If every candidate is disqualified.

    """
    scores = np.asarray(scores, dtype=float)
    if np.all(np.isnan(scores)):
        raise InsufficientPoints(
            message='Every candidate bandwidth was disqualified.',
            payload={'h_grid': [float(h) for h in h_grid]}
        )
    best = np.nanmin(scores)
    # rounding noise on exactly reproducible data counts as a tie
    ties = np.isclose(scores, best, rtol=TIE_RTOL, atol=TIE_ATOL)
    index = int(np.flatnonzero(ties)[0])
    return float(h_grid[index])


def validate_cv_config(config, count):
    h_grid = np.asarray(config.h_grid, dtype=float)
    if h_grid.size == 0 or np.any(np.diff(h_grid) <= 0):
        raise InvalidConfiguration(
            message='h_grid must be nonempty and strictly increasing.',
            payload={'h_grid': h_grid.tolist()}
        )
    if h_grid[0] <= 0.0 or h_grid[-1] >= 0.5:
        raise InvalidConfiguration(
            message='Candidate bandwidths must lie in (0, 1/2).',
            payload={'h_grid': h_grid.tolist()}
        )
    if config.folds < 2 or config.folds > count:
        raise InvalidConfiguration(
            message='Number of folds must lie in [2, n].',
            payload={'folds': config.folds, 'n': count}
        )
    if not 0 <= config.seed < MAX_SEED:
        raise InvalidConfiguration(
            message='Fold seed must lie in [0, 2^32).',
            payload={'seed': config.seed}
        )
    return h_grid


def _result(h_grid, scores):
    for h, score in zip(h_grid, scores):
        logger.debug('cv score h=%.5f score=%r', h, score)
        if np.isnan(score):
            logger.warning('bandwidth %.5f disqualified: no held-out point could be scored', h)
    return CVResult(
        h_selected=select_bandwidth(h_grid, scores),
        scores={float(h): float(score) for h, score in zip(h_grid, scores)}
    )


class KFoldCvDiff:
    """Use-case for cross-validating the difference-based estimator.

    Targets are d_i^2 / 2 placed at the bin midpoints. Each held-out target is
    predicted from the training bins with weights renormalized to sum to one.

    """

    def __init__(self, weight_matrix=weight_matrix, order=2):
        self._weight_matrix = weight_matrix
        self._order = order

    def __call__(self, sample, config):
        if config.method != Method.DIFFERENCE:
            raise InvalidConfiguration(
                message='Configuration is not for the difference-based method.',
                payload={'method': config.method.value}
            )
        y = np.asarray(sample.y, dtype=float)
        targets = 0.5 * (y[:-1] - y[1:]) ** 2
        midpoints = 0.5 * (sample.x[:-1] + sample.x[1:])
        h_grid = validate_cv_config(config, len(targets))
        folds = make_folds(len(targets), config.folds, config.seed)
        edges = design_edges(sample.x)
        scores = [self._score(self._weight_matrix(self._order, h, midpoints, edges), targets, folds) for h in h_grid]
        return _result(h_grid, scores)

    @staticmethod
    def _score(weights, targets, folds):
        errors = []
        for fold in np.unique(folds):
            held = folds == fold
            train = ~held
            block = weights[held][:, train]
            total = block.sum(axis=1)
            usable = np.any(block > 0, axis=1) & (np.abs(total) > 1e-12)
            if not np.any(usable):
                continue
            prediction = (block[usable] @ targets[train]) / total[usable]
            errors.append((targets[held][usable] - prediction) ** 2)
        if not errors:
            return np.nan
        return float(np.mean(np.concatenate(errors)))


class KFoldCvFanYao:
    """Use-case for the two-stage cross-validation of the residual-based estimator.

    Stage one picks h_mean on held-out responses, stage two fixes h_mean,
    computes full-sample squared residuals and picks h_var on them.

    """

    def __init__(self, smoother=local_linear_smooth):
        self._smoother = smoother

    def __call__(self, sample, config):
        if config.method != Method.RESIDUAL:
            raise InvalidConfiguration(
                message='Configuration is not for the residual-based method.',
                payload={'method': config.method.value}
            )
        x = np.asarray(sample.x, dtype=float)
        y = np.asarray(sample.y, dtype=float)
        h_grid = validate_cv_config(config, len(x))
        folds = make_folds(len(x), config.folds, config.seed)

        mean_result = _result(h_grid, [self._score(x, y, h, folds) for h in h_grid])
        fitted, valid = self._smoother(x, y, mean_result.h_selected, x)
        if not np.all(valid):
            raise InsufficientPoints(
                message='Selected mean bandwidth can not fit every design point.',
                payload={'h_mean': mean_result.h_selected}
            )
        squared_residuals = (y - fitted) ** 2
        variance_result = _result(h_grid, [self._score(x, squared_residuals, h, folds) for h in h_grid])
        return FanYaoCVResult(mean=mean_result, variance=variance_result)

    def _score(self, x, response, h, folds):
        errors = []
        for fold in np.unique(folds):
            held = folds == fold
            prediction, valid = self._smoother(x, response, h, x[held], train_mask=~held)
            if np.any(valid):
                errors.append((response[held][valid] - prediction[valid]) ** 2)
        if not errors:
            return np.nan
        return float(np.mean(np.concatenate(errors)))


def cdmse(estimate, truth):
    """Returns n^-1 sum (V(x_i) - truth_i)^2 over the design points.

    Raises:
        InvalidInput: If lengths differ.

    """
    values = np.asarray(estimate.values, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if values.shape != truth.shape:
        raise InvalidInput(
            message='Estimate and truth lengths differ.',
            payload={'estimate_length': values.size, 'truth_length': truth.size}
        )
    return float(np.mean((values - truth) ** 2))


def pointwise_squared_error(estimate, truth_value, x):
    """Squared error of the estimate at the grid point closest to x."""
    index = int(np.argmin(np.abs(np.asarray(estimate.grid) - x)))
    return float((estimate.values[index] - truth_value) ** 2)


"""Module with data transfer objects."""

from dataclasses import dataclass, asdict, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    if callable(value):
        return None
    return value


def _dict_factory(items):
    return {key: _plain(value) for key, value in items}


@dataclass(frozen=True)
class Dto:

    def as_dict(self):
        return asdict(self, dict_factory=_dict_factory)


@dataclass(frozen=True)
class Kernel(Dto):
    """Polynomial kernel on [support_lo, support_hi].

    Coefficients are in ascending degree; the kernel is zero off its support.
    """
    support_lo: float
    support_hi: float
    coeffs: np.ndarray
    order: int
    l2_norm_sq: float

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= self.support_lo) & (s <= self.support_hi)
        return np.where(inside, P.polyval(s, self.coeffs), 0.0)

    def antiderivative(self, s):
        """Returns the integral of the kernel from support_lo to s."""
        s = np.clip(np.asarray(s, dtype=float), self.support_lo, self.support_hi)
        primitive = P.polyint(self.coeffs)
        return P.polyval(s, primitive) - P.polyval(self.support_lo, primitive)

    def moment(self, j):
        primitive = P.polyint(np.concatenate([np.zeros(j), self.coeffs]))
        return P.polyval(self.support_hi, primitive) - P.polyval(self.support_lo, primitive)


@dataclass(frozen=True)
class WeightVector(Dto):
    x: float
    h: float
    weights: np.ndarray
    kernel_l2_norm_sq: float


@dataclass(frozen=True)
class Sample(Dto):
    x: np.ndarray
    y: np.ndarray
    design: Enum

    @property
    def n(self):
        return len(self.x)


@dataclass(frozen=True)
class DifferenceSeries(Dto):
    d: np.ndarray


@dataclass(frozen=True)
class VarianceEstimate(Dto):
    grid: np.ndarray
    values: np.ndarray
    h: float
    method: Enum
    truncated: bool = False
    h_mean: Optional[float] = None


@dataclass(frozen=True)
class MeanFit(Dto):
    grid: np.ndarray
    fitted: np.ndarray
    h: float


@dataclass(frozen=True)
class CVConfig(Dto):
    folds: int
    h_grid: np.ndarray
    seed: int
    method: Enum


@dataclass(frozen=True)
class CVResult(Dto):
    """Selected bandwidth and the held-out score of every candidate.

    Disqualified candidates carry a nan score.
    """
    h_selected: float
    scores: dict

    def score_rows(self):
        return [
            {'h': float(h), 'score': None if np.isnan(score) else float(score)}
            for h, score in self.scores.items()
        ]


@dataclass(frozen=True)
class FanYaoCVResult(Dto):
    mean: CVResult
    variance: CVResult

    @property
    def h_mean(self):
        return self.mean.h_selected

    @property
    def h_var(self):
        return self.variance.h_selected

    def __iter__(self):
        return iter((self.h_mean, self.h_var))


@dataclass(frozen=True)
class FunctionSpec(Dto):
    mean_id: Enum
    variance_id: Enum
    alpha: float = 2.0
    beta: float = 2.0
    M_f: float = 1.0
    M_V: float = 1.0
    mean: Optional[Callable] = None
    mean_derivative: Optional[Callable] = None
    variance: Optional[Callable] = None


@dataclass(frozen=True)
class ExperimentConfig(Dto):
    n: int
    replications: int
    functions: FunctionSpec
    noise: Enum
    design: Enum
    cv: CVConfig
    master_seed: int
    order: int = 2


@dataclass(frozen=True)
class ReplicationRecord(Dto):
    replication: int
    seed: int
    method: Enum
    h: Optional[float]
    cdmse: Optional[float]
    h_mean: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ExperimentSummary(Dto):
    per_replication: list
    median_cdmse: dict
    quartiles: dict
    failures: dict = field(default_factory=dict)

    def summary_dict(self):
        return {
            method.value: {
                'median': self.median_cdmse[method],
                'q1': self.quartiles[method][0],
                'q3': self.quartiles[method][1],
                'failures': self.failures.get(method, 0)
            }
            for method in self.median_cdmse
        }


@dataclass(frozen=True)
class RateStudyResult(Dto):
    slope: float
    points: list
    expected_slope: Optional[float] = None
    residual_expected_slope: Optional[float] = None


@dataclass(frozen=True)
class MomentDistribution(Dto):
    nodes: np.ndarray
    weights: np.ndarray
    q: int
    B: float

    def moment(self, j):
        return float(np.sum(self.weights * self.nodes ** j))


@dataclass(frozen=True)
class TestingProblem(Dto):
    theta: float
    n: int
    G: MomentDistribution
    alpha: float
    M_f: float


@dataclass(frozen=True)
class AdversarialMean(Dto):
    """Sum of disjoint triangular bumps of height theta * r_i centred at i/n."""
    n: int
    theta: float
    r: np.ndarray
    design_x: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        index = np.clip(np.rint(x * self.n).astype(int), 1, self.n)
        bump = np.clip(1.0 - 2.0 * self.n * np.abs(x - index / self.n), 0.0, None)
        inside = (x >= 0.0) & (x <= 1.0)
        return np.where(inside, self.theta * self.r[index - 1] * bump, 0.0)


@dataclass(frozen=True)
class LowerBoundRow(Dto):
    alpha: Optional[float]
    q: Optional[int]
    n: int
    median_sq_error: float


@dataclass(frozen=True)
class LowerBoundSlope(Dto):
    alpha: Optional[float]
    q: Optional[int]
    slope: float
    expected_slope: float


@dataclass(frozen=True)
class LowerBoundResult(Dto):
    rows: list
    slopes: list


@dataclass(frozen=True)
class RunConfig(Dto):
    subcommand: str
    input_path: Optional[str]
    output_path: Optional[str]
    seed: int
    format: str

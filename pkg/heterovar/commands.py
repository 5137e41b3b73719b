"""Module with actual command handlers."""

import logging
import sys
from collections import namedtuple
from functools import wraps
from json import dumps

import numpy as np
from marshmallow.exceptions import ValidationError

from .boundlab import (
    adversarial_mean,
    hc_integral,
    hellinger_affinity,
    moment_distribution,
    single_sample_affinity,
    smallest_odd_q,
    testing_problem
)
from .diffvar import make_sample
from .domain import Method
from .dto import CVConfig
from .exception import HeterovarBaseException, InvalidConfiguration, NumericToleranceError
from .kernelkit import bin_weights, make_boundary_kernel, make_interior_kernel
from .modelsel import default_cv_config, default_h_grid
from .simlab import FAST_REPLICATIONS, TABLE1_REPLICATIONS, table1_configs


logger = logging.getLogger(__name__)

Response = namedtuple('Response', ['body', 'exit_code'])
"""namedtuple: Simple response structure

Used for passing result from command handler to the entry point.
"""

SUCCESS = 0
VALIDATION_FAILURE = 1
NUMERIC_FAILURE = 2

METHODS = {'diff': Method.DIFFERENCE, 'fanyao': Method.RESIDUAL}


def with_exit_code(function):
    """Decorator that maps package errors to exit codes and reports them on stderr."""
    @wraps(function)
    def inner(*args, **kwargs):
        try:
            return function(*args, **kwargs)
        except NumericToleranceError as e:
            return report_failure(str(e), e.payload, NUMERIC_FAILURE)
        except HeterovarBaseException as e:
            return report_failure(str(e), e.payload, VALIDATION_FAILURE)
        except ValidationError as e:
            return report_failure('Invalid configuration.', e.messages, VALIDATION_FAILURE)
        except OSError as e:
            return report_failure('File can not be accessed.', {'path': e.filename, 'error': e.strerror}, VALIDATION_FAILURE)
    return inner


def report_failure(description, payload, exit_code):
    body = {'description': description, 'payload': payload}
    print(dumps(body, sort_keys=True, default=str), file=sys.stderr)
    return Response(body=body, exit_code=exit_code)


class EstimateHandler:
    """Command handler that estimates the variance function of a CSV sample."""

    def __init__(self, csv_client, estimate_variance, fan_yao_variance, cv_fanyao, validator):
        self._csv_client = csv_client
        self._estimate_variance = estimate_variance
        self._fan_yao_variance = fan_yao_variance
        self._cv_fanyao = cv_fanyao
        self._validator = validator

    @with_exit_code
    def handle(self, args):
        columns = self._csv_client.read_columns(args.input, ['x', 'y'])
        sample = make_sample(columns['x'], columns['y'])
        grid = self._grid(args.grid)
        if args.method == 'fanyao':
            estimate = self._fan_yao(sample, args, grid)
        else:
            h = None if args.h is None else self._validator.bandwidth('--h', args.h)
            order = self._validator.at_least('--order', args.order, 0)
            estimate = self._estimate_variance(sample, h=h, order=order, grid=grid, truncate=args.truncate)
        self._csv_client.write(args.output, ['x', 'vhat'], zip(estimate.grid, estimate.values))
        return Response(body={'h': estimate.h, 'points': int(estimate.grid.size)}, exit_code=SUCCESS)

    def _fan_yao(self, sample, args, grid):
        h_mean, h_var = args.h_mean, args.h_var
        for name, value in (('--h-mean', h_mean), ('--h-var', h_var)):
            if value is not None:
                self._validator.bandwidth(name, value)
        if h_mean is None or h_var is None:
            config = default_cv_config(sample.n, method=Method.RESIDUAL, seed=args.seed)
            selected_mean, selected_var = self._cv_fanyao(sample, config)
            logger.info('cross-validated bandwidths: h_mean=%.5f h_var=%.5f', selected_mean, selected_var)
            h_mean = selected_mean if h_mean is None else h_mean
            h_var = selected_var if h_var is None else h_var
        return self._fan_yao_variance(sample, h_mean, h_var, grid=grid)

    def _grid(self, grid):
        """Returns None (design points), an equispaced grid of the given size, or a grid file's x column."""
        if grid is None:
            return None
        if grid.isdigit():
            count = self._validator.at_least('--grid', int(grid), 1)
            return np.linspace(0.0, 1.0, count) if count > 1 else np.array([0.5])
        return self._csv_client.read_columns(grid, ['x'])['x']


class CvHandler:
    """Command handler that cross-validates the bandwidth of either estimator."""

    def __init__(self, csv_client, json_client, cv_diff, cv_fanyao, validator):
        self._csv_client = csv_client
        self._json_client = json_client
        self._cv_diff = cv_diff
        self._cv_fanyao = cv_fanyao
        self._validator = validator

    @with_exit_code
    def handle(self, args):
        columns = self._csv_client.read_columns(args.input, ['x', 'y'])
        sample = make_sample(columns['x'], columns['y'])
        method = METHODS[args.method]
        folds = self._validator.at_least('--k', args.k, 2)
        h_grid = default_h_grid(sample.n) if args.h_grid is None else self._h_grid(args.h_grid)
        config = CVConfig(folds=folds, h_grid=h_grid, seed=args.seed, method=method)
        if method == Method.DIFFERENCE:
            result = self._cv_diff(sample, config)
            body = {'h_selected': result.h_selected, 'scores': result.score_rows()}
        else:
            result = self._cv_fanyao(sample, config)
            body = {
                'h_selected': result.h_var,
                'scores': result.variance.score_rows(),
                'h_mean': result.h_mean,
                'h_var': result.h_var,
                'mean_scores': result.mean.score_rows()
            }
        self._json_client.write(args.output, body)
        return Response(body=body, exit_code=SUCCESS)

    def _h_grid(self, text):
        """Parses lo:hi:count into a log-spaced candidate grid."""
        try:
            lo, hi, count = text.split(':')
            lo, hi, count = float(lo), float(hi), int(count)
        except ValueError:
            raise InvalidConfiguration(
                message='Invalid value for --h-grid, expected lo:hi:count.',
                payload={'field': '--h-grid', 'value': text}
            )
        self._validator.bandwidth('--h-grid', lo)
        self._validator.bandwidth('--h-grid', hi)
        self._validator.at_least('--h-grid', count, 1)
        if count > 1 and hi <= lo:
            raise InvalidConfiguration(
                message='Invalid value for --h-grid, lo must be below hi.',
                payload={'field': '--h-grid', 'value': text}
            )
        return np.geomspace(lo, hi, count) if count > 1 else np.array([lo])


class SimulateHandler:
    """Command handler that runs the difference-based vs residual-based study.

    The configuration comes from the table1 preset, a JSON file or flags.

    """

    def __init__(self, csv_client, json_client, schema, run_table1):
        self._csv_client = csv_client
        self._json_client = json_client
        self._schema = schema
        self._run_table1 = run_table1

    @with_exit_code
    def handle(self, args):
        seed = 0 if args.seed is None else args.seed
        if args.preset == 'table1':
            configs = table1_configs(master_seed=seed, fast=args.fast)
            results = [(config.functions.mean_id.value, self._run_table1(config)) for config in configs]
            body = {mean_id: result.summary_dict() for mean_id, result in results}
            header = ['mean', 'rep', 'method', 'h', 'cdmse']
            rows = [
                [mean_id] + _record_row(record)
                for mean_id, result in results
                for record in result.per_replication
            ]
        else:
            config = self._schema.load(self._raw_config(args, seed))
            result = self._run_table1(config)
            body = result.summary_dict()
            header = ['rep', 'method', 'h', 'cdmse']
            rows = [_record_row(record) for record in result.per_replication]
        self._json_client.write(args.output, body)
        if args.replications_csv is not None:
            self._csv_client.write(args.replications_csv, header, rows)
        return Response(body=body, exit_code=SUCCESS)

    def _raw_config(self, args, seed):
        if args.config is not None:
            raw = self._json_client.read(args.config)
            if not isinstance(raw, dict):
                raise InvalidConfiguration(message='Config file must hold a JSON object.', payload={'path': args.config})
            if args.seed is not None:
                raw['master_seed'] = args.seed
            if args.fast:
                raw['replications'] = FAST_REPLICATIONS
            return raw
        replications = args.replications
        if replications is None:
            replications = FAST_REPLICATIONS if args.fast else TABLE1_REPLICATIONS
        return {
            'n': args.n,
            'replications': replications,
            'functions': {'mean_id': args.mean},
            'noise': args.noise,
            'design': args.design,
            'cv': {'folds': args.k, 'seed': seed},
            'master_seed': seed,
            'order': args.order
        }


def _record_row(record):
    return [record.replication, record.method.value, record.h, record.cdmse]


class RatesHandler:
    """Command handler that measures the convergence rate of the difference-based estimator."""

    def __init__(self, csv_client, json_client, schema, rate_study):
        self._csv_client = csv_client
        self._json_client = json_client
        self._schema = schema
        self._rate_study = rate_study

    @with_exit_code
    def handle(self, args):
        seed = 0 if args.seed is None else args.seed
        if args.config is not None:
            raw = self._json_client.read(args.config)
            if not isinstance(raw, dict):
                raise InvalidConfiguration(message='Config file must hold a JSON object.', payload={'path': args.config})
            if args.seed is not None:
                raw['master_seed'] = args.seed
        else:
            raw = {
                'n': args.n_list[0],
                'replications': args.replications,
                'functions': {'mean_id': args.mean},
                'noise': args.noise,
                'design': args.design,
                'master_seed': seed,
                'order': args.order
            }
        config = self._schema.load(raw)
        result = self._rate_study(args.n_list, config, fixed_h_rule=args.h_rule)
        self._csv_client.write(args.output, ['log_n', 'log_median_cdmse'], result.points)
        body = {
            'slope': result.slope,
            'expected_slope': result.expected_slope,
            'residual_expected_slope': result.residual_expected_slope
        }
        if args.summary is not None:
            self._json_client.write(args.summary, body)
        return Response(body=body, exit_code=SUCCESS)


class TableWriter:
    """Writes a header and rows either as CSV or as a JSON list of records."""

    def __init__(self, csv_client, json_client):
        self._csv_client = csv_client
        self._json_client = json_client

    def write(self, args, header, rows):
        rows = [list(row) for row in rows]
        if getattr(args, 'format', 'csv') == 'json':
            self._json_client.write(args.output, [dict(zip(header, row)) for row in rows])
        else:
            self._csv_client.write(args.output, header, rows)
        return rows


class MomentsHandler:
    """Command handler that prints the moment-matching distribution G(q)."""

    def __init__(self, table_writer):
        self._table_writer = table_writer

    @with_exit_code
    def handle(self, args):
        G = moment_distribution(args.q)
        rows = self._table_writer.write(
            args,
            ['node', 'weight'],
            [(float(node), float(weight)) for node, weight in zip(G.nodes, G.weights)]
        )
        return Response(body={'q': G.q, 'B': G.B, 'nodes': len(rows)}, exit_code=SUCCESS)


class HellingerHandler:
    """Command handler that tabulates the affinity of the testing problem over n."""

    def __init__(self, table_writer):
        self._table_writer = table_writer

    @with_exit_code
    def handle(self, args):
        q = args.q if args.q is not None else smallest_odd_q(args.alpha)
        rows = []
        for n in args.n_list:
            problem = testing_problem(n, args.alpha, q, args.m_f)
            rows.append((
                int(n),
                problem.theta,
                single_sample_affinity(problem.G, problem.theta),
                hellinger_affinity(problem)
            ))
        self._table_writer.write(args, ['n', 'theta', 'single_sample_affinity', 'affinity'], rows)
        return Response(body={'alpha': args.alpha, 'q': q}, exit_code=SUCCESS)


class HcCheckHandler:
    """Command handler that evaluates the odd integral that vanishes for every d."""

    def __init__(self, table_writer):
        self._table_writer = table_writer

    @with_exit_code
    def handle(self, args):
        rows = [(float(d), hc_integral(d)) for d in args.d_list]
        self._table_writer.write(args, ['d', 'value'], rows)
        return Response(body={'max_abs_value': max(abs(value) for _, value in rows)}, exit_code=SUCCESS)


class AdversarialHandler:
    """Command handler that draws one adversarial mean on the fixed design."""

    def __init__(self, table_writer):
        self._table_writer = table_writer

    @with_exit_code
    def handle(self, args):
        q = args.q if args.q is not None else smallest_odd_q(args.alpha)
        mean = adversarial_mean(args.n, args.alpha, q, args.m_f, args.seed)
        rows = [
            (index + 1, float(x), float(r), float(value))
            for index, (x, r, value) in enumerate(zip(mean.design_x, mean.r, mean.values))
        ]
        self._table_writer.write(args, ['i', 'x', 'r', 'mean'], rows)
        return Response(body={'theta': mean.theta, 'q': q}, exit_code=SUCCESS)


class LowerBoundHandler:
    """Command handler that measures the pointwise risk slope under adversarial means."""

    def __init__(self, json_client, lower_bound_experiment):
        self._json_client = json_client
        self._lower_bound_experiment = lower_bound_experiment

    @with_exit_code
    def handle(self, args):
        result = self._lower_bound_experiment(
            args.alphas,
            args.ns,
            replications=args.replications,
            master_seed=args.seed,
            M_f=args.m_f,
            q=args.q,
            include_control=not args.no_control
        )
        body = result.as_dict()
        self._json_client.write(args.output, body)
        return Response(body=body, exit_code=SUCCESS)


class KernelHandler:
    """Command handler that dumps kernel coefficients or a bin weight vector.

    Note: This is a debugging aid.

    """

    def __init__(self, table_writer, validator):
        self._table_writer = table_writer
        self._validator = validator

    @with_exit_code
    def handle(self, args):
        order = self._validator.at_least('--order', args.order, 0)
        if args.h is not None and args.x is not None:
            h = self._validator.bandwidth('--h', args.h)
            vector = bin_weights(order, h, args.x, args.n)
            rows = [(index + 1, float(weight)) for index, weight in enumerate(vector.weights)]
            self._table_writer.write(args, ['i', 'weight'], rows)
            return Response(body={'kernel_l2_norm_sq': vector.kernel_l2_norm_sq}, exit_code=SUCCESS)
        kernel = make_interior_kernel(order) if args.t is None else make_boundary_kernel(order, args.t)
        rows = [(k, float(coefficient)) for k, coefficient in enumerate(kernel.coeffs)]
        self._table_writer.write(args, ['k', 'coefficient'], rows)
        return Response(body={'l2_norm_sq': kernel.l2_norm_sq}, exit_code=SUCCESS)

import io
import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import Mock, patch

import numpy as np
from marshmallow.exceptions import ValidationError
from numpy.testing import assert_allclose, assert_array_equal
from scipy.integrate import quad

from heterovar.boundlab import (
    adversarial_mean,
    hc_integral,
    hc_integrand,
    hellinger_affinity,
    mixture_density,
    moment_distribution,
    null_density,
    single_sample_affinity,
    single_sample_affinity_trapezoid,
    smallest_odd_q,
    squared_hellinger,
    testing_problem as make_testing_problem
)
from heterovar.client import format_value
from heterovar.container import Container, worker_count
from heterovar.diffvar import (
    default_bandwidth,
    detect_design,
    difference_series,
    make_sample,
    validate_sample
)
from heterovar.domain import Design, MeanId, Method, Noise, VarianceId
from heterovar.dto import (
    CVConfig,
    CVResult,
    ExperimentConfig,
    ExperimentSummary,
    FanYaoCVResult,
    FunctionSpec,
    MeanFit,
    RateStudyResult,
    ReplicationRecord,
    Sample,
    VarianceEstimate
)
from heterovar.exception import (
    BandwidthTooSmall,
    InsufficientPoints,
    InvalidConfiguration,
    InvalidInput,
    NumericToleranceError,
    UnsupportedMean
)
from heterovar.handler import build_parser, main, run_config
from heterovar.kernelkit import (
    bin_weights,
    boundary_position,
    design_edges,
    effective_kernel,
    fixed_design,
    make_boundary_kernel,
    make_interior_kernel,
    weight_matrix
)
from heterovar.modelsel import (
    cdmse,
    default_h_grid,
    make_folds,
    pointwise_squared_error,
    select_bandwidth,
    validate_cv_config
)
from heterovar.residvar import local_linear_fit, local_linear_smooth
from heterovar.schema import CVConfigSchema, ExperimentConfigSchema, ParameterValidator
from heterovar.simlab import (
    FAST_REPLICATIONS,
    TaskRunner,
    draw_noise,
    log_log_slope,
    minimax_rate_exponent,
    quadratic_variance,
    replication_seed,
    residual_rate_exponent,
    resolve_mean,
    roughness,
    roughness_by_quadrature,
    table1_configs
)


SLOW_TESTS = bool(os.environ.get('HETEROVAR_SLOW_TESTS'))


def quadrature_weights(order, h, x, edges):
    """Bin weights of the kernel used at x, integrated numerically bin by bin."""
    kernel, reflected = effective_kernel(order, h, x)
    if reflected:
        lower, upper = x + h * kernel.support_lo, x + h * kernel.support_hi

        def density(u):
            return float(kernel.evaluate((u - x) / h)) / h
    else:
        lower, upper = x - h * kernel.support_hi, x - h * kernel.support_lo

        def density(u):
            return float(kernel.evaluate((x - u) / h)) / h

    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        a, b = max(a, lower), min(b, upper)
        weights.append(quad(density, a, b, epsabs=1e-14, epsrel=1e-14)[0] if a < b else 0.0)
    return np.array(weights)


def weighted_least_squares(x, y, h, x0):
    """Local linear fit at x0 by a direct weighted least-squares solve."""
    weights = make_interior_kernel(1).evaluate((x - x0) / h)
    inside = weights > 0
    if inside.sum() < 2:
        return np.nan
    root = np.sqrt(weights[inside])
    design = np.column_stack([np.ones(inside.sum()), x[inside] - x0])
    coefficients = np.linalg.lstsq(design * root[:, None], y[inside] * root, rcond=None)[0]
    return float(coefficients[0])


def experiment_config(n=200, replications=3, mean_id=MeanId.F1, noise=Noise.GAUSSIAN, design=Design.FIXED):
    return ExperimentConfig(
        n=n,
        replications=replications,
        functions=FunctionSpec(mean_id=mean_id, variance_id=VarianceId.QUADRATIC),
        noise=noise,
        design=design,
        cv=CVConfig(folds=10, h_grid=None, seed=0, method=Method.DIFFERENCE),
        master_seed=0
    )


class TestCsvClient(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, name):
        return os.path.join(self.directory, name)

    def write_text(self, name, text):
        with open(self.path(name), 'w') as handle:
            handle.write(text)
        return self.path(name)

    def test_reading_columns(self):
        path = self.write_text('sample.csv', 'x, y\n0.25,1\n0.5,2.5\n\n')
        client = self.container.csv_client

        columns = client.read_columns(path, ['x', 'y'])

        assert_array_equal(columns['x'], [0.25, 0.5])
        assert_array_equal(columns['y'], [1.0, 2.5])

    def test_missing_column(self):
        path = self.write_text('sample.csv', 'x,z\n0.25,1\n')
        client = self.container.csv_client

        with self.assertRaises(InvalidInput) as cm:
            client.read_columns(path, ['x', 'y'])
        exception = cm.exception
        self.assertEqual(str(exception), 'Input file is missing required columns.')
        self.assertEqual(exception.payload['missing'], ['y'])

    def test_not_a_number(self):
        path = self.write_text('sample.csv', 'x,y\n0.25,foo\n')
        client = self.container.csv_client

        with self.assertRaises(InvalidInput) as cm:
            client.read_columns(path, ['x', 'y'])
        self.assertEqual(cm.exception.payload, {'path': path, 'line': 2, 'column': 'y'})

    def test_missing_file(self):
        client = self.container.csv_client

        with self.assertRaises(InvalidInput) as cm:
            client.read_columns(self.path('absent.csv'), ['x'])
        self.assertEqual(cm.exception.payload['path'], self.path('absent.csv'))

    def test_full_precision_round_trip(self):
        values = np.array([0.1, 1.0 / 3.0, 2.0 ** -40, -7.123456789012345e-5])
        client = self.container.csv_client

        client.write(self.path('out.csv'), ['x', 'vhat'], zip(values, values * 3.0))
        columns = client.read_columns(self.path('out.csv'), ['x', 'vhat'])

        assert_array_equal(columns['x'], values)
        assert_array_equal(columns['vhat'], values * 3.0)

    def test_writing_to_stdout(self):
        client = self.container.csv_client

        client.write(None, ['i', 'weight'], [(1, 0.5), (2, None)])

        self.assertEqual(client._stdout.getvalue(), 'i,weight\n1,0.5\n2,\n')

    def test_formatting_values(self):
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(True), 'true')
        self.assertEqual(format_value(np.int64(3)), '3')
        self.assertEqual(format_value(0.25), '0.25')
        self.assertEqual(format_value('difference-based'), 'difference-based')


class TestJsonClient(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_rendering_is_sorted(self):
        client = self.container.json_client

        self.assertEqual(client.render({'b': 1, 'a': [0.5]}), '{\n  "a": [\n    0.5\n  ],\n  "b": 1\n}\n')

    def test_reading_invalid_json(self):
        path = os.path.join(self.directory, 'config.json')
        with open(path, 'w') as handle:
            handle.write('{not json')
        client = self.container.json_client

        with self.assertRaises(InvalidInput) as cm:
            client.read(path)
        self.assertEqual(str(cm.exception), 'Config file is not valid JSON.')


class TestKernels(unittest.TestCase):  # pragma: no cover

    def test_moment_conditions(self):
        for order in range(4):
            kernels = [make_interior_kernel(order)] + [make_boundary_kernel(order, t) for t in (0.0, 0.3, 0.75, 1.0)]
            for kernel in kernels:
                self.assertLess(abs(kernel.moment(0) - 1.0), 1e-12)
                for j in range(1, order + 1):
                    self.assertLess(abs(kernel.moment(j)), 1e-12)

    def test_interior_kernels(self):
        assert_allclose(make_interior_kernel(0).coeffs, [0.5], atol=1e-15)
        assert_allclose(make_interior_kernel(1).coeffs, [0.5, 0.0], atol=1e-15)
        kernel = make_interior_kernel(2)
        assert_allclose(kernel.coeffs, [1.125, 0.0, -1.875], atol=1e-12)
        self.assertAlmostEqual(kernel.l2_norm_sq, 1.125, places=12)

    def test_boundary_kernel_at_full_support_is_interior_kernel(self):
        for order in range(4):
            assert_allclose(
                make_boundary_kernel(order, 1.0).coeffs,
                make_interior_kernel(order).coeffs,
                atol=1e-12
            )

    def test_boundary_kernel_at_zero_support(self):
        kernel = make_boundary_kernel(1, 0.0)

        assert_allclose(kernel.coeffs, [4.0, 6.0], atol=1e-12)
        self.assertEqual((kernel.support_lo, kernel.support_hi), (-1.0, 0.0))

    def test_kernel_evaluation_outside_support(self):
        kernel = make_boundary_kernel(2, 0.5)

        assert_array_equal(kernel.evaluate([-1.5, 0.75, 2.0]), [0.0, 0.0, 0.0])
        self.assertAlmostEqual(float(kernel.antiderivative(0.5)), 1.0, places=12)
        self.assertEqual(float(kernel.antiderivative(-3.0)), 0.0)

    def test_invalid_boundary_support(self):
        with self.assertRaises(InvalidConfiguration) as cm:
            make_boundary_kernel(2, 1.5)
        exception = cm.exception
        self.assertEqual(str(exception), 'Boundary kernel support end must lie in [0, 1].')
        self.assertEqual(exception.payload, {'t': 1.5})

    def test_negative_order(self):
        with self.assertRaises(InvalidConfiguration) as cm:
            make_interior_kernel(-1)
        self.assertEqual(cm.exception.payload, {'order': -1})


class TestBinWeights(unittest.TestCase):  # pragma: no cover

    def test_design_edges(self):
        assert_allclose(design_edges([0.1, 0.4, 0.6, 0.9]), [0.0, 0.25, 0.5, 1.0])

    def test_boundary_position(self):
        t, reflected = boundary_position(0.1, [0.05, 0.5, 0.95])

        assert_allclose(t, [0.5, 1.0, 0.5])
        assert_array_equal(reflected, [False, False, True])

    def test_partition_of_unity(self):
        points = np.linspace(0.0, 1.0, 1001)
        for order in range(4):
            for h in (0.02, 0.1, 0.3):
                for n in (50, 1000):
                    weights = weight_matrix(order, h, points, design_edges(fixed_design(n)))
                    self.assertLess(np.max(np.abs(weights.sum(axis=1) - 1.0)), 1e-10)

    def test_closed_form_matches_quadrature(self):
        n, h = 50, 0.1
        edges = design_edges(fixed_design(n))
        for order in range(4):
            for x in (0.03, 0.5, 0.98):
                closed_form = bin_weights(order, h, x, n).weights
                assert_allclose(closed_form, quadrature_weights(order, h, x, edges), rtol=0, atol=1e-12)

    def test_random_design_weights(self):
        x = np.sort(np.random.default_rng(3).uniform(size=40))
        edges = design_edges(x)
        closed_form = bin_weights(2, 0.2, 0.1, 40, design_x=x).weights
        assert_allclose(closed_form, quadrature_weights(2, 0.2, 0.1, edges), rtol=0, atol=1e-12)

    def test_weights_vanish_outside_window(self):
        h = 0.1
        points = np.linspace(0.0, 1.0, 201)
        designs = [fixed_design(20), np.sort(np.random.default_rng(7).uniform(size=20))]
        for x in designs:
            edges = design_edges(x)
            assert_allclose(edges[1:-1], 0.5 * (x[:-2] + x[1:-1]))
            outside = (points[:, None] >= edges[1:] + h) | (points[:, None] <= edges[:-1] - h)
            self.assertTrue(np.any(outside))
            for order in range(4):
                weights = weight_matrix(order, h, points, edges)
                self.assertLess(np.max(np.abs(weights[outside])), 1e-14)

    def test_absolute_weights_bounded_by_kernel_norm(self):
        for order in range(4):
            for x in np.linspace(0.0, 1.0, 101):
                vector = bin_weights(order, 0.1, x, 100)
                self.assertLessEqual(np.sum(np.abs(vector.weights)) ** 2, 2.0 * vector.kernel_l2_norm_sq + 1e-6)

    def test_moment_annihilation(self):
        h = 0.2
        points = np.array([0.3, 0.4321, 0.5, 0.77])
        for order in range(1, 4):
            constants = []
            for n in (200, 400, 800):
                x = fixed_design(n)
                weights = weight_matrix(order, h, points, design_edges(x))
                offsets = x[:-1] - points[:, None]
                moments = [np.abs(np.sum(weights * offsets ** j, axis=1)).max() for j in range(1, order + 1)]
                constants.append(n * max(moments))
            self.assertLess(max(constants), 0.05)

    def test_weight_vector(self):
        vector = bin_weights(2, 0.1, 0.5, 100)

        self.assertEqual(vector.weights.shape, (99,))
        self.assertAlmostEqual(vector.kernel_l2_norm_sq, 1.125, places=12)
        self.assertAlmostEqual(float(vector.weights.sum()), 1.0, places=12)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidConfiguration) as cm:
            bin_weights(2, 0.1, 0.5, 2)
        self.assertEqual(cm.exception.payload, {'n': 2})
        with self.assertRaises(InvalidConfiguration) as cm:
            bin_weights(2, 0.1, 1.5, 100)
        self.assertEqual(cm.exception.payload, {'x': 1.5})
        with self.assertRaises(InvalidConfiguration) as cm:
            bin_weights(2, 0.5, 0.5, 100)
        self.assertEqual(cm.exception.payload, {'h': 0.5})


class TestSampleValidation(unittest.TestCase):  # pragma: no cover

    def test_default_bandwidth(self):
        self.assertAlmostEqual(default_bandwidth(1000), 1000 ** -0.2, places=15)
        self.assertAlmostEqual(default_bandwidth(1000, beta=1.0), 1000 ** (-1.0 / 3.0), places=15)

    def test_detecting_design(self):
        self.assertEqual(detect_design(fixed_design(25)), Design.FIXED)
        self.assertEqual(detect_design([0.1, 0.2, 0.9]), Design.RANDOM_UNIFORM)

    def test_difference_series(self):
        sample = make_sample([0.1, 0.2, 0.9], [1.0, 4.0, 9.0])

        assert_array_equal(difference_series(sample).d, [-3.0, -5.0])

    def test_length_mismatch(self):
        with self.assertRaises(InvalidInput) as cm:
            make_sample([0.1, 0.2, 0.9], [1.0, 2.0])
        self.assertEqual(cm.exception.payload, {'x_length': 3, 'y_length': 2})

    def test_too_few_points(self):
        with self.assertRaises(InvalidInput) as cm:
            make_sample([0.5, 1.0], [1.0, 2.0])
        self.assertEqual(cm.exception.payload, {'n': 2})

    def test_not_increasing(self):
        with self.assertRaises(InvalidInput) as cm:
            make_sample([0.1, 0.1, 0.9], [1.0, 2.0, 3.0])
        self.assertEqual(str(cm.exception), 'x must be strictly increasing.')

    def test_outside_unit_interval(self):
        with self.assertRaises(InvalidInput) as cm:
            make_sample([0.1, 0.5, 1.5], [1.0, 2.0, 3.0])
        self.assertEqual(cm.exception.payload, {'x_min': 0.1, 'x_max': 1.5})

    def test_fixed_design_deviation(self):
        sample = Sample(x=np.array([0.2, 0.5, 1.0]), y=np.zeros(3), design=Design.FIXED)

        with self.assertRaises(InvalidInput) as cm:
            validate_sample(sample)
        self.assertEqual(str(cm.exception), 'Fixed design requires x_i = i/n.')


class TestEstimateVariance(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)

    def test_constant_mean_without_noise(self):
        sample = make_sample(fixed_design(20), np.full(20, 3.0))
        use_case = self.container.estimate_variance

        result = use_case(sample, h=0.2)

        assert_array_equal(result.values, np.zeros(20))
        self.assertEqual(result.method, Method.DIFFERENCE)

    def test_linear_mean_without_noise(self):
        n, slope = 100, 2.0
        x = fixed_design(n)
        sample = make_sample(x, slope * x)
        use_case = self.container.estimate_variance

        result = use_case(sample, h=0.15, order=2)

        assert_allclose(result.values, np.full(n, slope ** 2 / (2.0 * n ** 2)), rtol=1e-10)

    def test_shift_invariance(self):
        y = np.random.default_rng(0).integers(-50, 50, size=40) / 8.0
        use_case = self.container.estimate_variance

        original = use_case(make_sample(fixed_design(40), y), h=0.2)
        shifted = use_case(make_sample(fixed_design(40), y + 3.0), h=0.2)

        assert_array_equal(shifted.values, original.values)

    def test_scale_equivariance(self):
        y = np.random.default_rng(1).standard_normal(40)
        use_case = self.container.estimate_variance

        original = use_case(make_sample(fixed_design(40), y), h=0.2)
        scaled = use_case(make_sample(fixed_design(40), 2.0 * y), h=0.2)

        assert_array_equal(scaled.values, 4.0 * original.values)

    def test_matches_numerically_integrated_weights(self):
        n, h = 20, 0.2
        x = fixed_design(n)
        y = np.random.default_rng(2).standard_normal(n)
        squared = difference_series(make_sample(x, y)).d ** 2
        edges = design_edges(x)
        use_case = self.container.estimate_variance

        for order in range(4):
            result = use_case(make_sample(x, y), h=h, order=order)
            expected = [0.5 * quadrature_weights(order, h, point, edges) @ squared for point in x]
            assert_allclose(result.values, expected, rtol=0, atol=1e-10)

    def test_locality(self):
        n, h = 100, 0.1
        x = fixed_design(n)
        y = np.random.default_rng(5).standard_normal(n)
        shock = 100.0 * np.random.default_rng(6).standard_normal(n)
        use_case = self.container.estimate_variance

        for point in (0.05, 0.5, 0.93):
            far = np.abs(x - point) > h + 2.0 / n
            original = use_case(make_sample(x, y), h=h, grid=[point])
            distant = use_case(make_sample(x, y + far * shock), h=h, grid=[point])
            near = use_case(make_sample(x, y + ~far * shock), h=h, grid=[point])

            assert_allclose(distant.values, original.values, rtol=1e-12)
            self.assertNotAlmostEqual(near.values[0], original.values[0], places=3)

    def test_truncation(self):
        n = 30
        y = np.zeros(n)
        y[10] = 10.0
        sample = make_sample(fixed_design(n), y)
        use_case = self.container.estimate_variance

        raw = use_case(sample, h=0.2, order=2)
        truncated = use_case(sample, h=0.2, order=2, truncate=True)

        self.assertLess(raw.values.min(), 0.0)
        self.assertEqual(truncated.values.min(), 0.0)
        self.assertTrue(truncated.truncated)
        assert_array_equal(truncated.values, np.clip(raw.values, 0.0, None))

    def test_default_bandwidth_and_grid(self):
        sample = make_sample(fixed_design(50), np.random.default_rng(3).standard_normal(50))
        use_case = self.container.estimate_variance

        result = use_case(sample)

        self.assertAlmostEqual(result.h, 50 ** -0.2, places=15)
        assert_array_equal(result.grid, sample.x)

    def test_weights_come_from_collaborator(self):
        sample = make_sample(fixed_design(5), [0.0, 1.0, 0.0, 1.0, 0.0])
        use_case = self.container.estimate_variance
        use_case._weight_matrix = Mock(return_value=np.array([[0.25, 0.25, 0.25, 0.25]]))

        result = use_case(sample, h=0.3, order=1, grid=[0.5])

        assert_allclose(result.values, [0.5])
        args = use_case._weight_matrix.call_args[0]
        self.assertEqual(args[:2], (1, 0.3))
        assert_array_equal(args[2], [0.5])

    def test_invalid_bandwidth(self):
        sample = make_sample(fixed_design(10), np.zeros(10))

        with self.assertRaises(InvalidConfiguration) as cm:
            self.container.estimate_variance(sample, h=0.6)
        self.assertEqual(cm.exception.payload, {'h': 0.6})

    def test_invalid_grid(self):
        sample = make_sample(fixed_design(10), np.zeros(10))

        with self.assertRaises(InvalidInput) as cm:
            self.container.estimate_variance(sample, h=0.2, grid=[])
        self.assertEqual(str(cm.exception), 'Evaluation grid is empty.')
        with self.assertRaises(InvalidInput):
            self.container.estimate_variance(sample, h=0.2, grid=[0.5, 1.2])

    def test_unbiased_under_constant_variance(self):
        n = 10_000
        x = fixed_design(n)
        rng = np.random.default_rng(4)
        use_case = self.container.estimate_variance

        values = [use_case(make_sample(x, rng.standard_normal(n)), grid=[0.5]).values[0] for _ in range(200)]

        self.assertTrue(0.98 <= np.mean(values) <= 1.02)


class TestResidualEstimator(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)

    def test_local_linear_reproduces_lines(self):
        x = fixed_design(50)
        sample = make_sample(x, 2.0 + 3.0 * x)

        self.assertAlmostEqual(local_linear_fit(sample, 0.1, 0.37), 2.0 + 3.0 * 0.37, places=10)
        self.assertAlmostEqual(local_linear_fit(sample, 0.1, 0.0), 2.0, places=10)

    def test_matches_weighted_least_squares(self):
        rng = np.random.default_rng(9)
        x = np.sort(rng.uniform(size=200))
        y = np.sin(6.0 * x) + rng.standard_normal(200)
        checked = 0

        for x0, h in zip(rng.uniform(size=100), rng.uniform(0.02, 0.3, size=100)):
            fitted, valid = local_linear_smooth(x, y, h, [x0])
            if valid[0]:
                checked += 1
                expected = weighted_least_squares(x, y, h, x0)
                self.assertLess(abs(fitted[0] - expected), 1e-7 * max(1.0, abs(expected)))

        self.assertGreater(checked, 90)

    def test_too_small_bandwidth(self):
        sample = make_sample(fixed_design(10), np.zeros(10))

        with self.assertRaises(BandwidthTooSmall) as cm:
            local_linear_fit(sample, 0.01, 0.55)
        self.assertEqual(cm.exception.payload, {'h': 0.01, 'x0': 0.55})

    def test_smoothing_reports_unfittable_points(self):
        x = fixed_design(10)

        fitted, valid = local_linear_smooth(x, x, 0.06, [0.5, 0.55])

        assert_array_equal(valid, [False, True])
        self.assertTrue(np.isnan(fitted[0]))
        self.assertAlmostEqual(fitted[1], 0.55, places=12)

    def test_fit_mean(self):
        x = fixed_design(30)
        sample = make_sample(x, 1.0 - x)

        result = self.container.fit_mean(sample, 0.2)

        assert_array_equal(result.grid, x)
        assert_allclose(result.fitted, 1.0 - x, atol=1e-12)
        self.assertEqual(result.h, 0.2)

    def test_exact_linear_mean_gives_zero_variance(self):
        x = fixed_design(40)
        sample = make_sample(x, 1.0 + x)

        result = self.container.fan_yao_variance(sample, 0.2, 0.25)

        assert_allclose(result.values, np.zeros(40), atol=1e-20)
        self.assertEqual(result.method, Method.RESIDUAL)
        self.assertEqual(result.h, 0.25)
        self.assertEqual(result.h_mean, 0.2)

    def test_residuals_come_from_mean_fit(self):
        x = fixed_design(20)
        sample = make_sample(x, np.full(20, 2.0))
        use_case = self.container.fan_yao_variance
        use_case._fit_mean = Mock(return_value=MeanFit(grid=x, fitted=np.zeros(20), h=0.1))

        result = use_case(sample, 0.1, 0.3)

        assert_allclose(result.values, np.full(20, 4.0), rtol=1e-12)
        use_case._fit_mean.assert_called_with(sample, 0.1)

    @unittest.skipUnless(SLOW_TESTS, 'set HETEROVAR_SLOW_TESTS=1 to run Monte-Carlo studies')
    def test_consistent_with_cross_validated_bandwidths(self):
        config = experiment_config(n=1000, replications=20)
        errors = []
        for index in range(config.replications):
            sample = self.container.generate(config, index)
            cv_config = CVConfig(folds=10, h_grid=default_h_grid(1000), seed=index, method=Method.RESIDUAL)
            h_mean, h_var = self.container.cv_fanyao(sample, cv_config)
            estimate = self.container.fan_yao_variance(sample, h_mean, h_var)
            errors.append(cdmse(estimate, quadratic_variance(sample.x)))
        self.assertLess(np.median(errors), 0.006)


class TestModelSelection(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)
        n = 64
        self.x = fixed_design(n)
        self.linear = make_sample(self.x, 2.0 * self.x)

    def test_default_grid(self):
        grid = default_h_grid(1000)

        self.assertEqual(grid.size, 20)
        self.assertAlmostEqual(grid[0], 0.5 * 1000 ** -0.2, places=14)
        self.assertAlmostEqual(grid[-1], 0.49, places=14)
        self.assertTrue(np.all(np.diff(grid) > 0))

    def test_balanced_folds(self):
        folds = make_folds(103, 10, seed=5)

        counts = np.bincount(folds, minlength=10)
        self.assertEqual(set(counts.tolist()), {10, 11})
        assert_array_equal(folds, make_folds(103, 10, seed=5))
        self.assertFalse(np.array_equal(folds, make_folds(103, 10, seed=6)))
        assert_array_equal(np.sort(make_folds(12, 12, seed=5)), np.arange(12))

    def test_selection_prefers_smallest_bandwidth_on_ties(self):
        self.assertEqual(select_bandwidth([0.1, 0.2, 0.3], [2.0, 1.0, 1.0]), 0.2)
        self.assertEqual(select_bandwidth([0.1, 0.2, 0.3], [np.nan, 3.0, 2.0]), 0.3)

    def test_selection_without_candidates(self):
        with self.assertRaises(InsufficientPoints) as cm:
            select_bandwidth([0.1, 0.2], [np.nan, np.nan])
        self.assertEqual(cm.exception.payload, {'h_grid': [0.1, 0.2]})

    def test_invalid_configuration(self):
        with self.assertRaises(InvalidConfiguration):
            validate_cv_config(CVConfig(folds=10, h_grid=[0.2, 0.1], seed=0, method=Method.DIFFERENCE), 100)
        with self.assertRaises(InvalidConfiguration):
            validate_cv_config(CVConfig(folds=10, h_grid=[0.1, 0.5], seed=0, method=Method.DIFFERENCE), 100)
        with self.assertRaises(InvalidConfiguration) as cm:
            validate_cv_config(CVConfig(folds=1, h_grid=[0.1], seed=0, method=Method.DIFFERENCE), 100)
        self.assertEqual(cm.exception.payload, {'folds': 1, 'n': 100})
        with self.assertRaises(InvalidConfiguration) as cm:
            validate_cv_config(CVConfig(folds=10, h_grid=[0.1], seed=-1, method=Method.DIFFERENCE), 100)
        self.assertEqual(cm.exception.payload, {'seed': -1})

    def test_difference_cv_on_exact_data_picks_smallest_bandwidth(self):
        config = CVConfig(folds=8, h_grid=[0.1, 0.2, 0.3], seed=0, method=Method.DIFFERENCE)
        use_case = self.container.cv_diff

        result = use_case(self.linear, config)

        self.assertEqual(result.h_selected, 0.1)
        self.assertEqual(sorted(result.scores), [0.1, 0.2, 0.3])
        self.assertEqual([row['h'] for row in result.score_rows()], [0.1, 0.2, 0.3])

    def test_difference_cv_matches_leave_one_out_enumeration(self):
        x = fixed_design(13)
        y = np.random.default_rng(8).standard_normal(13)
        config = CVConfig(folds=12, h_grid=[0.2, 0.35], seed=3, method=Method.DIFFERENCE)

        result = self.container.cv_diff(make_sample(x, y), config)

        targets = 0.5 * np.diff(y) ** 2
        midpoints = 0.5 * (x[:-1] + x[1:])
        edges = design_edges(x)
        expected = {}
        for h in config.h_grid:
            errors = []
            for i, midpoint in enumerate(midpoints):
                weights = np.delete(quadrature_weights(2, h, midpoint, edges), i)
                errors.append((targets[i] - weights @ np.delete(targets, i) / weights.sum()) ** 2)
            expected[h] = np.mean(errors)
            self.assertLess(abs(result.scores[h] - expected[h]), 1e-9 * expected[h])
        self.assertEqual(result.h_selected, min(expected, key=expected.get))

    def test_fan_yao_cv_matches_leave_one_out_enumeration(self):
        n = 12
        x = fixed_design(n)
        y = np.cos(3.0 * x) + np.random.default_rng(9).standard_normal(n)
        config = CVConfig(folds=n, h_grid=[0.2, 0.35], seed=3, method=Method.RESIDUAL)

        result = self.container.cv_fanyao(make_sample(x, y), config)

        def scores(response):
            return {
                h: np.mean([
                    (response[i] - weighted_least_squares(np.delete(x, i), np.delete(response, i), h, x[i])) ** 2
                    for i in range(n)
                ])
                for h in config.h_grid
            }

        mean_scores = scores(y)
        h_mean = min(mean_scores, key=mean_scores.get)
        residuals = np.array([y[i] - weighted_least_squares(x, y, h_mean, x[i]) for i in range(n)])
        variance_scores = scores(residuals ** 2)
        self.assertEqual(result.h_mean, h_mean)
        for h in config.h_grid:
            self.assertLess(abs(result.mean.scores[h] - mean_scores[h]), 1e-9 * mean_scores[h])
            self.assertLess(abs(result.variance.scores[h] - variance_scores[h]), 1e-9 * variance_scores[h])
        self.assertEqual(result.h_var, min(variance_scores, key=variance_scores.get))

    def test_difference_cv_scores_scale_with_fourth_power(self):
        y = np.random.default_rng(10).standard_normal(64)
        config = CVConfig(folds=8, h_grid=[0.1, 0.2, 0.3], seed=4, method=Method.DIFFERENCE)
        use_case = self.container.cv_diff

        original = use_case(make_sample(self.x, y), config)
        doubled = use_case(make_sample(self.x, 2.0 * y), config)
        tripled = use_case(make_sample(self.x, 3.0 * y), config)

        assert_array_equal(list(doubled.scores.values()), 16.0 * np.array(list(original.scores.values())))
        assert_allclose(list(tripled.scores.values()), 81.0 * np.array(list(original.scores.values())), rtol=1e-12)
        self.assertEqual(doubled.h_selected, original.h_selected)
        self.assertEqual(tripled.h_selected, original.h_selected)

    def test_difference_cv_builds_one_weight_matrix_per_candidate(self):
        config = CVConfig(folds=8, h_grid=[0.1, 0.2, 0.3], seed=0, method=Method.DIFFERENCE)
        use_case = self.container.cv_diff
        use_case._weight_matrix = Mock(side_effect=weight_matrix)

        use_case(self.linear, config)

        self.assertEqual(use_case._weight_matrix.call_count, 3)
        self.assertEqual([call[0][1] for call in use_case._weight_matrix.call_args_list], [0.1, 0.2, 0.3])

    def test_difference_cv_rejects_other_method(self):
        config = CVConfig(folds=8, h_grid=[0.1], seed=0, method=Method.RESIDUAL)

        with self.assertRaises(InvalidConfiguration) as cm:
            self.container.cv_diff(self.linear, config)
        self.assertEqual(cm.exception.payload, {'method': 'residual-based'})

    def test_fan_yao_cv_on_exact_data_picks_smallest_bandwidths(self):
        config = CVConfig(folds=8, h_grid=[0.1, 0.2, 0.3], seed=0, method=Method.RESIDUAL)
        use_case = self.container.cv_fanyao

        result = use_case(self.linear, config)

        self.assertEqual(tuple(result), (0.1, 0.1))
        self.assertEqual(result.h_mean, result.mean.h_selected)

    def test_fan_yao_cv_fails_when_mean_fit_is_incomplete(self):
        config = CVConfig(folds=8, h_grid=[0.1], seed=0, method=Method.RESIDUAL)
        use_case = self.container.cv_fanyao
        use_case._smoother = Mock(return_value=(np.zeros(64), np.zeros(64, dtype=bool)))

        with self.assertRaises(InsufficientPoints):
            use_case(self.linear, config)

    def test_losses(self):
        estimate = VarianceEstimate(
            grid=np.array([0.0, 0.5, 1.0]),
            values=np.array([1.0, 2.0, 3.0]),
            h=0.1,
            method=Method.DIFFERENCE
        )

        self.assertAlmostEqual(cdmse(estimate, [1.0, 2.0, 5.0]), 4.0 / 3.0, places=15)
        self.assertAlmostEqual(pointwise_squared_error(estimate, 1.5, 0.45), 0.25, places=15)
        with self.assertRaises(InvalidInput) as cm:
            cdmse(estimate, [1.0, 2.0])
        self.assertEqual(cm.exception.payload, {'estimate_length': 3, 'truth_length': 2})


class TestSimulationHelpers(unittest.TestCase):  # pragma: no cover

    def test_roughness_closed_form_matches_quadrature(self):
        for mean_id in (MeanId.F2, MeanId.F3, MeanId.F4):
            spec = FunctionSpec(mean_id=mean_id, variance_id=VarianceId.QUADRATIC)
            _, derivative = resolve_mean(spec)
            closed_form = roughness(mean_id)
            self.assertLess(abs(closed_form - roughness_by_quadrature(derivative)), 1e-8 * closed_form)

    def test_roughness_values(self):
        tabulated = {MeanId.F2: 278.15, MeanId.F3: 1110.89, MeanId.F4: 4441.88}

        self.assertEqual(roughness(MeanId.F1), 0.0)
        for mean_id, value in tabulated.items():
            self.assertLess(abs(roughness(mean_id) - value) / value, 0.0025)
        self.assertAlmostEqual(roughness(MeanId.F2), 900.0 * np.pi ** 2 / 32.0, places=9)

    def test_custom_mean_roughness(self):
        self.assertAlmostEqual(roughness(MeanId.CUSTOM, derivative=lambda x: 2.0 * x), 4.0 / 3.0, places=10)
        with self.assertRaises(UnsupportedMean) as cm:
            roughness(MeanId.CUSTOM)
        self.assertEqual(cm.exception.payload, {'mean_id': 'custom'})

    def test_rate_exponents(self):
        self.assertAlmostEqual(minimax_rate_exponent(2.0, 2.0), -0.8, places=15)
        self.assertAlmostEqual(minimax_rate_exponent(0.15, 2.0), -0.6, places=15)
        self.assertAlmostEqual(residual_rate_exponent(0.15, 2.0), -0.6 / 1.3, places=15)
        self.assertAlmostEqual(residual_rate_exponent(2.0, 2.0), -0.8, places=15)

    def test_log_log_slope(self):
        ns = np.array([100, 200, 400, 800])

        self.assertAlmostEqual(log_log_slope(ns, 3.0 * ns ** -0.8), -0.8, places=12)
        with self.assertRaises(InsufficientPoints):
            log_log_slope([100, 100, 200], [1.0, 1.0, 0.5])

    def test_replication_seeds(self):
        self.assertEqual(replication_seed(7, 3), replication_seed(7, 3))
        self.assertNotEqual(replication_seed(7, 3), replication_seed(7, 4))
        self.assertNotEqual(replication_seed(7, 3), replication_seed(8, 3))

    def test_noise_families(self):
        rng = np.random.default_rng(0)

        self.assertEqual(set(draw_noise(rng, Noise.TWO_POINT, 100).tolist()), {-1.0, 1.0})
        with self.assertRaises(InvalidConfiguration):
            draw_noise(rng, 'cauchy', 10)

    def test_noise_moments(self):
        for noise in (Noise.GAUSSIAN, Noise.TWO_POINT):
            draws = draw_noise(np.random.default_rng(12), noise, 100_000)
            self.assertLess(abs(draws.mean()), 0.02)
            self.assertLess(abs(draws.var() - 1.0), 0.03)
            self.assertLess(np.mean(draws ** 4), 3.2)
        self.assertEqual(float(np.max(draw_noise(np.random.default_rng(12), Noise.TWO_POINT, 1000) ** 4)), 1.0)

    def test_table1_configs(self):
        configs = table1_configs(master_seed=7)

        self.assertEqual([config.functions.mean_id for config in configs], [MeanId.F1, MeanId.F2, MeanId.F3, MeanId.F4])
        self.assertTrue(all(config.n == 1000 and config.replications == 100 for config in configs))
        self.assertTrue(all(config.cv.folds == 10 and config.master_seed == 7 for config in configs))
        self.assertEqual(table1_configs(fast=True)[0].replications, FAST_REPLICATIONS)

    def test_runner_keeps_task_order(self):
        runner = TaskRunner(max_workers=4)

        self.assertEqual(runner.map(lambda item: item * item, range(10)), [item * item for item in range(10)])


class TestGenerate(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)

    def test_fixed_design(self):
        sample = self.container.generate(experiment_config(n=50), 0)

        assert_array_equal(sample.x, fixed_design(50))
        self.assertEqual(sample.design, Design.FIXED)

    def test_reproducible_streams(self):
        config = experiment_config(n=50, design=Design.RANDOM_UNIFORM)

        first = self.container.generate(config, 2)
        again = self.container.generate(config, 2)
        other = self.container.generate(config, 3)

        assert_array_equal(first.x, again.x)
        assert_array_equal(first.y, again.y)
        self.assertFalse(np.array_equal(first.y, other.y))
        self.assertTrue(np.all(np.diff(first.x) > 0))

    def test_two_point_noise(self):
        sample = self.container.generate(experiment_config(n=50, noise=Noise.TWO_POINT), 0)

        assert_allclose(sample.y ** 2, quadratic_variance(sample.x), rtol=1e-12)

    def test_invalid_configuration(self):
        with self.assertRaises(InvalidConfiguration) as cm:
            self.container.generate(experiment_config(n=5), 0)
        self.assertEqual(cm.exception.payload, {'n': 5})


class TestRunTable1(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)
        self.x = fixed_design(40)
        self.sample = Sample(x=self.x, y=np.zeros(40), design=Design.FIXED)
        self.truth = quadratic_variance(self.x)
        self.generate = Mock(return_value=self.sample)
        self.cv_diff = Mock(return_value=CVResult(h_selected=0.1, scores={0.1: 1.0}))
        self.cv_fanyao = Mock(return_value=FanYaoCVResult(
            mean=CVResult(h_selected=0.2, scores={0.2: 1.0}),
            variance=CVResult(h_selected=0.3, scores={0.3: 1.0})
        ))
        self.estimate_variance = Mock(return_value=VarianceEstimate(
            grid=self.x, values=self.truth + 0.1, h=0.1, method=Method.DIFFERENCE
        ))
        self.fan_yao_variance = Mock(return_value=VarianceEstimate(
            grid=self.x, values=self.truth + 0.2, h=0.3, method=Method.RESIDUAL, h_mean=0.2
        ))

    def set_up_use_case(self):
        use_case = self.container.run_table1
        use_case._generate = self.generate
        use_case._cv_diff = self.cv_diff
        use_case._cv_fanyao = self.cv_fanyao
        use_case._estimate_variance = self.estimate_variance
        use_case._fan_yao_variance = self.fan_yao_variance
        return use_case

    def test_successful_call(self):
        use_case = self.set_up_use_case()
        config = experiment_config(n=40, replications=3)

        result = use_case(config)

        self.assertEqual(len(result.per_replication), 6)
        self.assertEqual(
            [(record.replication, record.method) for record in result.per_replication],
            [(index, method) for index in range(3) for method in (Method.DIFFERENCE, Method.RESIDUAL)]
        )
        self.assertAlmostEqual(result.median_cdmse[Method.DIFFERENCE], 0.01, places=12)
        self.assertAlmostEqual(result.median_cdmse[Method.RESIDUAL], 0.04, places=12)
        self.assertEqual(result.failures, {Method.DIFFERENCE: 0, Method.RESIDUAL: 0})
        self.assertEqual(result.per_replication[1].h_mean, 0.2)
        self.assertEqual(result.per_replication[1].h, 0.3)
        self.generate.assert_called_with(config, 2)
        self.estimate_variance.assert_called_with(self.sample, h=0.1, order=2)
        self.fan_yao_variance.assert_called_with(self.sample, 0.2, 0.3)

    def test_cross_validation_uses_replication_seed(self):
        use_case = self.set_up_use_case()

        use_case(experiment_config(n=40, replications=1))

        cv_config = self.cv_diff.call_args[0][1]
        self.assertEqual(cv_config.seed, replication_seed(0, 0))
        assert_array_equal(cv_config.h_grid, default_h_grid(40))
        self.assertEqual(self.cv_fanyao.call_args[0][1].method, Method.RESIDUAL)

    def test_failed_replications_are_excluded(self):
        self.cv_fanyao.side_effect = InsufficientPoints(message='Every candidate bandwidth was disqualified.')
        use_case = self.set_up_use_case()

        result = use_case(experiment_config(n=40, replications=3))

        self.assertIsNone(result.median_cdmse[Method.RESIDUAL])
        self.assertEqual(result.failures[Method.RESIDUAL], 3)
        self.assertEqual(result.per_replication[1].error, 'InsufficientPoints')
        self.assertEqual(
            result.summary_dict()['residual-based'],
            {'median': None, 'q1': None, 'q3': None, 'failures': 3}
        )
        self.fan_yao_variance.assert_not_called()

    def test_real_collaborators_are_reproducible(self):
        use_case = self.container.run_table1
        config = experiment_config(n=100, replications=2, mean_id=MeanId.F2)

        first = use_case(config).summary_dict()
        use_case._runner = TaskRunner(max_workers=3)
        second = use_case(config).summary_dict()

        self.assertEqual(first, second)


class TestRateStudy(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)

    def test_successful_call(self):
        result = self.container.rate_study([50, 100, 200], experiment_config(n=50, replications=3))

        self.assertEqual(len(result.points), 3)
        self.assertAlmostEqual(result.points[0][0], np.log(50), places=12)
        self.assertAlmostEqual(result.expected_slope, -0.8, places=15)
        self.assertAlmostEqual(result.residual_expected_slope, -0.8, places=15)
        self.assertTrue(np.isfinite(result.slope))

    def test_bandwidth_rule(self):
        use_case = self.container.rate_study
        use_case._estimate_variance = Mock(return_value=VarianceEstimate(
            grid=fixed_design(50), values=np.ones(50), h=0.1, method=Method.DIFFERENCE
        ))
        use_case._generate = Mock(return_value=Sample(x=fixed_design(50), y=np.zeros(50), design=Design.FIXED))

        with self.assertRaises(InsufficientPoints):
            use_case([100, 200], experiment_config())
        with self.assertRaises(InvalidConfiguration):
            use_case([200, 100, 400], experiment_config())
        with self.assertRaises(InvalidConfiguration):
            use_case([20, 40, 80], experiment_config())
        use_case([64, 128, 256], experiment_config(replications=1), fixed_h_rule=-0.5)
        hs = [call[1]['h'] for call in use_case._estimate_variance.call_args_list]
        assert_allclose(hs, [0.125, 0.125 / 2 ** 0.5, 0.0625])


class TestMomentDistribution(unittest.TestCase):  # pragma: no cover

    def test_matches_normal_moments(self):
        for q in (3, 5, 7, 9, 11):
            G = moment_distribution(q)
            self.assertEqual(G.nodes.size, (q + 1) // 2)
            self.assertTrue(np.all(G.weights > 0))
            assert_array_equal(G.nodes, -G.nodes[::-1])
            assert_array_equal(G.weights, G.weights[::-1])
            for j in range(q + 1):
                expected = 0.0 if j % 2 else float(np.prod(np.arange(j - 1, 0, -2)))
                self.assertLess(abs(G.moment(j) - expected), 1e-8)

    def test_two_point_distribution(self):
        G = moment_distribution(3)

        assert_allclose(G.nodes, [-1.0, 1.0], atol=1e-15)
        assert_allclose(G.weights, [0.5, 0.5], atol=1e-15)
        self.assertAlmostEqual(G.B, 1.0, places=15)

    def test_degenerate_distribution(self):
        G = moment_distribution(1)

        assert_array_equal(G.nodes, [0.0])
        self.assertEqual(G.B, 0.0)

    def test_invalid_order(self):
        with self.assertRaises(InvalidInput) as cm:
            moment_distribution(4)
        self.assertEqual(cm.exception.payload, {'q': 4})

    def test_smallest_odd_order(self):
        self.assertEqual(smallest_odd_q(0.15), 7)
        self.assertEqual(smallest_odd_q(0.3), 3)
        self.assertEqual(smallest_odd_q(0.5), 3)
        self.assertEqual(smallest_odd_q(1.5), 1)


class TestHellingerAffinity(unittest.TestCase):  # pragma: no cover

    def test_testing_problem(self):
        problem = make_testing_problem(1000, 0.3, 5, M_f=2.0)

        self.assertAlmostEqual(problem.theta, 2.0 / (2.0 * np.sqrt(3.0)) * 1000 ** -0.3, places=14)
        self.assertEqual(problem.G.q, 5)

    def test_hypothesis_densities(self):
        G = moment_distribution(5)
        t = np.array([-1.0, 0.0, 2.5])

        assert_allclose(mixture_density(moment_distribution(1), 0.7, t), np.exp(-t ** 2 / 2.0) / np.sqrt(2.0 * np.pi), rtol=1e-14)
        assert_allclose(null_density(0.0, t), mixture_density(G, 0.0, t), rtol=1e-14)
        for density in (lambda s: null_density(0.4, s), lambda s: mixture_density(G, 0.4, s)):
            self.assertAlmostEqual(quad(lambda s: float(density(s)), -np.inf, np.inf)[0], 1.0, places=10)

    def test_affinity_approaches_one(self):
        rhos = [hellinger_affinity(make_testing_problem(n, 0.3, 5)) for n in (100, 1000, 10_000)]

        self.assertTrue(rhos[0] <= rhos[1] <= rhos[2] <= 1.0)
        self.assertGreater(rhos[2], 0.9)

    def test_affinity_nonincreasing_in_theta(self):
        G = moment_distribution(5)

        rhos = [single_sample_affinity(G, theta) for theta in np.linspace(0.0, 1.2, 13)]

        self.assertEqual(rhos[0], 1.0)
        self.assertTrue(np.all(np.diff(rhos) <= 1e-12))
        self.assertLess(rhos[-1], 1.0)

    def test_matches_trapezoid_oracle(self):
        G = moment_distribution(5)
        for theta in (0.0725, 0.3, 0.5, 1.0):
            self.assertLess(
                abs(single_sample_affinity(G, theta) - single_sample_affinity_trapezoid(G, theta)),
                1e-8
            )

    def test_squared_distance_is_nonnegative(self):
        G = moment_distribution(3)

        self.assertEqual(squared_hellinger(G, 0.0), 0.0)
        self.assertGreater(squared_hellinger(G, 1.0), 0.0)

    def test_tolerance_failure(self):
        G = moment_distribution(3)

        with patch('heterovar.boundlab.quad', return_value=(0.1, 1e-3, {})):
            with self.assertRaises(NumericToleranceError) as cm:
                squared_hellinger(G, 1.0)
        self.assertEqual(cm.exception.payload['error'], 1e-3)


class TestHcIntegral(unittest.TestCase):  # pragma: no cover

    def test_vanishes_for_every_variance(self):
        for d in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
            self.assertLess(abs(hc_integral(d)), 1e-10)

    def test_integrand_is_odd(self):
        x = np.linspace(0.0, 30.0, 301)

        assert_array_equal(hc_integrand(-x, 2.0), -hc_integrand(x, 2.0))
        self.assertGreater(float(hc_integrand(1.0, 2.0)), 0.0)

    def test_invalid_variance(self):
        with self.assertRaises(InvalidInput) as cm:
            hc_integral(0.0)
        self.assertEqual(cm.exception.payload, {'d': 0.0})


class TestAdversarialMean(unittest.TestCase):  # pragma: no cover

    def test_bumps(self):
        mean = adversarial_mean(100, 0.15, 7, 1.0, seed=0)
        G = moment_distribution(7)

        self.assertTrue(np.all(np.isin(mean.r, G.nodes)))
        assert_allclose(mean(mean.design_x), mean.values, rtol=1e-14)
        assert_allclose(mean.values, mean.theta * mean.r)
        assert_allclose(mean([0.5 / 100, 10.5 / 100]), [0.0, 0.0], atol=1e-12)
        self.assertEqual(float(mean(1.5)), 0.0)

    def test_hoelder_quotient(self):
        mean = adversarial_mean(100, 0.3, 3, 1.0, seed=4)
        first, second = np.random.default_rng(11).uniform(size=(2, 10_000))

        sampled = np.abs(mean(first) - mean(second)) / np.abs(first - second) ** 0.3
        neighbours = np.abs(np.diff(mean.values)) / (1.0 / 100) ** 0.3

        self.assertLessEqual(sampled.max(), 1.0 + 1e-12)
        self.assertLessEqual(neighbours.max(), 1.0 + 1e-12)
        self.assertGreater(neighbours.max(), 0.999)

    def test_reproducible(self):
        assert_array_equal(adversarial_mean(50, 0.15, 7, 1.0, 3).r, adversarial_mean(50, 0.15, 7, 1.0, 3).r)

    def test_invalid_moment_order(self):
        with self.assertRaises(InvalidConfiguration) as cm:
            adversarial_mean(100, 0.15, 5, 1.0, seed=0)
        self.assertEqual(cm.exception.payload, {'q': 5, 'alpha': 0.15})
        with self.assertRaises(InvalidConfiguration):
            adversarial_mean(2, 0.15, 7, 1.0, seed=0)


class TestLowerBoundExperiment(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)

    def test_successful_call(self):
        result = self.container.lower_bound_experiment([0.15], [100, 200, 400], replications=3)

        self.assertEqual(len(result.rows), 6)
        self.assertEqual([(slope.alpha, slope.q) for slope in result.slopes], [(0.15, 7), (None, None)])
        self.assertAlmostEqual(result.slopes[0].expected_slope, -0.6, places=15)
        self.assertAlmostEqual(result.slopes[1].expected_slope, -0.8, places=15)
        self.assertTrue(all(row.median_sq_error > 0 for row in result.rows))

    def test_evaluates_at_one_point_with_optimal_bandwidth(self):
        use_case = self.container.lower_bound_experiment
        use_case._estimate_variance = Mock(return_value=VarianceEstimate(
            grid=np.array([0.5]), values=np.array([1.5]), h=0.1, method=Method.DIFFERENCE
        ))

        result = use_case([0.2], [100, 200, 400], replications=2, include_control=False)

        self.assertEqual([row.median_sq_error for row in result.rows], [0.25, 0.25, 0.25])
        kwargs = use_case._estimate_variance.call_args[1]
        self.assertEqual(kwargs['grid'], [0.5])
        self.assertAlmostEqual(kwargs['h'], 400 ** -0.2, places=15)

    def test_mean_and_noise_use_separate_streams(self):
        use_case = self.container.lower_bound_experiment
        use_case._estimate_variance = Mock(return_value=VarianceEstimate(
            grid=np.array([0.5]), values=np.array([1.5]), h=0.1, method=Method.DIFFERENCE
        ))
        mean_stream, noise_stream = np.random.SeedSequence(0, spawn_key=(0, 100, 0)).spawn(2)
        mean = adversarial_mean(100, 0.15, 7, 20.0, int(mean_stream.generate_state(1)[0]))

        use_case([0.15], [100, 200, 400], replications=1, include_control=False)

        sample = use_case._estimate_variance.call_args_list[0][0][0]
        assert_array_equal(sample.y, mean.values + np.random.default_rng(noise_stream).standard_normal(100))

    def test_invalid_alpha(self):
        with self.assertRaises(InvalidConfiguration) as cm:
            self.container.lower_bound_experiment([0.3], [100, 200, 400])
        self.assertEqual(cm.exception.payload, {'alpha': 0.3})


class TestSchemas(unittest.TestCase):  # pragma: no cover

    def test_loading_minimal_experiment(self):
        config = ExperimentConfigSchema().load({'n': 100, 'replications': 2, 'functions': {'mean_id': 'f2'}})

        self.assertEqual(config.n, 100)
        self.assertEqual(config.functions.mean_id, MeanId.F2)
        self.assertEqual(config.functions.variance_id, VarianceId.QUADRATIC)
        self.assertEqual(config.noise, Noise.GAUSSIAN)
        self.assertEqual(config.design, Design.FIXED)
        self.assertEqual(config.cv.folds, 10)
        self.assertIsNone(config.cv.h_grid)

    def test_loading_full_experiment(self):
        config = ExperimentConfigSchema().load({
            'n': 500,
            'replications': 4,
            'functions': {'mean_id': 'f4', 'alpha': 0.5},
            'noise': 'scaled-symmetric-two-point',
            'design': 'random-uniform',
            'cv': {'folds': 5, 'h_grid': [0.1, 0.2], 'seed': 3, 'method': 'residual-based'},
            'master_seed': 9,
            'order': 1
        })

        self.assertEqual(config.noise, Noise.TWO_POINT)
        self.assertEqual(config.cv.method, Method.RESIDUAL)
        self.assertEqual(config.cv.h_grid, [0.1, 0.2])
        self.assertEqual(config.functions.alpha, 0.5)

    def test_invalid_fields(self):
        with self.assertRaises(ValidationError) as cm:
            ExperimentConfigSchema().load({'n': 5, 'replications': 2, 'functions': {'mean_id': 'f9'}})
        self.assertIn('n', cm.exception.messages)
        self.assertIn('mean_id', cm.exception.messages['functions'])
        with self.assertRaises(ValidationError) as cm:
            CVConfigSchema().load({'h_grid': [0.6]})
        self.assertIn('h_grid', cm.exception.messages)

    def test_parameter_validator(self):
        validator = ParameterValidator()

        self.assertEqual(validator.bandwidth('--h', 0.2), 0.2)
        self.assertEqual(validator.at_least('--order', 0, 0), 0)
        with self.assertRaises(InvalidConfiguration) as cm:
            validator.bandwidth('--h', 0.7)
        exception = cm.exception
        self.assertEqual(str(exception), 'Invalid value for --h.')
        self.assertEqual(exception.payload['field'], '--h')
        self.assertEqual(exception.payload['value'], 0.7)


class TestDto(unittest.TestCase):  # pragma: no cover

    def test_as_dict(self):
        estimate = VarianceEstimate(grid=np.array([0.5]), values=np.array([1.0]), h=0.1, method=Method.DIFFERENCE)

        self.assertEqual(
            estimate.as_dict(),
            {
                'grid': [0.5],
                'values': [1.0],
                'h': 0.1,
                'method': 'difference-based',
                'truncated': False,
                'h_mean': None
            }
        )

    def test_summary_dict(self):
        summary = ExperimentSummary(
            per_replication=[],
            median_cdmse={Method.DIFFERENCE: 0.004},
            quartiles={Method.DIFFERENCE: (0.003, 0.005)},
            failures={Method.DIFFERENCE: 1}
        )

        self.assertEqual(
            summary.summary_dict(),
            {'difference-based': {'median': 0.004, 'q1': 0.003, 'q3': 0.005, 'failures': 1}}
        )


class TestContainer(unittest.TestCase):  # pragma: no cover

    def test_worker_count(self):
        self.assertEqual(worker_count('3'), 3)
        self.assertEqual(worker_count(0), os.cpu_count() or 1)
        with self.assertRaises(InvalidConfiguration):
            worker_count('many')
        with self.assertRaises(InvalidConfiguration):
            worker_count(-1)

    def test_testing_mode_is_serial(self):
        container = Container(testing_mode=True)

        self.assertEqual(container.runner._max_workers, 1)
        self.assertIsInstance(container.csv_client._stdout, io.StringIO)


class CommandTestCase(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)
        self.directory = tempfile.mkdtemp()
        self.stderr = io.StringIO()
        patcher = patch('sys.stderr', self.stderr)
        patcher.start()
        self.addCleanup(patcher.stop)

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, name):
        return os.path.join(self.directory, name)

    def write_sample(self, name, x, y):
        self.container.csv_client.write(self.path(name), ['x', 'y'], zip(x, y))
        return self.path(name)

    def run_main(self, *argv):
        return main(list(argv), container=self.container)

    def read_json(self, name):
        with open(self.path(name)) as handle:
            return json.load(handle)

    def read_bytes(self, name):
        with open(self.path(name), 'rb') as handle:
            return handle.read()


class TestEstimateCommand(CommandTestCase):  # pragma: no cover

    def test_constant_response(self):
        path = self.write_sample('data.csv', [0.25, 0.5, 0.75, 1.0], [2.0, 2.0, 2.0, 2.0])

        status = self.run_main('estimate', '--input', path, '--h', '0.06', '--order', '2', '--output', self.path('out.csv'))

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('out.csv'), ['x', 'vhat'])
        assert_array_equal(columns['vhat'], np.zeros(4))

    def test_output_re_parses_exactly(self):
        x = fixed_design(60)
        y = np.random.default_rng(5).standard_normal(60)
        path = self.write_sample('data.csv', x, y)

        self.run_main('estimate', '--input', path, '--h', '0.2', '--output', self.path('out.csv'))

        expected = self.container.estimate_variance(make_sample(x, y), h=0.2)
        columns = self.container.csv_client.read_columns(self.path('out.csv'), ['x', 'vhat'])
        assert_array_equal(columns['vhat'], expected.values)

    def test_equispaced_grid_to_stdout(self):
        path = self.write_sample('data.csv', fixed_design(40), np.zeros(40))

        status = self.run_main('estimate', '--input', path, '--grid', '5')

        self.assertEqual(status, 0)
        lines = self.container.csv_client._stdout.getvalue().splitlines()
        self.assertEqual(lines[0], 'x,vhat')
        rows = [[float(cell) for cell in line.split(',')] for line in lines[1:]]
        self.assertEqual([row[0] for row in rows], [0.0, 0.25, 0.5, 0.75, 1.0])
        self.assertEqual([row[1] for row in rows], [0.0] * 5)

    def test_fan_yao_with_given_bandwidths(self):
        x = fixed_design(40)
        path = self.write_sample('data.csv', x, 1.0 + x)

        status = self.run_main(
            'estimate', '--input', path, '--method', 'fanyao', '--h-mean', '0.2', '--h-var', '0.25',
            '--output', self.path('out.csv')
        )

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('out.csv'), ['vhat'])
        assert_allclose(columns['vhat'], np.zeros(40), atol=1e-20)

    def test_fan_yao_cross_validates_missing_bandwidths(self):
        x = fixed_design(40)
        path = self.write_sample('data.csv', x, 1.0 + x)
        handler = self.container.estimate_handler
        handler._cv_fanyao = Mock(return_value=FanYaoCVResult(
            mean=CVResult(h_selected=0.2, scores={0.2: 0.0}),
            variance=CVResult(h_selected=0.3, scores={0.3: 0.0})
        ))
        handler._fan_yao_variance = Mock(return_value=VarianceEstimate(
            grid=x, values=np.zeros(40), h=0.25, method=Method.RESIDUAL, h_mean=0.2
        ))

        self.run_main('estimate', '--input', path, '--method', 'fanyao', '--h-var', '0.25', '--seed', '4')

        self.assertEqual(handler._cv_fanyao.call_args[0][1].seed, 4)
        self.assertEqual(handler._fan_yao_variance.call_args[0][1:], (0.2, 0.25))

    def test_invalid_bandwidth(self):
        path = self.write_sample('data.csv', fixed_design(10), np.zeros(10))

        status = self.run_main('estimate', '--input', path, '--h', '0.7')

        self.assertEqual(status, 1)
        report = json.loads(self.stderr.getvalue())
        self.assertEqual(report['description'], 'Invalid value for --h.')
        self.assertEqual(report['payload']['field'], '--h')

    def test_missing_input(self):
        status = self.run_main('estimate', '--input', self.path('absent.csv'))

        self.assertEqual(status, 1)
        self.assertIn('absent.csv', self.stderr.getvalue())

    def test_unknown_flag(self):
        with self.assertRaises(SystemExit) as cm:
            self.run_main('estimate', '--bandwidth', '0.1')
        self.assertEqual(cm.exception.code, 1)

    def test_unknown_subcommand(self):
        with self.assertRaises(SystemExit) as cm:
            self.run_main('plot')
        self.assertEqual(cm.exception.code, 1)


class TestCvCommand(CommandTestCase):  # pragma: no cover

    def setUp(self):
        super().setUp()
        x = fixed_design(64)
        self.input = self.write_sample('data.csv', x, 2.0 * x)

    def test_difference_method(self):
        status = self.run_main(
            'cv', '--input', self.input, '--method', 'diff', '--k', '8', '--h-grid', '0.1:0.3:3',
            '--output', self.path('cv.json')
        )

        self.assertEqual(status, 0)
        body = self.read_json('cv.json')
        self.assertAlmostEqual(body['h_selected'], 0.1, places=15)
        self.assertEqual(len(body['scores']), 3)
        self.assertEqual(sorted(body['scores'][0]), ['h', 'score'])

    def test_fan_yao_method(self):
        status = self.run_main(
            'cv', '--input', self.input, '--method', 'fanyao', '--k', '8', '--h-grid', '0.1:0.3:3',
            '--output', self.path('cv.json')
        )

        self.assertEqual(status, 0)
        body = self.read_json('cv.json')
        self.assertAlmostEqual(body['h_mean'], 0.1, places=15)
        self.assertEqual(body['h_selected'], body['h_var'])
        self.assertEqual(len(body['mean_scores']), 3)

    def test_invalid_grid(self):
        status = self.run_main('cv', '--input', self.input, '--h-grid', '0.3:0.1:3')

        self.assertEqual(status, 1)
        self.assertEqual(json.loads(self.stderr.getvalue())['payload']['field'], '--h-grid')

    def test_invalid_folds(self):
        status = self.run_main('cv', '--input', self.input, '--k', '1')

        self.assertEqual(status, 1)
        self.assertEqual(json.loads(self.stderr.getvalue())['payload']['field'], '--k')


class TestSimulateCommand(CommandTestCase):  # pragma: no cover

    def setUp(self):
        super().setUp()
        self.summary = ExperimentSummary(
            per_replication=[ReplicationRecord(replication=0, seed=11, method=Method.DIFFERENCE, h=0.1, cdmse=0.004)],
            median_cdmse={Method.DIFFERENCE: 0.004},
            quartiles={Method.DIFFERENCE: (0.003, 0.005)},
            failures={Method.DIFFERENCE: 0}
        )

    def test_configuration_from_flags(self):
        handler = self.container.simulate_handler
        handler._run_table1 = Mock(return_value=self.summary)

        status = self.run_main(
            'simulate', '--n', '100', '--replications', '2', '--mean', 'f2', '--seed', '5',
            '--output', self.path('summary.json'), '--replications-csv', self.path('reps.csv')
        )

        self.assertEqual(status, 0)
        config = handler._run_table1.call_args[0][0]
        self.assertEqual((config.n, config.replications, config.master_seed), (100, 2, 5))
        self.assertEqual(config.functions.mean_id, MeanId.F2)
        self.assertEqual(
            self.read_json('summary.json'),
            {'difference-based': {'median': 0.004, 'q1': 0.003, 'q3': 0.005, 'failures': 0}}
        )
        columns = self.container.csv_client.read_columns(self.path('reps.csv'), ['rep', 'h', 'cdmse'])
        assert_array_equal(columns['cdmse'], [0.004])

    def test_configuration_from_file(self):
        handler = self.container.simulate_handler
        handler._run_table1 = Mock(return_value=self.summary)
        with open(self.path('config.json'), 'w') as handle:
            json.dump({'n': 200, 'replications': 7, 'functions': {'mean_id': 'f3'}, 'master_seed': 1}, handle)

        status = self.run_main('simulate', '--config', self.path('config.json'), '--fast', '--seed', '9')

        self.assertEqual(status, 0)
        config = handler._run_table1.call_args[0][0]
        self.assertEqual((config.n, config.replications, config.master_seed), (200, FAST_REPLICATIONS, 9))

    def test_invalid_configuration_file(self):
        with open(self.path('config.json'), 'w') as handle:
            json.dump({'n': 5, 'replications': 2, 'functions': {'mean_id': 'f1'}}, handle)

        status = self.run_main('simulate', '--config', self.path('config.json'))

        self.assertEqual(status, 1)
        self.assertIn('n', json.loads(self.stderr.getvalue())['payload'])

    def test_preset_runs_four_means(self):
        handler = self.container.simulate_handler
        handler._run_table1 = Mock(return_value=self.summary)

        status = self.run_main('simulate', '--preset', 'table1', '--fast', '--seed', '7', '--output', self.path('summary.json'))

        self.assertEqual(status, 0)
        configs = [call[0][0] for call in handler._run_table1.call_args_list]
        self.assertEqual([config.replications for config in configs], [FAST_REPLICATIONS] * 4)
        self.assertEqual(sorted(self.read_json('summary.json')), ['f1', 'f2', 'f3', 'f4'])

    def test_identical_outputs_across_thread_caps(self):
        argv = ['simulate', '--n', '100', '--replications', '3', '--mean', 'f3', '--seed', '7']

        self.run_main(*argv, '--output', self.path('first.json'))
        self.container.run_table1._runner = TaskRunner(max_workers=3)
        self.run_main(*argv, '--output', self.path('second.json'))

        self.assertEqual(self.read_bytes('first.json'), self.read_bytes('second.json'))

    @unittest.skipUnless(SLOW_TESTS, 'set HETEROVAR_SLOW_TESTS=1 to run Monte-Carlo studies')
    def test_preset_is_deterministic(self):
        argv = ['simulate', '--preset', 'table1', '--fast', '--seed', '7']

        self.run_main(*argv, '--output', self.path('first.json'))
        self.container.run_table1._runner = TaskRunner(max_workers=worker_count(0))
        self.run_main(*argv, '--output', self.path('second.json'))

        self.assertEqual(self.read_bytes('first.json'), self.read_bytes('second.json'))


class TestRatesCommand(CommandTestCase):  # pragma: no cover

    def test_successful_call(self):
        handler = self.container.rates_handler
        handler._rate_study = Mock(return_value=RateStudyResult(
            slope=-0.75,
            points=[(np.log(250), -5.0), (np.log(500), -5.5), (np.log(1000), -6.0)],
            expected_slope=-0.8,
            residual_expected_slope=-0.6 / 1.3
        ))

        status = self.run_main(
            'rates', '--n-list', '250,500,1000', '--replications', '5',
            '--output', self.path('rates.csv'), '--summary', self.path('slope.json')
        )

        self.assertEqual(status, 0)
        ns, config = handler._rate_study.call_args[0]
        self.assertEqual(ns, [250, 500, 1000])
        self.assertEqual((config.n, config.replications), (250, 5))
        self.assertEqual(handler._rate_study.call_args[1], {'fixed_h_rule': -0.2})
        columns = self.container.csv_client.read_columns(self.path('rates.csv'), ['log_n', 'log_median_cdmse'])
        assert_array_equal(columns['log_median_cdmse'], [-5.0, -5.5, -6.0])
        self.assertEqual(self.read_json('slope.json'), {
            'slope': -0.75,
            'expected_slope': -0.8,
            'residual_expected_slope': -0.6 / 1.3
        })

    def test_too_few_sample_sizes(self):
        status = self.run_main('rates', '--n-list', '100,200')

        self.assertEqual(status, 1)
        self.assertEqual(json.loads(self.stderr.getvalue())['payload'], {'ns': [100, 200]})


class TestTheoryCommands(CommandTestCase):  # pragma: no cover

    def test_hc_check(self):
        status = self.run_main('theory', 'hc-check', '--d-list', '1,10', '--output', self.path('hc.csv'))

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('hc.csv'), ['d', 'value'])
        assert_array_equal(columns['d'], [1.0, 10.0])
        self.assertTrue(np.all(np.abs(columns['value']) < 1e-10))

    def test_moments_as_json(self):
        status = self.run_main('theory', 'moments', '--q', '3', '--format', 'json', '--output', self.path('g.json'))

        self.assertEqual(status, 0)
        rows = self.read_json('g.json')
        self.assertEqual(len(rows), 2)
        self.assertAlmostEqual(rows[0]['weight'], 0.5, places=15)

    def test_hellinger(self):
        status = self.run_main('theory', 'hellinger', '--alpha', '0.3', '--q', '5', '--n-list', '100,1000', '--output', self.path('h.csv'))

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('h.csv'), ['n', 'theta', 'affinity'])
        assert_array_equal(columns['n'], [100.0, 1000.0])
        self.assertTrue(np.all(columns['affinity'] <= 1.0))

    def test_numeric_failure_exit_code(self):
        with patch('heterovar.boundlab.quad', return_value=(0.1, 1e-3, {})):
            status = self.run_main('theory', 'hellinger', '--alpha', '0.3', '--n-list', '100')

        self.assertEqual(status, 2)

    def test_adversarial(self):
        status = self.run_main('theory', 'adversarial', '--alpha', '0.15', '--q', '7', '--n', '20', '--seed', '3', '--output', self.path('a.csv'))

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('a.csv'), ['i', 'x', 'r', 'mean'])
        assert_array_equal(columns['r'], adversarial_mean(20, 0.15, 7, 1.0, 3).r)

    def test_adversarial_with_invalid_order(self):
        status = self.run_main('theory', 'adversarial', '--alpha', '0.15', '--q', '5', '--n', '20')

        self.assertEqual(status, 1)

    def test_lower_bound(self):
        status = self.run_main(
            'theory', 'lower-bound', '--alphas', '0.15', '--ns', '100,200,400', '--replications', '2',
            '--no-control', '--output', self.path('lb.json')
        )

        self.assertEqual(status, 0)
        body = self.read_json('lb.json')
        self.assertEqual(len(body['rows']), 3)
        self.assertEqual(body['slopes'][0]['q'], 7)


class TestKernelCommand(CommandTestCase):  # pragma: no cover

    def test_coefficients(self):
        status = self.run_main('kernel', '--order', '2', '--output', self.path('k.csv'))

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('k.csv'), ['k', 'coefficient'])
        assert_allclose(columns['coefficient'], [1.125, 0.0, -1.875], atol=1e-12)

    def test_weight_vector(self):
        status = self.run_main('kernel', '--order', '2', '--h', '0.1', '--x', '0.05', '--n', '50', '--output', self.path('w.csv'))

        self.assertEqual(status, 0)
        columns = self.container.csv_client.read_columns(self.path('w.csv'), ['i', 'weight'])
        self.assertEqual(columns['i'].size, 49)
        self.assertAlmostEqual(float(columns['weight'].sum()), 1.0, places=12)

    def test_run_config(self):
        args = build_parser().parse_args(['kernel', '--format', 'json'])

        self.assertEqual(
            run_config(args).as_dict(),
            {'subcommand': 'kernel', 'input_path': None, 'output_path': None, 'seed': 0, 'format': 'json'}
        )


@unittest.skipUnless(SLOW_TESTS, 'set HETEROVAR_SLOW_TESTS=1 to run Monte-Carlo studies')
class TestAcceptance(unittest.TestCase):  # pragma: no cover

    def setUp(self):
        self.container = Container(testing_mode=True)
        runner = TaskRunner(max_workers=worker_count(0))
        self.container.run_table1._runner = runner
        self.container.rate_study._runner = runner
        self.container.lower_bound_experiment._runner = runner

    def test_table1_reproduction(self):
        medians = {}
        for config in table1_configs(master_seed=0):
            summary = self.container.run_table1(config)
            medians[config.functions.mean_id] = summary.median_cdmse

        difference = [medians[mean_id][Method.DIFFERENCE] for mean_id in medians]
        self.assertTrue(all(0.0015 <= value <= 0.008 for value in difference))
        self.assertLessEqual(max(difference) / min(difference), 1.6)
        self.assertTrue(0.0015 <= medians[MeanId.F1][Method.RESIDUAL] <= 0.006)
        self.assertLess(medians[MeanId.F1][Method.RESIDUAL], medians[MeanId.F1][Method.DIFFERENCE])
        for mean_id in (MeanId.F2, MeanId.F3, MeanId.F4):
            self.assertGreaterEqual(medians[mean_id][Method.RESIDUAL], 5.0 * medians[mean_id][Method.DIFFERENCE])

    def test_smooth_rate(self):
        result = self.container.rate_study([250, 500, 1000, 2000, 4000], experiment_config(n=250, replications=50))

        self.assertLess(abs(result.slope + 0.8), 0.15)

    def test_rough_rate_and_control(self):
        result = self.container.lower_bound_experiment([0.15], [500, 1000, 2000, 4000, 8000], replications=50, q=7)

        adversarial, control = result.slopes
        self.assertLess(abs(adversarial.slope + 0.6), 0.15)
        self.assertLess(abs(control.slope + 0.8), 0.15)


if __name__ == '__main__':
    unittest.main()

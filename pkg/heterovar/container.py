"""Module with DI configuration."""

import io
import os
import sys

from .boundlab import LowerBoundExperiment
from .client import CsvClient, JsonClient
from .commands import (
    AdversarialHandler,
    CvHandler,
    EstimateHandler,
    HcCheckHandler,
    HellingerHandler,
    KernelHandler,
    LowerBoundHandler,
    MomentsHandler,
    RatesHandler,
    SimulateHandler,
    TableWriter
)
from .diffvar import EstimateVariance
from .exception import InvalidConfiguration
from .kernelkit import weight_matrix
from .modelsel import KFoldCvDiff, KFoldCvFanYao
from .residvar import FanYaoVariance, FitMean, local_linear_smooth
from .schema import ExperimentConfigSchema, ParameterValidator
from .simlab import Generate, RateStudy, RunTable1, TaskRunner


THREADS = os.environ.get('HETEROVAR_THREADS', 0)
LOG_LEVEL = os.environ.get('HETEROVAR_LOG_LEVEL', 'WARNING')


def worker_count(threads):
    """Resolves the HETEROVAR_THREADS value; 0 means one worker per CPU."""
    try:
        threads = int(threads)
    except (TypeError, ValueError):
        raise InvalidConfiguration(
            message='HETEROVAR_THREADS must be an integer.',
            payload={'HETEROVAR_THREADS': threads}
        )
    if threads < 0:
        raise InvalidConfiguration(
            message='HETEROVAR_THREADS must be nonnegative.',
            payload={'HETEROVAR_THREADS': threads}
        )
    return threads or os.cpu_count() or 1


class Container:

    def __init__(self, *, testing_mode=False):
        """Container initializer.

        Args:
            testing_mode (bool): Whether container should be set up in testing mode or not.

        """
        if testing_mode:
            stdout = io.StringIO()
            max_workers = 1
        else:
            stdout = sys.stdout
            max_workers = worker_count(THREADS)

        self.log_level = LOG_LEVEL

        # clients

        self.csv_client = CsvClient(opener=open, stdout=stdout)

        self.json_client = JsonClient(opener=open, stdout=stdout)

        # services

        self.validator = ParameterValidator()

        self.experiment_config_schema = ExperimentConfigSchema()

        self.runner = TaskRunner(max_workers=max_workers)

        self.table_writer = TableWriter(
            csv_client=self.csv_client,
            json_client=self.json_client
        )

        # use cases

        self.estimate_variance = EstimateVariance(weight_matrix=weight_matrix)

        self.fit_mean = FitMean()

        self.fan_yao_variance = FanYaoVariance(fit_mean=self.fit_mean)

        self.cv_diff = KFoldCvDiff(weight_matrix=weight_matrix)

        self.cv_fanyao = KFoldCvFanYao(smoother=local_linear_smooth)

        self.generate = Generate()

        self.run_table1 = RunTable1(
            generate=self.generate,
            cv_diff=self.cv_diff,
            cv_fanyao=self.cv_fanyao,
            estimate_variance=self.estimate_variance,
            fan_yao_variance=self.fan_yao_variance,
            runner=self.runner
        )

        self.rate_study = RateStudy(
            generate=self.generate,
            estimate_variance=self.estimate_variance,
            runner=self.runner
        )

        self.lower_bound_experiment = LowerBoundExperiment(
            estimate_variance=self.estimate_variance,
            runner=self.runner
        )

        # command handlers

        self.estimate_handler = EstimateHandler(
            csv_client=self.csv_client,
            estimate_variance=self.estimate_variance,
            fan_yao_variance=self.fan_yao_variance,
            cv_fanyao=self.cv_fanyao,
            validator=self.validator
        )

        self.cv_handler = CvHandler(
            csv_client=self.csv_client,
            json_client=self.json_client,
            cv_diff=self.cv_diff,
            cv_fanyao=self.cv_fanyao,
            validator=self.validator
        )

        self.simulate_handler = SimulateHandler(
            csv_client=self.csv_client,
            json_client=self.json_client,
            schema=self.experiment_config_schema,
            run_table1=self.run_table1
        )

        self.rates_handler = RatesHandler(
            csv_client=self.csv_client,
            json_client=self.json_client,
            schema=self.experiment_config_schema,
            rate_study=self.rate_study
        )

        self.moments_handler = MomentsHandler(table_writer=self.table_writer)

        self.hellinger_handler = HellingerHandler(table_writer=self.table_writer)

        self.hc_check_handler = HcCheckHandler(table_writer=self.table_writer)

        self.adversarial_handler = AdversarialHandler(table_writer=self.table_writer)

        self.lower_bound_handler = LowerBoundHandler(
            json_client=self.json_client,
            lower_bound_experiment=self.lower_bound_experiment
        )

        self.kernel_handler = KernelHandler(
            table_writer=self.table_writer,
            validator=self.validator
        )

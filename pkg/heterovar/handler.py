"""Module with the command-line entry point."""

import argparse
import logging
import sys

from .commands import VALIDATION_FAILURE, report_failure
from .container import Container
from .domain import Design, MeanId, Noise
from .dto import RunConfig
from .exception import HeterovarBaseException
from .modelsel import DEFAULT_FOLDS


logger = logging.getLogger(__name__)

HANDLERS = {
    'estimate': 'estimate_handler',
    'cv': 'cv_handler',
    'simulate': 'simulate_handler',
    'rates': 'rates_handler',
    'moments': 'moments_handler',
    'hellinger': 'hellinger_handler',
    'hc-check': 'hc_check_handler',
    'adversarial': 'adversarial_handler',
    'lower-bound': 'lower_bound_handler',
    'kernel': 'kernel_handler',
}


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with the validation status on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(VALIDATION_FAILURE, '%s: error: %s\n' % (self.prog, message))


def float_list(text):
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated numbers, got %r' % text)


def int_list(text):
    try:
        return [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated integers, got %r' % text)


def _study_means():
    return [mean.value for mean in MeanId if mean != MeanId.CUSTOM]


def build_parser():
    parser = ArgumentParser(prog='heterovar', description='Variance function estimation toolkit.')
    parser.add_argument('--verbose', action='store_true', help='log progress at INFO level')
    commands = parser.add_subparsers(dest='subcommand', required=True)

    estimate = commands.add_parser('estimate', help='estimate the variance function of a CSV sample')
    estimate.add_argument('--input', required=True, help='CSV file with header x,y')
    estimate.add_argument('--output', help='output CSV (x,vhat); stdout by default')
    estimate.add_argument('--method', choices=['diff', 'fanyao'], default='diff')
    estimate.add_argument('--h', type=float, help='bandwidth; n^(-1/5) by default')
    estimate.add_argument('--order', type=int, default=2)
    estimate.add_argument('--grid', help='number of equispaced points or a CSV file with header x')
    estimate.add_argument('--truncate', action='store_true', help='clip negative estimates at 0')
    estimate.add_argument('--h-mean', type=float, help='mean bandwidth for fanyao')
    estimate.add_argument('--h-var', type=float, help='variance bandwidth for fanyao')
    estimate.add_argument('--seed', type=int, default=0, help='fold seed when fanyao bandwidths are cross-validated')

    cv = commands.add_parser('cv', help='select a bandwidth by K-fold cross-validation')
    cv.add_argument('--input', required=True, help='CSV file with header x,y')
    cv.add_argument('--output', help='output JSON; stdout by default')
    cv.add_argument('--method', choices=['diff', 'fanyao'], default='diff')
    cv.add_argument('--k', type=int, default=DEFAULT_FOLDS)
    cv.add_argument('--h-grid', help='candidate grid lo:hi:count (log-spaced)')
    cv.add_argument('--seed', type=int, default=0)

    simulate = commands.add_parser('simulate', help='run the difference-based vs residual-based study')
    source = simulate.add_mutually_exclusive_group()
    source.add_argument('--config', help='experiment JSON file')
    source.add_argument('--preset', choices=['table1'])
    simulate.add_argument('--fast', action='store_true', help='30 replications instead of 100')
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--output', help='summary JSON; stdout by default')
    simulate.add_argument('--replications-csv', help='per-replication CSV (rep,method,h,cdmse)')
    simulate.add_argument('--n', type=int, default=1000)
    simulate.add_argument('--replications', type=int)
    simulate.add_argument('--mean', choices=_study_means(), default=MeanId.F1.value)
    simulate.add_argument('--noise', choices=[noise.value for noise in Noise], default=Noise.GAUSSIAN.value)
    simulate.add_argument('--design', choices=[design.value for design in Design], default=Design.FIXED.value)
    simulate.add_argument('--k', type=int, default=DEFAULT_FOLDS)
    simulate.add_argument('--order', type=int, default=2)

    rates = commands.add_parser('rates', help='measure the convergence rate over sample sizes')
    rates.add_argument('--config', help='experiment JSON file; its n is replaced by --n-list')
    rates.add_argument('--n-list', type=int_list, default=[250, 500, 1000, 2000, 4000])
    rates.add_argument('--replications', type=int, default=50)
    rates.add_argument('--seed', type=int)
    rates.add_argument('--mean', choices=_study_means(), default=MeanId.F1.value)
    rates.add_argument('--noise', choices=[noise.value for noise in Noise], default=Noise.GAUSSIAN.value)
    rates.add_argument('--design', choices=[design.value for design in Design], default=Design.FIXED.value)
    rates.add_argument('--order', type=int, default=2)
    rates.add_argument('--h-rule', type=float, default=-0.2, help='bandwidth exponent, h = n^rule')
    rates.add_argument('--output', help='rate CSV (log_n,log_median_cdmse); stdout by default')
    rates.add_argument('--summary', help='JSON file for slope and expected slope')

    theory = commands.add_parser('theory', help='lower-bound laboratory')
    laboratory = theory.add_subparsers(dest='theory_command', required=True)

    moments = laboratory.add_parser('moments', help='moment-matching distribution G(q)')
    moments.add_argument('--q', type=int, required=True)

    hellinger = laboratory.add_parser('hellinger', help='affinity of the testing problem over n')
    hellinger.add_argument('--alpha', type=float, required=True)
    hellinger.add_argument('--q', type=int)
    hellinger.add_argument('--n-list', type=int_list, required=True)
    hellinger.add_argument('--m-f', type=float, default=1.0)

    hc_check = laboratory.add_parser('hc-check', help='odd integral that vanishes for every d')
    hc_check.add_argument('--d-list', type=float_list, required=True)

    adversarial = laboratory.add_parser('adversarial', help='draw one adversarial mean')
    adversarial.add_argument('--alpha', type=float, required=True)
    adversarial.add_argument('--q', type=int)
    adversarial.add_argument('--n', type=int, required=True)
    adversarial.add_argument('--seed', type=int, default=0)
    adversarial.add_argument('--m-f', type=float, default=1.0)

    lower_bound = laboratory.add_parser('lower-bound', help='risk slope under adversarial means')
    lower_bound.add_argument('--alphas', type=float_list, required=True)
    lower_bound.add_argument('--ns', type=int_list, required=True)
    lower_bound.add_argument('--q', type=int)
    lower_bound.add_argument('--replications', type=int, default=50)
    lower_bound.add_argument('--seed', type=int, default=0)
    lower_bound.add_argument('--m-f', type=float, default=20.0)
    lower_bound.add_argument('--no-control', action='store_true', help='skip the zero-mean control row')

    kernel = commands.add_parser('kernel', help='dump kernel coefficients or bin weights')
    kernel.add_argument('--order', type=int, default=2)
    kernel.add_argument('--t', type=float, help='boundary kernel support end')
    kernel.add_argument('--h', type=float)
    kernel.add_argument('--x', type=float)
    kernel.add_argument('--n', type=int, default=100)

    for command in (moments, hellinger, hc_check, adversarial, kernel):
        command.add_argument('--format', choices=['csv', 'json'], default='csv')
    for command in (moments, hellinger, hc_check, adversarial, lower_bound, kernel):
        command.add_argument('--output', help='output file; stdout by default')
    return parser


def run_config(args):
    """Collects the reproducibility-relevant part of parsed arguments."""
    return RunConfig(
        subcommand=args.subcommand,
        input_path=getattr(args, 'input', None) or getattr(args, 'config', None),
        output_path=getattr(args, 'output', None),
        seed=getattr(args, 'seed', None) or 0,
        format=getattr(args, 'format', 'csv')
    )


def main(argv=None, container=None):
    """Parses arguments, dispatches to the command handler and returns the exit status."""
    args = build_parser().parse_args(argv)
    if container is None:
        try:
            container = Container()
        except HeterovarBaseException as e:
            return report_failure(str(e), e.payload, VALIDATION_FAILURE).exit_code
    level = logging.INFO if args.verbose else container.log_level
    logging.basicConfig(level=level, stream=sys.stderr, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    command = args.theory_command if args.subcommand == 'theory' else args.subcommand
    logger.info('running %s with %s', command, run_config(args).as_dict())
    response = getattr(container, HANDLERS[command]).handle(args)
    return response.exit_code

from django.core.management.base import BaseCommand, CommandError

from ...bench import report, run_distributed_bench
from ...exceptions import StencilError
from ..options import FAILED, add_pipeline_arguments, decomposition_from_options, pipeline_from_options, usage_error


class Command(BaseCommand):
    help = 'Run the multi-rank engine over the loopback transport and report the result.'

    def add_arguments(self, parser):
        add_pipeline_arguments(parser)
        parser.add_argument('--layout', default='2x1x1', help='process grid PXxPYxPZ')
        parser.add_argument('--ranks', type=int, default=None, help='defaults to the layout size')
        parser.add_argument('--outer-steps', type=int, default=2)
        parser.add_argument('--batch', type=int, default=1, help='node sweeps per exchange, h = batch * U')
        parser.add_argument('--scaling', choices=('strong', 'weak'), default='strong')
        parser.add_argument('--reps', type=int, default=1)
        verify = parser.add_mutually_exclusive_group()
        verify.add_argument('--verify', dest='verify', action='store_true', default=None)
        verify.add_argument('--no-verify', dest='verify', action='store_false')
        parser.add_argument('--save', action='store_true')
        parser.add_argument('--dump', default=None)
        parser.add_argument('--format', choices=('csv', 'json'), default='csv')

    def handle(self, *args, **options):
        dims, cfg, pattern = pipeline_from_options(options)
        decomposition = decomposition_from_options(options)
        if options['reps'] < 1:
            raise usage_error('--reps must be >= 1')
        try:
            result = run_distributed_bench(
                dims, decomposition['layout'], cfg,
                outer_steps=decomposition['outer_steps'],
                pattern=pattern,
                batch=decomposition['batch'],
                scaling=decomposition['scaling'],
                reps=options['reps'],
                verify=options['verify'],
                dump=options['dump'],
            )
        except StencilError as exc:
            raise usage_error(str(exc))
        if options['save']:
            result.save()
        self.stdout.write(report([result], options['format']), ending='')
        if result.verified is False:
            raise CommandError('distributed field disagrees with the oracle', returncode=FAILED)

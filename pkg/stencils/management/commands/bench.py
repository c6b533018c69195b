import logging

from django.core.management.base import BaseCommand, CommandError

from ...bench import VARIANTS, report, run_variant
from ...exceptions import StencilError
from ..options import FAILED, add_pipeline_arguments, pipeline_from_options, usage_error

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Time the sweep variants and report MLUP/s as CSV or JSON.'

    def add_arguments(self, parser):
        add_pipeline_arguments(parser, several_du=True)
        parser.add_argument('--variant', nargs='+', choices=VARIANTS, default=list(VARIANTS))
        parser.add_argument('--reps', type=int, default=None, help='timed runs; the median is reported')
        verify = parser.add_mutually_exclusive_group()
        verify.add_argument('--verify', dest='verify', action='store_true', default=None)
        verify.add_argument('--no-verify', dest='verify', action='store_false')
        parser.add_argument('--save', action='store_true', help='store the rows as BenchResult records')
        parser.add_argument('--dump', default=None, help='write the final grid of the last run to PATH')
        parser.add_argument('--format', choices=('csv', 'json'), default='csv')

    def handle(self, *args, **options):
        if options['reps'] is not None and options['reps'] < 1:
            raise usage_error('--reps must be >= 1')
        results = []
        for variant in options['variant']:
            # d_u only matters to the pipeline
            for d_u in options['du'] if variant == 'pipeline' else options['du'][:1]:
                dims, cfg, pattern = pipeline_from_options(options, d_u=d_u)
                try:
                    result = run_variant(
                        variant, dims, cfg,
                        sweeps=options['sweeps'],
                        pattern=pattern,
                        reps=options['reps'],
                        verify=options['verify'],
                        dump=options['dump'],
                    )
                except StencilError as exc:
                    raise usage_error(f'{variant}: {exc}')
                if options['save']:
                    result.save()
                results.append(result)

        self.stdout.write(report(results, options['format']), ending='')
        failed = [r for r in results if r.verified is False]
        if failed:
            raise CommandError(
                f'{len(failed)} of {len(results)} runs disagree with the oracle', returncode=FAILED
            )

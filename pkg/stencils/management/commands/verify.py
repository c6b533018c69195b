from django.core.management.base import BaseCommand, CommandError

from ...exceptions import StencilError
from ...grid import load_field
from ...verify import check_pipeline, compare, equivalence_matrix, oracle
from ..options import FAILED, add_pipeline_arguments, pipeline_from_options, usage_error


class Command(BaseCommand):
    help = 'Check pipelined sweeps (or a grid dump) against the naive oracle.'

    def add_arguments(self, parser):
        add_pipeline_arguments(parser)
        parser.add_argument('--matrix', action='store_true',
                            help='run every valid configuration over storage, sync, n, t, T, du and dt')
        parser.add_argument('--against', default=None, metavar='PATH',
                            help='compare a grid dump with the oracle after --levels levels')
        parser.add_argument('--levels', type=int, default=None)
        parser.add_argument('--tolerance', type=float, default=None)

    def handle(self, *args, **options):
        dims, cfg, pattern = pipeline_from_options(options)
        tol = options['tolerance']
        try:
            if options['against']:
                outcome = [self._check_dump(options, pattern, tol)]
            elif options['matrix']:
                outcome = [
                    (config.describe(), check_pipeline(dims, config, pattern, options['sweeps'], tol))
                    for config in equivalence_matrix(dims)
                ]
            else:
                outcome = [(cfg.describe(), check_pipeline(dims, cfg, pattern, options['sweeps'], tol))]
        except StencilError as exc:
            raise usage_error(str(exc))

        failures = 0
        for label, comparison in outcome:
            self.stdout.write(f'{label}: {comparison}')
            failures += not comparison.passed
        if failures:
            raise CommandError(f'{failures} of {len(outcome)} checks failed', returncode=FAILED)
        self.stdout.write(self.style.SUCCESS(f'{len(outcome)} checks passed'))

    def _check_dump(self, options, pattern, tol):
        if options['levels'] is None:
            raise usage_error('--against needs --levels')
        dims, field = load_field(options['against'])
        return options['against'], compare(field, oracle(dims, pattern, options['levels']), tol)

from django.core.management.base import BaseCommand

from ... import perfmodel
from ..options import usage_error


class Command(BaseCommand):
    help = 'Evaluate the analytic performance models and print CSV tables.'

    def add_arguments(self, parser):
        parser.add_argument('--speedup', action='store_true', help='pipelined speedup over t and T')
        parser.add_argument('--halo', action='store_true', help='multi-layer halo model over L and h')
        parser.add_argument('--info', action='store_true',
                            help='code balance, speedup limit, cache blocks and memory traffic over t, T and d_u')
        parser.add_argument('--baseline', type=float, default=None, metavar='M_S',
                            help='memory-bound update rate for a bandwidth in bytes/s')
        parser.add_argument('--t', type=int, nargs='+', default=list(perfmodel.TEAM_SIZES))
        parser.add_argument('--T', type=int, nargs='+', default=list(perfmodel.UPDATES))
        parser.add_argument('--du', type=int, nargs='+', default=list(perfmodel.UPPER_BOUNDS))
        parser.add_argument('--L', type=int, nargs='+', default=list(perfmodel.HALO_SIZES))
        parser.add_argument('--h', type=int, nargs='+', default=list(perfmodel.HALO_WIDTHS))
        parser.add_argument('--sides', type=int, choices=(1, 2), default=perfmodel.DEFAULT_SIDES)

    def handle(self, *args, **options):
        if not (options['speedup'] or options['halo'] or options['info'] or options['baseline']):
            options['speedup'] = options['halo'] = options['info'] = True
        if min(options['t'] + options['T'] + options['du'] + options['L'] + options['h']) < 1:
            raise usage_error('model parameters must be >= 1')

        if options['baseline'] is not None:
            if options['baseline'] <= 0:
                raise usage_error('--baseline needs a positive bandwidth')
            self.stdout.write(f'M_s,P_0\n{options["baseline"]!r},{perfmodel.baseline_perf(options["baseline"])!r}\n')
        if options['speedup']:
            self.stdout.write(perfmodel.speedup_csv(options['t'], options['T']), ending='')
        if options['halo']:
            self.stdout.write(
                perfmodel.halo_csv(options['L'], options['h'], sides=options['sides']), ending=''
            )
        if options['info']:
            self.stdout.write(perfmodel.balance_csv(), ending='')
            self.stdout.write(perfmodel.team_csv(options['t'], options['T'], options['du']), ending='')

"""
Command-line options shared by the stencil management commands.
"""

from django.core.management.base import CommandError

from ..conf import get_setting
from ..forms import DecompositionForm, PipelineConfigForm
from ..grid import GridDims, STORAGE_MODES, TWO_GRID
from ..pipeline import RELAXED, SYNC_MODES

USAGE = 2
FAILED = 1


def add_pipeline_arguments(parser, several_du=False):
    parser.add_argument('--size', type=int, default=32, help='cube edge of the interior')
    parser.add_argument('--teams', type=int, default=get_setting('DEFAULT_TEAMS'), help='teams n')
    parser.add_argument('--team-size', type=int, default=get_setting('DEFAULT_TEAM_SIZE'), help='threads per team t')
    parser.add_argument('-T', dest='updates', type=int, default=get_setting('DEFAULT_UPDATES'), help='updates per thread T')
    parser.add_argument('--dl', type=int, default=get_setting('DEFAULT_DL'))
    if several_du:
        parser.add_argument('--du', type=int, nargs='+', default=[get_setting('DEFAULT_DU')])
    else:
        parser.add_argument('--du', type=int, default=get_setting('DEFAULT_DU'))
    parser.add_argument('--dt', type=int, default=get_setting('DEFAULT_DT'))
    parser.add_argument('--block', default='', help='block size BXxBYxBZ')
    parser.add_argument('--sync', choices=SYNC_MODES, default=RELAXED)
    parser.add_argument('--storage', choices=STORAGE_MODES, default=TWO_GRID)
    parser.add_argument('--pattern', default='random:1', help='constant:V, linear, hotplate or random:SEED')
    parser.add_argument('--sweeps', type=int, default=1)


def usage_error(errors):
    return CommandError(errors, returncode=USAGE)


def pipeline_from_options(options, d_u=None):
    """Validate the pipeline options; returns ``(dims, cfg, pattern)``."""
    form = PipelineConfigForm({
        'size': options['size'],
        'teams': options['teams'],
        'team_size': options['team_size'],
        'updates': options['updates'],
        'dl': options['dl'],
        'du': options['du'] if d_u is None else d_u,
        'dt': options['dt'],
        'block': options['block'],
        'sync': options['sync'],
        'storage': options['storage'],
        'pattern': options['pattern'],
    })
    if not form.is_valid():
        raise usage_error(form.errors.as_text())
    if options['sweeps'] < 1:
        raise usage_error('--sweeps must be >= 1')
    data = form.cleaned_data
    return GridDims.cube(data['size']), data['config'], data['pattern']


def decomposition_from_options(options):
    layout = options['layout']
    form = DecompositionForm({
        'ranks': options['ranks'] or _ranks_of(layout),
        'layout': layout,
        'outer_steps': options['outer_steps'],
        'batch': options['batch'],
        'scaling': options['scaling'],
    })
    if not form.is_valid():
        raise usage_error(form.errors.as_text())
    return form.cleaned_data


def _ranks_of(layout):
    try:
        ranks = 1
        for extent in layout.lower().split('x'):
            ranks *= int(extent)
        return ranks
    except ValueError:
        # the form reports the malformed layout
        return 1

"""
Timing harness for the sweep variants and the distributed engine.

Each run allocates its grids before the clock starts, does one warmup run,
then reports the median wall time of ``reps`` timed runs as an unsaved
``BenchResult``.
"""

import csv
import io
import json
import logging
import statistics
import time

from django.core.serializers.json import DjangoJSONEncoder

from .conf import get_setting
from .decomp import Layout, run_distributed
from .exceptions import ConfigurationError
from .grid import COMPRESSED, TWO_GRID, FillPattern, GridDims, allocate, dump_grid
from .kernel import sweep_naive, sweep_spatial_blocked
from .models import BenchResult
from .pipeline import run_node_sweeps
from .verify import compare, oracle

logger = logging.getLogger(__name__)

VARIANTS = ('naive', 'blocked', 'pipeline')
COLUMNS = (
    'variant', 'nx', 'ny', 'nz', 'n', 't', 'T', 'dl', 'du', 'dt',
    'sync', 'storage', 'sweeps', 'seconds', 'mlups', 'verified',
)
DEFAULT_PATTERN = 'random:1'


def levels_per_sweep(variant, cfg):
    return cfg.U if variant == 'pipeline' else 1


def _sweeper(variant, cfg, options):
    if variant == 'naive':
        return lambda grid, sweeps: [sweep_naive(grid) for _ in range(sweeps)]
    if variant == 'blocked':
        return lambda grid, sweeps: [
            sweep_spatial_blocked(grid, cfg.block_size(grid.dims)) for _ in range(sweeps)
        ]
    if variant == 'pipeline':
        return lambda grid, sweeps: run_node_sweeps(grid, cfg, sweeps, **options)
    raise ConfigurationError(f'unknown variant {variant!r}, expected one of {", ".join(VARIANTS)}')


def _storage(variant, cfg):
    if variant != 'pipeline':
        if cfg.storage == COMPRESSED:
            raise ConfigurationError(f'the {variant} sweep runs on two-grid storage only')
        return TWO_GRID, 0
    return cfg.storage, cfg.U if cfg.storage == COMPRESSED else 0


def _timed(run, prepare, reps):
    times, grid = [], None
    for _ in range(reps):
        grid = prepare()
        start = time.perf_counter()
        run(grid)
        times.append(time.perf_counter() - start)
    return statistics.median(times), grid


def _verdict(passed):
    if passed is None:
        return 'skipped'
    return 'yes' if passed else 'no'


def run_variant(variant, dims, cfg, sweeps=1, pattern=None, reps=None, verify=None,
                tolerance=None, dump=None, **options):
    pattern = pattern or FillPattern.parse(DEFAULT_PATTERN)
    reps = reps or get_setting('REPS')
    if sweeps < 1 or reps < 1:
        raise ConfigurationError(f'sweeps and reps must be >= 1, got {sweeps} and {reps}')
    if verify is None:
        verify = dims.cells <= get_setting('VERIFY_MAX_CELLS')
    mode, slack = _storage(variant, cfg)
    sweeper = _sweeper(variant, cfg, options)

    def prepare():
        return allocate(dims, mode, pattern, slack)

    sweeper(prepare(), 1)
    seconds, grid = _timed(lambda g: sweeper(g, sweeps), prepare, reps)
    levels = sweeps * levels_per_sweep(variant, cfg)

    passed = None
    if verify:
        reference = oracle(dims, pattern, levels)
        g = dims.ghost
        comparison = compare(grid.interior(), reference[g:-g, g:-g, g:-g], tolerance)
        passed = comparison.passed
        logger.info('%s after %d levels: %s', variant, levels, comparison)
    if dump:
        dump_grid(grid.snapshot(), dims, dump)

    pipelined = variant == 'pipeline'
    result = BenchResult(
        variant=variant,
        nx=dims.nx, ny=dims.ny, nz=dims.nz,
        teams=cfg.n if pipelined else 1,
        team_size=cfg.t if pipelined else 1,
        updates_per_thread=cfg.T if pipelined else 1,
        d_l=cfg.d_l if pipelined else 1,
        d_u=cfg.d_u if pipelined else 1,
        d_t=cfg.d_t if pipelined else 0,
        sync=cfg.sync if pipelined else '',
        storage=mode,
        sweeps=sweeps,
        seconds=seconds,
        total_updates=dims.cells * levels,
        verified=passed,
    )
    logger.info('%s', result)
    return result


def scaled_dims(dims, layout, scaling):
    """Global extents for strong (fixed) or weak (per-rank fixed) scaling."""
    if scaling == 'strong':
        return dims
    if scaling == 'weak':
        return GridDims(*(n * p for n, p in zip(dims.interior, layout.extents)))
    raise ConfigurationError(f'unknown scaling mode {scaling!r}')


def run_distributed_bench(dims, layout, cfg, outer_steps=1, pattern=None, batch=1,
                          scaling='strong', reps=None, verify=None, tolerance=None, dump=None):
    if isinstance(layout, str):
        layout = Layout.parse(layout)
    pattern = pattern or FillPattern.parse(DEFAULT_PATTERN)
    reps = reps or get_setting('REPS')
    dims = scaled_dims(dims, layout, scaling)
    if verify is None:
        verify = dims.cells <= get_setting('VERIFY_MAX_CELLS')

    times, run = [], None
    for _ in range(reps):
        start = time.perf_counter()
        run = run_distributed(dims, layout.ranks, layout, cfg, outer_steps, pattern, batch)
        times.append(time.perf_counter() - start)
    levels = outer_steps * cfg.U * batch

    passed = None
    if verify:
        comparison = compare(run.field, oracle(dims, pattern, levels), tolerance)
        passed = comparison.passed
        logger.info('distributed %s after %d levels: %s', layout, levels, comparison)
    if dump:
        dump_grid(run.field, dims, dump)

    return BenchResult(
        variant='dist',
        nx=dims.nx, ny=dims.ny, nz=dims.nz,
        teams=cfg.n, team_size=cfg.t, updates_per_thread=cfg.T,
        d_l=cfg.d_l, d_u=cfg.d_u, d_t=cfg.d_t,
        sync=cfg.sync, storage=cfg.storage,
        sweeps=outer_steps,
        seconds=statistics.median(times),
        total_updates=dims.cells * levels,
        verified=passed,
    )


def result_row(result):
    return {
        'variant': result.variant,
        'nx': result.nx,
        'ny': result.ny,
        'nz': result.nz,
        'n': result.teams,
        't': result.team_size,
        'T': result.updates_per_thread,
        'dl': result.d_l,
        'du': result.d_u,
        'dt': result.d_t,
        'sync': result.sync,
        'storage': result.storage,
        'sweeps': result.sweeps,
        'seconds': result.seconds,
        'mlups': result.mlups,
        'verified': _verdict(result.verified),
    }


def report(results, fmt='csv'):
    rows = [result_row(r) for r in results]
    if fmt == 'json':
        return json.dumps(rows, cls=DjangoJSONEncoder, indent=2)
    if fmt != 'csv':
        raise ConfigurationError(f'unknown report format {fmt!r}')
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=COLUMNS, lineterminator='\n')
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()

"""
Reference results and field comparison.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .conf import get_setting
from .exceptions import ConfigurationError
from .grid import COMPRESSED, STORAGE_MODES, TWO_GRID, allocate
from .kernel import sweep_naive
from .pipeline import SYNC_MODES, PipelineConfig, run_node_sweeps

logger = logging.getLogger(__name__)

TINY = 1e-300


def oracle(dims, pattern, levels):
    """Full field after ``levels`` naive sweeps from ``pattern``."""
    grid = allocate(dims, TWO_GRID, pattern)
    for _ in range(levels):
        sweep_naive(grid)
    return grid.snapshot()


@dataclass(frozen=True)
class Comparison:
    max_abs: float
    max_rel: float
    location: tuple
    bitwise: bool
    tolerance: float

    @property
    def passed(self):
        return self.max_rel <= self.tolerance

    def __str__(self):
        verdict = 'bitwise' if self.bitwise else ('pass' if self.passed else 'FAIL')
        return f'{verdict}: max abs {self.max_abs:.3e}, max rel {self.max_rel:.3e} at {self.location}'


def compare(a, b, tol=None):
    """
    Relative L-infinity comparison. ``location`` is the array index
    ``(z, y, x)`` of the largest relative difference.
    """
    tol = get_setting('TOLERANCE') if tol is None else tol
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ConfigurationError(f'cannot compare extents {a.shape} and {b.shape}')
    if np.array_equal(a, b):
        return Comparison(0.0, 0.0, None, True, tol)
    diff = np.abs(a - b)
    rel = diff / np.maximum(np.maximum(np.abs(a), np.abs(b)), TINY)
    where = np.unravel_index(int(np.argmax(rel)), rel.shape)
    result = Comparison(float(diff.max()), float(rel[where]), tuple(int(i) for i in where), False, tol)
    if not result.passed:
        logger.info('comparison failed: %s', result)
    return result


def field_range(field):
    field = np.asarray(field)
    return float(field.min()), float(field.max())


def check_maximum_principle(dims, pattern, levels, rtol=1e-15):
    """
    Follow an oracle trajectory and return the first level at which the max
    over interior and boundary grows, or the min drops, by more than ``rtol``;
    None if the trajectory obeys the maximum principle.
    """
    grid = allocate(dims, TWO_GRID, pattern)
    low, high = field_range(grid.current())
    for level in range(1, levels + 1):
        sweep_naive(grid)
        new_low, new_high = field_range(grid.current())
        if new_high > high + rtol * abs(high) or new_low < low - rtol * abs(low):
            logger.info('maximum principle broken at level %d', level)
            return level
        low, high = min(low, new_low), max(high, new_high)
    return None


def check_pipeline(dims, cfg, pattern, sweeps, tol=None, **options):
    """Compare ``sweeps`` node sweeps of ``cfg`` with the naive oracle."""
    slack = cfg.U if cfg.storage == COMPRESSED else 0
    grid = allocate(dims, cfg.storage, pattern, slack)
    run_node_sweeps(grid, cfg, sweeps, **options)
    g = dims.ghost
    reference = oracle(dims, pattern, sweeps * cfg.U)
    return compare(grid.interior(), reference[g:-g, g:-g, g:-g], tol)


def equivalence_matrix(dims, teams=(1, 2), team_sizes=(1, 2, 4), updates=(1, 2),
                       upper=(1, 2, 4), team_delays=(0, 8), d_l=1):
    """Every valid pipeline configuration of the cross product, both storages and syncs."""
    smallest = min(dims.interior)
    for storage, sync, n, t, T, d_u, d_t in itertools.product(
        STORAGE_MODES, SYNC_MODES, teams, team_sizes, updates, upper, team_delays
    ):
        if d_u < d_l or n * t * T > smallest:
            continue
        yield PipelineConfig(n=n, t=t, T=T, d_l=d_l, d_u=d_u, d_t=d_t, sync=sync, storage=storage)

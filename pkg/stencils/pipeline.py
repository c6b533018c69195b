"""
Pipelined temporal blocking.

``n`` teams of ``t`` threads form one pipeline of ``n*t`` stages. Thread ``i``
applies levels ``i*T .. i*T+T-1`` (counted from the start of the node sweep)
to every block in turn, so a node sweep advances the grid by ``U = n*t*T``
levels. The region a block covers at level ``s`` is the base block moved by
``-s`` along every axis and clipped to the domain, which is what makes the
pipeline need no boundary copies.

Threads are gated either by a global barrier after every block or by the
progress counters ``c_i`` (relaxed mode):

    c[i-1] - c[i] >= d_l   and   c[i] - c[i+1] <= d_u

with ``d_t`` added to ``d_l`` on a team's front thread and to ``d_u`` on its
rear thread.
"""

import itertools
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .conf import get_setting
from .exceptions import ConfigurationError, DeadlockError, ScheduleError
from .grid import COMPRESSED, FORWARD, REVERSE, STORAGE_MODES, TWO_GRID
from .kernel import BlockSize, Region, update_block

logger = logging.getLogger(__name__)

BARRIER = 'barrier'
RELAXED = 'relaxed'
SYNC_MODES = (BARRIER, RELAXED)

# int64 slots per counter: 128 bytes between neighbouring counters
COUNTER_STRIDE = 16


@dataclass(frozen=True)
class PipelineConfig:
    n: int = 1
    t: int = 1
    T: int = 1
    d_l: int = 1
    d_u: int = 1
    d_t: int = 0
    sync: str = BARRIER
    bs: BlockSize = None
    storage: str = TWO_GRID

    def __post_init__(self):
        if min(self.n, self.t, self.T, self.d_l) < 1:
            raise ConfigurationError(f'n, t, T and d_l must be >= 1: {self}')
        if self.d_u < self.d_l:
            raise ConfigurationError(f'd_u ({self.d_u}) must not be below d_l ({self.d_l})')
        if self.d_t < 0:
            raise ConfigurationError(f'team delay must be >= 0, got {self.d_t}')
        if self.sync not in SYNC_MODES:
            raise ConfigurationError(f'unknown sync mode {self.sync!r}')
        if self.storage not in STORAGE_MODES:
            raise ConfigurationError(f'unknown storage mode {self.storage!r}')

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'n': get_setting('DEFAULT_TEAMS'),
            't': get_setting('DEFAULT_TEAM_SIZE'),
            'T': get_setting('DEFAULT_UPDATES'),
            'd_l': get_setting('DEFAULT_DL'),
            'd_u': get_setting('DEFAULT_DU'),
            'd_t': get_setting('DEFAULT_DT'),
            'sync': RELAXED,
        }
        values.update(overrides)
        return cls(**values)

    @property
    def threads(self):
        return self.n * self.t

    @property
    def U(self):
        return self.n * self.t * self.T

    def team_of(self, i):
        return i // self.t

    def is_team_front(self, i):
        return i % self.t == 0

    def is_team_rear(self, i):
        return i % self.t == self.t - 1

    def lower_bound(self, i):
        return self.d_l + (self.d_t if self.is_team_front(i) else 0)

    def upper_bound(self, i):
        return self.d_u + (self.d_t if self.is_team_rear(i) else 0)

    def block_size(self, dims):
        if self.bs is not None:
            return self.bs
        return BlockSize(*get_setting('DEFAULT_BLOCK')).clamp(dims)

    def with_block(self, bs):
        return replace(self, bs=bs)

    def describe(self):
        bs = self.bs or 'default'
        return (
            f'n={self.n} t={self.t} T={self.T} dl={self.d_l} du={self.d_u} dt={self.d_t} '
            f'{self.sync} {self.storage} block={bs}'
        )


class ThreadCounters:
    """
    One progress counter per thread, each in its own 128-byte slot.

    Only thread ``i`` calls ``increment(i)``; it does so after the writes of
    the finished block have been issued, so a reader that sees the new value
    also sees the block. Slots have a single writer and only grow, so a stale
    read can only keep a gate closed longer; no lock is taken. Element loads
    and stores on the int64 array are indivisible under the interpreter lock.
    """

    def __init__(self, threads):
        self.threads = threads
        self._slots = np.zeros(threads * COUNTER_STRIDE, dtype=np.int64)

    def __len__(self):
        return self.threads

    def __getitem__(self, i):
        if not 0 <= i < self.threads:
            raise IndexError(i)
        return int(self._slots[i * COUNTER_STRIDE])

    def increment(self, i):
        self._slots[i * COUNTER_STRIDE] += 1

    def reset(self):
        self._slots[:] = 0

    def snapshot(self):
        return [self[i] for i in range(self.threads)]


def gate_open(c_prev, c_self, c_next, i, cfg, total_blocks=None):
    """The progress condition with team-delay adjustments; ``None`` marks a missing neighbour."""
    if c_prev is not None and i > 0:
        finished = total_blocks is not None and c_prev >= total_blocks
        if not finished and c_prev - c_self < cfg.lower_bound(i):
            return False
    if c_next is not None and i < cfg.threads - 1:
        if c_self - c_next > cfg.upper_bound(i):
            return False
    return True


def dependencies_met(c_prev, c_self, c_next, i, cfg):
    """
    Audit rule for a block start, independent of the gate.

    Level ``s+1`` of block ``b`` reads level-``s`` cells of blocks ``<= b`` only,
    so the predecessor must have finished block ``c_self``. The successor may
    trail by the configured upper bound plus the block it was admitted to.
    """
    if c_prev is not None and c_prev <= c_self:
        return False
    if c_next is not None and c_self - c_next > cfg.upper_bound(i) + 1:
        return False
    return True


def may_proceed(counters, i, cfg, total_blocks=None):
    if not 0 <= i < cfg.threads:
        raise ConfigurationError(f'thread {i} outside 0..{cfg.threads - 1}')
    c_self = counters[i]
    c_prev = counters[i - 1] if i > 0 else None
    c_next = counters[i + 1] if i < cfg.threads - 1 else None
    return gate_open(c_prev, c_self, c_next, i, cfg, total_blocks)


@dataclass
class BlockSchedule:
    dims: object
    levels: int
    reverse: bool
    base: list
    regions: list
    domains: list

    @property
    def blocks(self):
        return len(self.base)

    @property
    def traversal(self):
        return REVERSE if self.reverse else FORWARD

    def region(self, step, block):
        return self.regions[step][block]


def _intervals(n, b, widening, levels):
    """Per-level 1D partitions of one axis; ``widening[s]`` = (low, high) growth."""
    lo0, hi0 = -widening[0][0], n + widening[0][1]
    cuts = list(range(lo0 + b, hi0, b))
    per_level = []
    for s in range(levels):
        lo, hi = -widening[s][0], n + widening[s][1]
        bounds = [lo] + [min(max(c - s, lo), hi) for c in cuts] + [hi]
        per_level.append(list(zip(bounds[:-1], bounds[1:])))
    return per_level


def build_schedule(dims, cfg, reverse=False, widening=None):
    """
    ``widening`` lists, per level of the sweep, the ``(low, high)`` number of
    layers the domain grows into the ghost shell along x, y and z.
    """
    levels = cfg.U
    bs = cfg.block_size(dims)
    bs.check(dims)
    if levels > min(dims.interior):
        raise ScheduleError(
            f'{levels} updates per node sweep exceed the interior {dims.interior}'
        )
    if widening is None:
        widening = [((0, 0, 0), (0, 0, 0))] * levels
    if len(widening) != levels:
        raise ScheduleError(f'widening covers {len(widening)} levels, sweep has {levels}')

    axes = []
    for d in range(3):
        grow = [(w[0][d], w[1][d]) for w in widening]
        if reverse:
            grow = [(high, low) for low, high in grow]
        per_level = _intervals(dims.interior[d], bs.extents[d], grow, levels)
        if reverse:
            n = dims.interior[d]
            per_level = [[(n - hi, n - lo) for lo, hi in level] for level in per_level]
        axes.append(per_level)

    order = list(itertools.product(*(range(len(axes[d][0])) for d in (2, 1, 0))))
    regions = []
    for s in range(levels):
        row = []
        for kz, ky, kx in order:
            ix, iy, iz = axes[0][s][kx], axes[1][s][ky], axes[2][s][kz]
            row.append(Region((ix[0], iy[0], iz[0]), (ix[1], iy[1], iz[1])))
        regions.append(row)
    domains = [
        Region(
            tuple(-w[0][d] for d in range(3)),
            tuple(n + w[1][d] for d, n in enumerate(dims.interior)),
        )
        for w in widening
    ]
    logger.debug(
        'schedule %s: %d blocks of %s, %d levels, %s',
        dims.interior, len(order), bs, levels, 'reverse' if reverse else 'forward',
    )
    return BlockSchedule(dims, levels, reverse, regions[0], regions, domains)


def validate_partition(schedule):
    """Raise ScheduleError unless every level's regions tile its domain exactly once."""
    for s, domain in enumerate(schedule.domains):
        shape = tuple(hi - lo for lo, hi in zip(domain.lo, domain.hi))[::-1]
        hits = np.zeros(shape, dtype=np.int32)
        for region in schedule.regions[s]:
            index = tuple(
                slice(region.lo[d] - domain.lo[d], region.hi[d] - domain.lo[d])
                for d in (2, 1, 0)
            )
            hits[index] += 1
        if hits.min() != 1 or hits.max() != 1 or hits.sum() != domain.cells:
            raise ScheduleError(f'level {s}: regions do not partition {domain}')
    return True


@dataclass(frozen=True)
class TraceEvent:
    sweep: int
    thread: int
    block: int
    c_prev: int
    c_self: int
    c_next: int
    ok: bool

    def csv(self):
        cells = (self.sweep, self.thread, self.block, self.c_prev, self.c_self, self.c_next)
        return ','.join('' if v is None else str(v) for v in cells)


@dataclass
class Trace:
    cfg: PipelineConfig
    events: list = field(default_factory=list)

    HEADER = 'sweep,thread,block,c_prev,c_self,c_next'

    @property
    def violations(self):
        return [e for e in self.events if not e.ok]

    def to_csv(self):
        return '\n'.join([self.HEADER] + [e.csv() for e in self.events]) + '\n'


class _Aborted(Exception):
    pass


class PipelineRunner:
    def __init__(self, cfg, spin_budget=None, spin_timeout=None, pin_threads=None, trace=None):
        self.cfg = cfg
        self.spin_budget = spin_budget or get_setting('SPIN_BUDGET')
        self.spin_timeout = spin_timeout or get_setting('SPIN_TIMEOUT')
        self.pin_threads = get_setting('PIN_THREADS') if pin_threads is None else pin_threads
        self.trace = trace
        self.counters = ThreadCounters(cfg.threads)

    def run(self, grid, sweeps, widening=None):
        cfg = self.cfg
        if grid.mode != cfg.storage:
            raise ConfigurationError(f'config wants {cfg.storage} storage, grid is {grid.mode}')
        if grid.mode == COMPRESSED and grid.slack < cfg.U:
            raise ConfigurationError(f'compressed slack {grid.slack} below U = {cfg.U}')
        if widening is not None and len(widening) != sweeps * cfg.U:
            raise ScheduleError(f'widening covers {len(widening)} levels, run has {sweeps * cfg.U}')
        cache = {}
        with ThreadPoolExecutor(max_workers=cfg.threads, thread_name_prefix='pipeline') as pool:
            for sweep in range(sweeps):
                reverse = grid.mode == COMPRESSED and not grid.forward
                if widening is None:
                    if reverse not in cache:
                        cache[reverse] = build_schedule(grid.dims, cfg, reverse)
                    schedule = cache[reverse]
                else:
                    levels = widening[sweep * cfg.U:(sweep + 1) * cfg.U]
                    schedule = build_schedule(grid.dims, cfg, reverse, levels)
                if grid.mode == COMPRESSED:
                    grid.check_levels(cfg.U)
                logger.debug('node sweep %d (%s) with %s', sweep, schedule.traversal, cfg.describe())
                self._sweep(pool, grid, schedule, sweep)
                grid.commit(cfg.U)
                grid.end_sweep()
        return grid

    def _sweep(self, pool, grid, schedule, sweep):
        cfg = self.cfg
        self.counters.reset()
        abort = threading.Event()
        barrier = threading.Barrier(cfg.threads) if cfg.sync == BARRIER else None
        worker = self._barrier_worker if barrier else self._relaxed_worker
        records = [[] for _ in range(cfg.threads)]
        futures = [
            pool.submit(self._guarded, worker, i, grid, schedule, sweep, abort, barrier, records[i])
            for i in range(cfg.threads)
        ]
        errors = [f.exception() for f in futures]
        if self.trace is not None:
            for thread_records in records:
                self.trace.events.extend(thread_records)
        failures = [e for e in errors if e is not None and not isinstance(e, (_Aborted, threading.BrokenBarrierError))]
        if failures:
            raise failures[0]

    def _guarded(self, worker, i, grid, schedule, sweep, abort, barrier, records):
        try:
            self._pin(i)
            worker(i, grid, schedule, sweep, abort, barrier, records)
        except BaseException:
            abort.set()
            if barrier is not None:
                barrier.abort()
            raise

    def _pin(self, i):
        if not self.pin_threads:
            return
        try:
            cores = sorted(os.sched_getaffinity(0))
            # teams occupy contiguous cores
            os.sched_setaffinity(0, {cores[i % len(cores)]})
        except (AttributeError, OSError) as exc:
            logger.warning('could not pin pipeline thread %d: %s', i, exc)

    def _update(self, i, grid, schedule, block):
        first = i * self.cfg.T
        for step in range(first, first + self.cfg.T):
            update_block(grid, schedule.region(step, block), step, schedule.traversal)
        self.counters.increment(i)

    def _record(self, i, sweep, block, records):
        if self.trace is None:
            return
        cfg = self.cfg
        c_self = self.counters[i]
        c_prev = self.counters[i - 1] if i > 0 else None
        c_next = self.counters[i + 1] if i < cfg.threads - 1 else None
        ok = dependencies_met(c_prev, c_self, c_next, i, cfg)
        if not ok:
            logger.warning('thread %d entered block %d at counters %s', i, block, (c_prev, c_self, c_next))
        records.append(TraceEvent(sweep, i, block, c_prev, c_self, c_next, ok))

    def _barrier_worker(self, i, grid, schedule, sweep, abort, barrier, records):
        cfg = self.cfg
        total = schedule.blocks
        offsets = [j * cfg.d_l + cfg.team_of(j) * cfg.d_t for j in range(cfg.threads)]
        for tick in range(total + offsets[-1]):
            block = tick - offsets[i]
            if 0 <= block < total:
                self._record(i, sweep, block, records)
                self._update(i, grid, schedule, block)
            barrier.wait()

    def _relaxed_worker(self, i, grid, schedule, sweep, abort, barrier, records):
        total = schedule.blocks
        for block in range(total):
            self._wait(i, total, abort)
            self._record(i, sweep, block, records)
            self._update(i, grid, schedule, block)

    def _wait(self, i, total, abort):
        spins = 0
        deadline = None
        while not may_proceed(self.counters, i, self.cfg, total):
            if abort.is_set():
                raise _Aborted()
            spins += 1
            if spins < self.spin_budget:
                continue
            spins = 0
            now = time.monotonic()
            if deadline is None:
                deadline = now + self.spin_timeout
            elif now > deadline:
                raise DeadlockError(
                    f'thread {i} waited {self.spin_timeout}s at counters {self.counters.snapshot()}'
                )
            time.sleep(0)


def run_node_sweeps(grid, cfg, sweeps, widening=None, **options):
    """Apply ``sweeps`` node sweeps, i.e. ``sweeps * cfg.U`` levels, to ``grid``."""
    return PipelineRunner(cfg, **options).run(grid, sweeps, widening)


def instrumented_run(grid, cfg, sweeps, **options):
    """Run like run_node_sweeps and return the trace of every block start."""
    trace = Trace(cfg)
    PipelineRunner(cfg, trace=trace, **options).run(grid, sweeps)
    if trace.violations:
        logger.error('%d gate violations in %s', len(trace.violations), cfg.describe())
    return trace

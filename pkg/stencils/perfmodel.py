"""
Analytic performance models: the memory-bound baseline, the single-cache
pipelined speedup, and the cost of multi-layer halo exchange.

All functions are pure; parameter defaults come from ``STENCILS['MACHINE']``
and ``STENCILS['NETWORK']``.
"""

import csv
import io
from dataclasses import dataclass

from .conf import get_setting
from .exceptions import ConfigurationError

# bytes of memory traffic per update of the two-grid kernel (load + store, no RFO)
BYTES_PER_UPDATE = 16
WORD = 8

HALO_COLUMNS = ('L', 'h', 'bulk_s', 'face_s', 'comm_s', 'ratio', 'efficiency')
SPEEDUP_COLUMNS = ('t', 'T', 'speedup')
BALANCE_COLUMNS = ('quantity', 'value')
TEAM_COLUMNS = ('t', 'T', 'd_u', 'cache_blocks', 'rate', 'traffic')
DEFAULT_SIDES = 1

HALO_SIZES = (8, 16, 32, 64, 128, 512)
HALO_WIDTHS = (2, 4, 8, 16, 32)
TEAM_SIZES = (1, 2, 4)
UPDATES = (1, 2, 4, 8)
UPPER_BOUNDS = (1, 2, 4)


def _positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ConfigurationError(f'{name} must be positive, got {value!r}')


@dataclass(frozen=True)
class MachineParams:
    M_s: float
    M_s1: float
    M_c: float

    def __post_init__(self):
        _positive(M_s=self.M_s, M_s1=self.M_s1, M_c=self.M_c)

    @classmethod
    def from_settings(cls, **overrides):
        machine = dict(get_setting('MACHINE'))
        machine.update(overrides)
        return cls(machine['M_s'], machine['M_s1'], machine['M_c'])

    @classmethod
    def socket(cls):
        """One socket of the reference machine, measured saturated bandwidth."""
        machine = get_setting('MACHINE')
        return cls(machine['M_s_socket'], machine['M_s1'], machine['M_c'])


@dataclass(frozen=True)
class NetworkParams:
    bandwidth: float
    latency: float
    node_rate: float

    def __post_init__(self):
        _positive(bandwidth=self.bandwidth, latency=self.latency, node_rate=self.node_rate)

    @classmethod
    def from_settings(cls, **overrides):
        network = dict(get_setting('NETWORK'))
        network.update(overrides)
        return cls(network['bandwidth'], network['latency'], network['node_rate'])


def baseline_perf(M_s):
    """Updates/s of a memory-bound sweep that moves 16 bytes per update."""
    _positive(M_s=M_s)
    return M_s / BYTES_PER_UPDATE


def team_block_time(params, t, T):
    """Seconds per cell for the ``t*T`` updates a team applies to one block."""
    updates = t * T
    if updates < 1:
        raise ConfigurationError(f't*T must be >= 1, got {updates}')
    return (BYTES_PER_UPDATE / params.M_s1) * (1 + (updates - 1) * params.M_s1 / params.M_c)


def pipelined_speedup(params, t, T):
    updates = t * T
    if updates < 1:
        raise ConfigurationError(f't*T must be >= 1, got {updates}')
    return (params.M_s1 / params.M_s) * updates / (1 + (updates - 1) * params.M_s1 / params.M_c)


def speedup_limit(params):
    return params.M_c / params.M_s


def code_balance(rfo=True):
    """Words per flop of the naive kernel: 8 words per 6 flops with write-allocate, 3 without."""
    words = 8 if rfo else 3
    return words / 6


def memory_traffic(rate, bytes_per_update=BYTES_PER_UPDATE):
    return rate * bytes_per_update


def cache_blocks_required(t, d_u):
    """Blocks a team keeps in flight; the single-cache model assumes they all fit."""
    if t < 1 or d_u < 1:
        raise ConfigurationError(f't and d_u must be >= 1, got t={t} d_u={d_u}')
    return (t - 1) * d_u


@dataclass(frozen=True)
class HaloBreakdown:
    """Seconds per outer step of ``h`` local levels on an ``L**3`` subdomain."""

    L: int
    h: int
    bulk: float
    face: float
    comm: float

    @property
    def compute(self):
        return self.bulk + self.face

    @property
    def total(self):
        return self.compute + self.comm


def _check_halo(L, h, sides):
    if L < 1 or h < 1:
        raise ConfigurationError(f'L and h must be >= 1, got L={L} h={h}')
    if sides not in (1, 2):
        raise ConfigurationError(f'sides must be 1 or 2, got {sides}')


def phase_areas(L, h, sides=DEFAULT_SIDES):
    """Cross sections of the x, y and z halo slabs; later phases carry earlier ghosts."""
    grown = L + sides * (h - 1)
    return (L * L, grown * L, grown * grown)


def multihalo_time(L, h, net=None, sides=DEFAULT_SIDES):
    """
    Compute and exchange time of one outer step. Level ``s`` updates
    ``(L + sides*(h-s))**3`` cells; the ``h*L**3`` of them inside the
    subdomain are the bulk, the rest is redundant face work. Every phase
    sends and receives one slab per face with no overlap.
    """
    _check_halo(L, h, sides)
    net = net or NetworkParams.from_settings()
    bulk_cells = h * L ** 3
    face_cells = sum((L + sides * (h - s)) ** 3 for s in range(1, h + 1)) - bulk_cells
    comm = sum(2 * (net.latency + WORD * h * area / net.bandwidth) for area in phase_areas(L, h, sides))
    return HaloBreakdown(L, h, bulk_cells / net.node_rate, face_cells / net.node_rate, comm)


def multihalo_ratio(L, h, net=None, sides=DEFAULT_SIDES):
    """Time per update with single halos over time per update with ``h`` layers."""
    net = net or NetworkParams.from_settings()
    single = multihalo_time(L, 1, net, sides).total
    return single * h / multihalo_time(L, h, net, sides).total


def efficiency(L, h, net=None, sides=DEFAULT_SIDES):
    breakdown = multihalo_time(L, h, net, sides)
    return breakdown.compute / breakdown.total


def halo_rows(Ls, hs, net=None, sides=DEFAULT_SIDES):
    net = net or NetworkParams.from_settings()
    for L in Ls:
        for h in hs:
            b = multihalo_time(L, h, net, sides)
            yield (L, h, b.bulk, b.face, b.comm, multihalo_ratio(L, h, net, sides), efficiency(L, h, net, sides))


def speedup_rows(ts, Ts, params=None):
    params = params or MachineParams.from_settings()
    for t in ts:
        for T in Ts:
            yield (t, T, pipelined_speedup(params, t, T))


def balance_rows(params=None):
    params = params or MachineParams.from_settings()
    yield ('code_balance_rfo', code_balance(rfo=True))
    yield ('code_balance_no_rfo', code_balance(rfo=False))
    yield ('speedup_limit', speedup_limit(params))


def team_rows(ts, Ts, d_us, params=None):
    """Blocks in flight per team, pipelined update rate and the memory traffic it implies."""
    params = params or MachineParams.from_settings()
    base = baseline_perf(params.M_s)
    for t in ts:
        for T in Ts:
            rate = base * pipelined_speedup(params, t, T)
            # one load and one store per block for all t*T updates
            traffic = memory_traffic(rate, BYTES_PER_UPDATE / (t * T))
            for d_u in d_us:
                yield (t, T, d_u, cache_blocks_required(t, d_u), rate, traffic)


def _format(value):
    if isinstance(value, float):
        return f'{value:.12e}'
    return str(value)


def to_csv(columns, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(v) for v in row])
    return buffer.getvalue()


def halo_csv(Ls, hs, net=None, sides=DEFAULT_SIDES):
    return to_csv(HALO_COLUMNS, halo_rows(Ls, hs, net, sides))


def speedup_csv(ts, Ts, params=None):
    return to_csv(SPEEDUP_COLUMNS, speedup_rows(ts, Ts, params))


def balance_csv(params=None):
    return to_csv(BALANCE_COLUMNS, balance_rows(params))


def team_csv(ts, Ts, d_us, params=None):
    return to_csv(TEAM_COLUMNS, team_rows(ts, Ts, d_us, params))

"""
Domain decomposition with ``h``-layer halos.

Ranks exchange ``h`` layers once every ``h`` local levels. Halos travel
along x, then y, then z; the y and z slabs include the ghost layers filled by
the earlier phases, which delivers edge and corner data without diagonal
messages. Between exchanges level ``s`` (1-based) updates the interior grown
by ``h - s`` layers on every side that has a neighbour.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigurationError
from .grid import DIMENSIONS, FACES, GridDims, extract_layers, from_field, inject_layers
from .kernel import _parse_triple
from .pipeline import run_node_sweeps
from .transport import HIGH, LOW, PHASE_CODES, Message, spawn_world

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Layout:
    px: int
    py: int
    pz: int

    def __post_init__(self):
        if min(self.px, self.py, self.pz) < 1:
            raise ConfigurationError(f'layout extents must be >= 1, got {self}')

    @classmethod
    def parse(cls, text):
        return cls(*_parse_triple(text, 'layout'))

    def __str__(self):
        return f'{self.px}x{self.py}x{self.pz}'

    @property
    def extents(self):
        return (self.px, self.py, self.pz)

    @property
    def ranks(self):
        return self.px * self.py * self.pz

    def coords(self, rank):
        return (rank % self.px, (rank // self.px) % self.py, rank // (self.px * self.py))

    def rank_of(self, coords):
        if any(not 0 <= c < p for c, p in zip(coords, self.extents)):
            return None
        x, y, z = coords
        return x + self.px * (y + self.py * z)


def split(n, parts):
    """Near-equal ``(offset, size)`` pieces, the remainder going to the low pieces."""
    base, extra = divmod(n, parts)
    pieces, offset = [], 0
    for p in range(parts):
        size = base + (1 if p < extra else 0)
        pieces.append((offset, size))
        offset += size
    return pieces


@dataclass(frozen=True)
class Subdomain:
    rank: int
    coords: tuple
    offset: tuple
    dims: GridDims
    neighbors: dict

    @property
    def physical_faces(self):
        return {face for face in FACES if self.neighbors[face] is None}


@dataclass(frozen=True)
class Decomposition:
    global_dims: GridDims
    layout: Layout
    halo: int
    subdomains: tuple

    @property
    def ranks(self):
        return self.layout.ranks

    def for_rank(self, rank):
        return self.subdomains[rank]


def decompose(global_dims, ranks, layout, halo=1):
    if isinstance(layout, str):
        layout = Layout.parse(layout)
    if layout.ranks != ranks:
        raise ConfigurationError(f'layout {layout} holds {layout.ranks} ranks, asked for {ranks}')
    if halo < 1:
        raise ConfigurationError(f'halo width must be >= 1, got {halo}')
    pieces = [split(n, p) for n, p in zip(global_dims.interior, layout.extents)]
    for dim, n, p, axis in zip(DIMENSIONS, global_dims.interior, layout.extents, pieces):
        smallest = min(size for _, size in axis)
        if smallest < 1 or (p > 1 and smallest < halo):
            raise ConfigurationError(
                f'{n} cells over {p} ranks along {dim} leaves {smallest} < halo {halo}'
            )
    subdomains = []
    for rank in range(ranks):
        coords = layout.coords(rank)
        offset = tuple(pieces[d][coords[d]][0] for d in range(3))
        sizes = tuple(pieces[d][coords[d]][1] for d in range(3))
        neighbors = {}
        for d, dim in enumerate(DIMENSIONS):
            for sign, step in (('-', -1), ('+', 1)):
                moved = list(coords)
                moved[d] += step
                neighbors[f'{sign}{dim}'] = layout.rank_of(moved)
        subdomains.append(Subdomain(rank, coords, offset, GridDims(*sizes, ghost=halo), neighbors))
    return Decomposition(global_dims, layout, halo, tuple(subdomains))


@dataclass(frozen=True)
class SlabMessage:
    face: str
    neighbor: int
    extend: tuple

    @property
    def side(self):
        return LOW if self.face[0] == '-' else HIGH


@dataclass(frozen=True)
class ExchangePhase:
    dim: str
    low: SlabMessage
    high: SlabMessage

    @property
    def code(self):
        return PHASE_CODES[self.dim]


@dataclass(frozen=True)
class HaloPlan:
    rank: int
    coords: tuple
    depth: int
    dims: GridDims
    phases: tuple

    @property
    def messages(self):
        return sum(
            1 for phase in self.phases for slab in (phase.low, phase.high) if slab.neighbor is not None
        )

    def slab_cells(self, dim):
        """Cells in one face message of the ``dim`` phase."""
        phase = next(p for p in self.phases if p.dim == dim)
        normal = DIMENSIONS.index(dim)
        cells = self.depth
        for d, n in enumerate(self.dims.interior):
            if d != normal:
                cells *= n + 2 * phase.low.extend[d]
        return cells


def build_halo_plan(decomposition, rank):
    sub = decomposition.for_rank(rank)
    h = decomposition.halo
    phases = []
    for d, dim in enumerate(DIMENSIONS):
        # earlier phases already filled their ghost layers; carry them along
        extend = tuple(h if e < d else 0 for e in range(3))
        phases.append(ExchangePhase(
            dim,
            SlabMessage(f'-{dim}', sub.neighbors[f'-{dim}'], extend),
            SlabMessage(f'+{dim}', sub.neighbors[f'+{dim}'], extend),
        ))
    return HaloPlan(rank, sub.coords, h, sub.dims, tuple(phases))


def shuffled(plan, order):
    """The same plan with its phases run in ``order`` (e.g. ``'yxz'``)."""
    by_dim = {phase.dim: phase for phase in plan.phases}
    return replace(plan, phases=tuple(by_dim[dim] for dim in order))


def exchange_halos(grid, plan, endpoint, sweep=0):
    """Fill the ``plan.depth`` ghost layers from the neighbours; returns messages sent."""
    sent = 0
    for phase in plan.phases:
        coord = plan.coords[DIMENSIONS.index(phase.dim)]
        # even coordinates pair low side first, odd ones high side first
        slabs = (phase.low, phase.high) if coord % 2 == 0 else (phase.high, phase.low)
        for slab in slabs:
            if slab.neighbor is None:
                continue
            values = extract_layers(grid, slab.face, plan.depth, slab.extend)
            endpoint.send(
                slab.neighbor,
                Message.from_values(sweep, phase.code, slab.side, plan.depth, values),
            )
            sent += 1
            incoming = endpoint.recv(
                slab.neighbor,
                sweep=sweep,
                phase=phase.code,
                side=HIGH if slab.side == LOW else LOW,
                depth=plan.depth,
                count=values.size,
            )
            inject_layers(grid, slab.face, plan.depth, incoming, slab.extend)
    logger.debug('rank %d exchanged %d slabs in round %d', plan.rank, sent, sweep)
    return sent


def widening(grid, h):
    """Per-level growth into the ghost shell for the ``h`` levels of an outer step."""
    levels = []
    for s in range(1, h + 1):
        grow = h - s
        low = tuple(grow if f'-{dim}' not in grid.physical else 0 for dim in DIMENSIONS)
        high = tuple(grow if f'+{dim}' not in grid.physical else 0 for dim in DIMENSIONS)
        levels.append((low, high))
    return levels


@dataclass
class PipelineEngine:
    """Local update engine: ``h`` levels as ``h / U`` pipelined node sweeps."""

    cfg: object
    options: dict = field(default_factory=dict)

    def __call__(self, grid, levels, grow):
        if levels % self.cfg.U:
            raise ConfigurationError(f'halo width {levels} is not a multiple of U = {self.cfg.U}')
        run_node_sweeps(grid, self.cfg, levels // self.cfg.U, grow, **self.options)


def outer_step(grid, h, engine):
    if h > grid.dims.ghost:
        raise ConfigurationError(f'{h} levels need {h} ghost layers, grid has {grid.dims.ghost}')
    engine(grid, h, widening(grid, h))


@dataclass
class DistributedRun:
    decomposition: Decomposition
    grids: list
    field: np.ndarray
    messages: list


def run_distributed(global_dims, ranks, layout, cfg, outer_steps, pattern, batch=1,
                    phase_order='xyz', **options):
    """
    Decompose, run ``outer_steps`` rounds of exchange + ``h = batch * U`` local
    levels on every rank, and gather the interiors into one global field.
    """
    h = cfg.U * batch
    decomposition = decompose(global_dims, ranks, layout, h)
    initial = pattern.render(global_dims)
    padded = np.pad(initial, h - 1)
    engine = PipelineEngine(cfg, options)

    def program(endpoint):
        sub = decomposition.for_rank(endpoint.rank)
        ox, oy, oz = sub.offset
        nx, ny, nz = sub.dims.interior
        local = padded[oz:oz + nz + 2 * h, oy:oy + ny + 2 * h, ox:ox + nx + 2 * h]
        grid = from_field(local, sub.dims, cfg.storage, slack=cfg.U)
        grid.physical = sub.physical_faces
        plan = shuffled(build_halo_plan(decomposition, endpoint.rank), phase_order)
        sent = 0
        for step in range(outer_steps):
            sent += exchange_halos(grid, plan, endpoint, step)
            outer_step(grid, h, engine)
        return grid, sent

    def neighbors(rank):
        return {r for r in decomposition.for_rank(rank).neighbors.values() if r is not None}

    logger.info('distributed run: %s ranks %s, h=%d, %d outer steps', ranks, decomposition.layout, h, outer_steps)
    results = spawn_world(ranks, program, neighbors=neighbors)
    gathered = initial.copy()
    g = global_dims.ghost
    for sub, (grid, _) in zip(decomposition.subdomains, results):
        ox, oy, oz = sub.offset
        nx, ny, nz = sub.dims.interior
        gathered[oz + g:oz + g + nz, oy + g:oy + g + ny, ox + g:ox + g + nx] = grid.interior()
    return DistributedRun(decomposition, [grid for grid, _ in results], gathered,
                          [sent for _, sent in results])

"""
Storage for 3D scalar fields with a ghost shell.

Arrays are indexed ``[z, y, x]`` so that x is the contiguous direction; every
public function takes logical ``(i, j, k) = (x, y, z)`` interior indices, where
``-ghost <= i < nx + ghost`` addresses the ghost shell.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, GridAccessError, ProtocolError

logger = logging.getLogger(__name__)

TWO_GRID = 'twogrid'
COMPRESSED = 'compressed'
STORAGE_MODES = (TWO_GRID, COMPRESSED)

FORWARD = 'forward'
REVERSE = 'reverse'

FACES = ('-x', '+x', '-y', '+y', '-z', '+z')
DIMENSIONS = ('x', 'y', 'z')
# array axis of each logical dimension
AXIS = {'x': 2, 'y': 1, 'z': 0}


@dataclass(frozen=True)
class GridDims:
    nx: int
    ny: int
    nz: int
    ghost: int = 1

    def __post_init__(self):
        for name in ('nx', 'ny', 'nz'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f'{name} must be a positive integer, got {value!r}')
        if int(self.ghost) != self.ghost or self.ghost < 1:
            raise ConfigurationError(f'ghost must be >= 1, got {self.ghost!r}')

    @classmethod
    def cube(cls, n, ghost=1):
        return cls(n, n, n, ghost)

    @property
    def interior(self):
        return (self.nx, self.ny, self.nz)

    @property
    def shape(self):
        g = self.ghost
        return (self.nz + 2 * g, self.ny + 2 * g, self.nx + 2 * g)

    @property
    def cells(self):
        return self.nx * self.ny * self.nz

    def extent(self, dim):
        return self.interior[DIMENSIONS.index(dim)]

    def with_ghost(self, ghost):
        return GridDims(self.nx, self.ny, self.nz, ghost)


@dataclass(frozen=True)
class FillPattern:
    kind: str
    value: float = 0.0
    seed: int = 0

    KINDS = ('constant', 'linear', 'hotplate', 'random')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f'unknown fill pattern {self.kind!r}')

    @classmethod
    def constant(cls, value):
        return cls('constant', value=float(value))

    @classmethod
    def linear(cls):
        return cls('linear')

    @classmethod
    def hotplate(cls):
        return cls('hotplate')

    @classmethod
    def random(cls, seed):
        return cls('random', seed=int(seed))

    @classmethod
    def parse(cls, text):
        """Parse ``constant:5``, ``linear``, ``hotplate`` or ``random:42``."""
        kind, _, arg = text.partition(':')
        try:
            if kind == 'constant':
                return cls.constant(float(arg or 0.0))
            if kind == 'random':
                return cls.random(int(arg or 0))
        except ValueError as exc:
            raise ConfigurationError(f'bad fill pattern {text!r}') from exc
        if arg:
            raise ConfigurationError(f'fill pattern {kind!r} takes no argument')
        return cls(kind)

    def __str__(self):
        if self.kind == 'constant':
            return f'constant:{self.value:g}'
        if self.kind == 'random':
            return f'random:{self.seed}'
        return self.kind

    def render(self, dims):
        """Full field (ghost shell included) for ``dims``."""
        g = dims.ghost
        if self.kind == 'constant':
            return np.full(dims.shape, self.value, dtype=np.float64)
        if self.kind == 'linear':
            i = np.arange(-g, dims.nx + g, dtype=np.float64)
            j = np.arange(-g, dims.ny + g, dtype=np.float64)
            k = np.arange(-g, dims.nz + g, dtype=np.float64)
            return k[:, None, None] + j[None, :, None] + i[None, None, :]
        if self.kind == 'hotplate':
            field = np.zeros(dims.shape, dtype=np.float64)
            # the low-z face is the hot plate
            field[:g] = 1.0
            return field
        rng = np.random.default_rng(self.seed)
        return rng.random(dims.shape, dtype=np.float64)


def face_layer(dims, face):
    """Index of the first ghost layer behind ``face`` in a full-extent array."""
    g = dims.ghost
    axis = AXIS[face[1]]
    position = g - 1 if face[0] == '-' else g + dims.extent(face[1])
    index = [slice(None)] * 3
    index[axis] = position
    return tuple(index)


def region_slices(dims, lo, hi, shift=0):
    """Array slices for the logical box ``[lo, hi)`` translated by ``shift``."""
    g = dims.ghost + shift
    return tuple(slice(lo[d] + g, hi[d] + g) for d in (2, 1, 0))


class Grid:
    """Common logical view over the storage modes."""

    mode = None

    def __init__(self, dims):
        self.dims = dims
        # faces whose ghost layer holds Dirichlet values rather than exchanged halo
        self.physical = set(FACES)

    def current(self):
        """View of the current time level, ghost shell included."""
        raise NotImplementedError

    def interior(self):
        g = self.dims.ghost
        return self.current()[g:-g, g:-g, g:-g]

    def snapshot(self):
        return self.current().copy()

    def value_at(self, i, j, k):
        g = self.dims.ghost
        for index, extent in zip((i, j, k), self.dims.interior):
            if not -g <= index < extent + g:
                raise GridAccessError(f'logical index {(i, j, k)} outside {self.dims}')
        return float(self.current()[k + g, j + g, i + g])

    def check_region(self, lo, hi):
        g = self.dims.ghost
        for d, extent in enumerate(self.dims.interior):
            if lo[d] > hi[d] or lo[d] < 1 - g or hi[d] > extent + g - 1:
                raise GridAccessError(
                    f'region {tuple(lo)}..{tuple(hi)} escapes the allocation of {self.dims}'
                )


class TwoGrid(Grid):
    mode = TWO_GRID

    def __init__(self, dims, field):
        super().__init__(dims)
        self.arrays = [np.array(field, dtype=np.float64, copy=True) for _ in range(2)]
        self.active = 0

    @property
    def a(self):
        return self.arrays[0]

    @property
    def b(self):
        return self.arrays[1]

    def current(self):
        return self.arrays[self.active]

    def source(self, step):
        return self.arrays[(self.active + step) % 2]

    def target(self, step):
        return self.arrays[(self.active + step + 1) % 2]

    def commit(self, levels):
        self.active = (self.active + levels) % 2

    def end_sweep(self):
        pass


class CompressedGrid(Grid):
    """
    Single-array storage. Level ``s`` of the running sweep lives at array
    offset ``offset - s`` (forward sweeps) or ``offset + s`` (reverse sweeps)
    along every axis; Dirichlet faces are kept aside in ``faces`` because the
    array holds only the active frame.
    """

    mode = COMPRESSED

    def __init__(self, dims, field, slack):
        super().__init__(dims)
        if slack < 1:
            raise ConfigurationError('compressed storage needs slack >= 1')
        self.slack = int(slack)
        shape = tuple(n + self.slack for n in dims.shape)
        if np.prod(shape, dtype=np.float64) * 8 >= np.iinfo(np.intp).max:
            raise ConfigurationError(f'compressed allocation {shape} overflows address arithmetic')
        self.data = np.zeros(shape, dtype=np.float64)
        self.offset = self.slack
        self.forward = True
        self.current()[...] = field
        self.faces = {face: field[face_layer(dims, face)].copy() for face in FACES}

    @property
    def origin_offset(self):
        return (self.offset, self.offset, self.offset)

    @property
    def traversal(self):
        return FORWARD if self.forward else REVERSE

    @property
    def sign(self):
        return -1 if self.forward else 1

    def frame(self, step):
        return self.offset + self.sign * step

    def view(self, frame):
        z, y, x = self.dims.shape
        return self.data[frame:frame + z, frame:frame + y, frame:frame + x]

    def current(self):
        return self.view(self.offset)

    def check_levels(self, levels):
        end = self.frame(levels)
        if not 0 <= end <= self.slack:
            raise GridAccessError(
                f'{levels} levels from offset {self.offset} ({self.traversal}) leave slack {self.slack}'
            )

    def commit(self, levels):
        self.check_levels(levels)
        self.offset = self.frame(levels)
        self.refresh_faces()

    def refresh_faces(self):
        """Rewrite the Dirichlet layer of the physical faces at the current frame."""
        view = self.current()
        for face in sorted(self.physical):
            view[face_layer(self.dims, face)] = self.faces[face]

    def end_sweep(self):
        self.forward = not self.forward


def from_field(field, dims, mode=TWO_GRID, slack=0):
    field = np.asarray(field, dtype=np.float64)
    if field.shape != dims.shape:
        raise ConfigurationError(f'field shape {field.shape} does not match {dims.shape}')
    if mode == TWO_GRID:
        return TwoGrid(dims, field)
    if mode == COMPRESSED:
        return CompressedGrid(dims, field, slack)
    raise ConfigurationError(f'unknown storage mode {mode!r}')


def allocate(dims, mode=TWO_GRID, pattern=None, slack=0):
    pattern = pattern or FillPattern.constant(0.0)
    logger.debug('allocating %s grid %s with %s (slack %d)', mode, dims, pattern, slack)
    return from_field(pattern.render(dims), dims, mode, slack)


def _slab_bounds(dims, face, depth, extend, ghost_side):
    if face not in FACES:
        raise ConfigurationError(f'unknown face {face!r}')
    if not 1 <= depth <= dims.ghost:
        raise GridAccessError(f'depth {depth} outside 1..{dims.ghost}')
    extend = tuple(extend or (0, 0, 0))
    if any(not 0 <= e <= dims.ghost for e in extend):
        raise GridAccessError(f'extension {extend} exceeds ghost width {dims.ghost}')
    normal = DIMENSIONS.index(face[1])
    lo, hi = [], []
    for d, n in enumerate(dims.interior):
        if d != normal:
            lo.append(-extend[d])
            hi.append(n + extend[d])
        elif face[0] == '-':
            lo.append(-depth if ghost_side else 0)
            hi.append(0 if ghost_side else depth)
        else:
            lo.append(n if ghost_side else n - depth)
            hi.append(n + depth if ghost_side else n)
    return lo, hi


def slab(grid, face, depth, extend=None, ghost_side=False):
    """View of the boundary layers behind (``ghost_side``) or inside a face."""
    lo, hi = _slab_bounds(grid.dims, face, depth, extend, ghost_side)
    return grid.current()[region_slices(grid.dims, lo, hi)]


def extract_layers(grid, face, depth, extend=None):
    """Pack the ``depth`` interior layers next to ``face``, x fastest."""
    return np.ascontiguousarray(slab(grid, face, depth, extend)).ravel()


def inject_layers(grid, face, depth, values, extend=None):
    """Unpack ``values`` into the ghost layers behind ``face``."""
    target = slab(grid, face, depth, extend, ghost_side=True)
    values = np.asarray(values, dtype=np.float64)
    if values.size != target.size:
        raise ProtocolError(f'slab for {face} holds {target.size} values, got {values.size}')
    target[...] = values.reshape(target.shape)


def dump_grid(field, dims, path):
    """Write ``nx ny nz ghost`` and then every value of ``field``, one per line."""
    header = f'{dims.nx} {dims.ny} {dims.nz} {dims.ghost}'
    np.savetxt(path, np.asarray(field).ravel(), fmt='%.17g', header=header, comments='')


def load_field(path):
    with open(path) as handle:
        nx, ny, nz, ghost = (int(v) for v in handle.readline().split())
        values = np.loadtxt(handle, dtype=np.float64, ndmin=1)
    dims = GridDims(nx, ny, nz, ghost)
    if values.size != np.prod(dims.shape):
        raise ProtocolError(f'dump holds {values.size} values, expected {np.prod(dims.shape)}')
    return dims, values.reshape(dims.shape)

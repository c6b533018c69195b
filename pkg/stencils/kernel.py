"""
The six-point Jacobi update and the serial sweeps built on it.

Every variant evaluates one cell as
``((x- + x+) + (y- + y+)) + (z- + z+)`` times ``1/6``; keeping that order is
what lets all sweep variants agree bit for bit.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, GridAccessError
from .grid import COMPRESSED, FORWARD, TWO_GRID, region_slices

logger = logging.getLogger(__name__)

ONE_SIXTH = 1.0 / 6.0


def stencil_point(xm, xp, ym, yp, zm, zp):
    return (((xm + xp) + (ym + yp)) + (zm + zp)) * ONE_SIXTH


def _parse_triple(text, what):
    try:
        parts = tuple(int(p) for p in text.lower().split('x'))
    except ValueError as exc:
        raise ConfigurationError(f'bad {what} {text!r}, expected AxBxC') from exc
    if len(parts) != 3:
        raise ConfigurationError(f'bad {what} {text!r}, expected AxBxC')
    return parts


@dataclass(frozen=True)
class BlockSize:
    bx: int
    by: int
    bz: int

    def __post_init__(self):
        if min(self.bx, self.by, self.bz) < 1:
            raise ConfigurationError(f'block extents must be >= 1, got {self}')

    @classmethod
    def parse(cls, text):
        return cls(*_parse_triple(text, 'block size'))

    @classmethod
    def full(cls, dims):
        return cls(dims.nx, dims.ny, dims.nz)

    def __str__(self):
        return f'{self.bx}x{self.by}x{self.bz}'

    @property
    def extents(self):
        return (self.bx, self.by, self.bz)

    def clamp(self, dims):
        return BlockSize(*(min(b, n) for b, n in zip(self.extents, dims.interior)))

    def check(self, dims):
        if any(b > n for b, n in zip(self.extents, dims.interior)):
            raise ConfigurationError(f'block {self} larger than interior {dims.interior}')


@dataclass(frozen=True)
class Region:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ConfigurationError(f'region bounds inverted: {self.lo}..{self.hi}')

    @classmethod
    def interior(cls, dims):
        return cls((0, 0, 0), dims.interior)

    @property
    def cells(self):
        return int(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    @property
    def empty(self):
        return self.cells == 0


def apply_stencil(window):
    """Update the centre of ``window`` (one extra layer on every side)."""
    c = slice(1, -1)
    return (
        ((window[c, c, :-2] + window[c, c, 2:]) + (window[c, :-2, c] + window[c, 2:, c]))
        + (window[:-2, c, c] + window[2:, c, c])
    ) * ONE_SIXTH


def _patch_faces(grid, window, lo, hi):
    """Put the frozen Dirichlet values behind physical faces into ``window``."""
    dims = grid.dims
    g = dims.ghost
    x = slice(lo[0] - 1 + g, hi[0] + 1 + g)
    y = slice(lo[1] - 1 + g, hi[1] + 1 + g)
    z = slice(lo[2] - 1 + g, hi[2] + 1 + g)
    physical = grid.physical
    if lo[0] == 0 and '-x' in physical:
        window[:, :, 0] = grid.faces['-x'][z, y]
    if hi[0] == dims.nx and '+x' in physical:
        window[:, :, -1] = grid.faces['+x'][z, y]
    if lo[1] == 0 and '-y' in physical:
        window[:, 0, :] = grid.faces['-y'][z, x]
    if hi[1] == dims.ny and '+y' in physical:
        window[:, -1, :] = grid.faces['+y'][z, x]
    if lo[2] == 0 and '-z' in physical:
        window[0] = grid.faces['-z'][y, x]
    if hi[2] == dims.nz and '+z' in physical:
        window[-1] = grid.faces['+z'][y, x]


def update_block(grid, region, step=0, traversal=FORWARD):
    """
    Apply one time level to ``region``, reading the level ``step`` levels into
    the running sweep and writing the next one.
    """
    if region.empty:
        return
    lo, hi = region.lo, region.hi
    grid.check_region(lo, hi)
    dims = grid.dims
    outer = region_slices(dims, [a - 1 for a in lo], [b + 1 for b in hi])
    inner = region_slices(dims, lo, hi)
    if grid.mode == TWO_GRID:
        grid.target(step)[inner] = apply_stencil(grid.source(step)[outer])
        return
    if grid.mode != COMPRESSED:
        raise ConfigurationError(f'unknown storage mode {grid.mode!r}')
    if traversal != grid.traversal:
        raise ConfigurationError(
            f'compressed sweep runs {grid.traversal}, block asked for {traversal}'
        )
    write = grid.frame(step + 1)
    if not 0 <= write <= grid.slack:
        raise GridAccessError(f'write frame {write} outside slack {grid.slack}')
    window = grid.view(grid.frame(step))[outer].copy()
    _patch_faces(grid, window, lo, hi)
    grid.view(write)[inner] = apply_stencil(window)


def _require_two_grid(grid):
    if grid.mode != TWO_GRID:
        raise ConfigurationError('serial sweeps run on two-grid storage')


def sweep_naive(grid):
    _require_two_grid(grid)
    update_block(grid, Region.interior(grid.dims))
    grid.commit(1)


def blocks(dims, bs):
    """Base blocks of ``bs`` tiling the interior, z outer and x inner."""
    starts = [range(0, n, b) for n, b in zip(dims.interior, bs.extents)]
    for z, y, x in itertools.product(starts[2], starts[1], starts[0]):
        lo = (x, y, z)
        hi = tuple(min(a + b, n) for a, b, n in zip(lo, bs.extents, dims.interior))
        yield Region(lo, hi)


def sweep_spatial_blocked(grid, bs):
    _require_two_grid(grid)
    for block in blocks(grid.dims, bs.clamp(grid.dims)):
        update_block(grid, block)
    grid.commit(1)

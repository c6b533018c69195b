import numpy as np

GUARD = -7.0


def ghost_mask(dims):
    mask = np.ones(dims.shape, dtype=bool)
    g = dims.ghost
    mask[g:-g, g:-g, g:-g] = False
    return mask


def guarded_field(dims, pattern):
    """``pattern`` inside, ``GUARD`` on the whole ghost shell."""
    field = pattern.render(dims)
    field[ghost_mask(dims)] = GUARD
    return field

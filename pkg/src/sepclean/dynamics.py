"""The spread operator and its counting consequences."""

from __future__ import annotations

import math

import numpy as np

from .grid_core import Contamination


def spread_array(grid: np.ndarray) -> np.ndarray:
    """One spread of a boolean grid; the result gains a one-cell margin."""
    g = np.pad(grid, 1)
    out = g.copy()
    out[1:, :] |= g[:-1, :]
    out[:-1, :] |= g[1:, :]
    out[:, 1:] |= g[:, :-1]
    out[:, :-1] |= g[:, 1:]
    return out


def spread(c: Contamination) -> Contamination:
    """Every contaminated cell infects its four neighbours."""
    if c.is_empty:
        return c
    return Contamination(spread_array(c.grid), c.min_x - 1, c.min_y - 1)


def spread_times(c: Contamination, k: int) -> Contamination:
    for _ in range(k):
        c = spread(c)
    return c


def new_cell_count(c: Contamination) -> int:
    return spread(c).count - c.count


def isoperimetric_lower_bound(cell_count: int) -> float:
    """Minimum number of cells a spread adds to a contamination of ``cell_count`` cells."""
    if cell_count < 1:
        raise ValueError("cell_count must be positive")
    return 2.0 * math.sqrt(2 * cell_count - 1)


def diamond_size(k: int) -> int:
    """Cells in the diamond grown from one cell by ``k`` spreads."""
    return 2 * k * k + 2 * k + 1

"""Greedy baseline: clean here, step to any contaminated 8-neighbour, else rest."""

from __future__ import annotations

from .grid_core import (
    FRONT, FRONT_LEFT, FRONT_RIGHT, LEFT, REAR, REAR_LEFT, REAR_RIGHT, RIGHT,
    Perception, window_offsets,
)
from .strategy_sep import Action

# straight ahead first, then sweeping clockwise
PRIORITY = (FRONT, FRONT_RIGHT, RIGHT, REAR_RIGHT, REAR, REAR_LEFT, LEFT, FRONT_LEFT)
_TURNS_TO = {FRONT: (), RIGHT: ("R",), REAR: ("R", "R"), LEFT: ("L",)}


def greedy_step(position, heading: int, p: Perception) -> Action:
    """Orthogonal targets are reached by turning and moving forward; diagonal
    targets by a world-frame offset with the heading unchanged. Every move
    costs one time step."""
    clean = p.center
    for slot in PRIORITY:
        if p[slot]:
            if slot in _TURNS_TO:
                return Action(turns=_TURNS_TO[slot], clean=clean, move=True)
            return Action(clean=clean, move=True, offset=window_offsets(heading)[slot])
    return Action(clean=clean)

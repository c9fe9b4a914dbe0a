"""Cell-level geometry of contaminations.

Coordinates: ``x`` grows eastward, ``y`` grows northward. Headings are the
integers ``N=0, E=1, S=2, W=3``; turning right adds one modulo four.

A :class:`Contamination` stores its cells as a dense boolean array cropped to
the bounding box (``grid[y - min_y, x - min_x]``). Values are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple

import numpy as np
from scipy import ndimage

N, E, S, W = 0, 1, 2, 3
HEADING_NAMES = "NESW"
DELTA = ((0, 1), (1, 0), (0, -1), (-1, 0))

# 4-connectivity structuring element
_CROSS = ndimage.generate_binary_structure(2, 1)


class Cell(NamedTuple):
    x: int
    y: int

    def step(self, heading: int) -> "Cell":
        dx, dy = DELTA[heading]
        return Cell(self.x + dx, self.y + dy)


def neighbors4(cell) -> list[Cell]:
    x, y = cell
    return [Cell(x + dx, y + dy) for dx, dy in DELTA]


def neighbors8(cell) -> list[Cell]:
    x, y = cell
    return [Cell(x + dx, y + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy]


def adjacent4(a, b) -> bool:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def adjacent8(a, b) -> bool:
    return a != b and max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1


def turn(heading: int, quarter_turns: int) -> int:
    return (heading + quarter_turns) % 4


@dataclass(frozen=True)
class BoundingBox:
    min_x: int
    max_x: int
    min_y: int
    max_y: int

    @property
    def width(self) -> int:
        return self.max_x - self.min_x + 1

    @property
    def height(self) -> int:
        return self.max_y - self.min_y + 1

    def __contains__(self, cell) -> bool:
        x, y = cell
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def expanded(self, margin: int) -> "BoundingBox":
        return BoundingBox(self.min_x - margin, self.max_x + margin,
                           self.min_y - margin, self.max_y + margin)


@dataclass(frozen=True)
class Hole:
    """A bounded 4-connected region of clean cells, described by its extent."""

    min_x: int
    max_x: int
    min_y: int
    max_y: int
    size: int
    enclosed: bool = True

    @property
    def rect(self) -> tuple[int, int, int, int]:
        return (self.min_x, self.max_x, self.min_y, self.max_y)

    @property
    def width(self) -> int:
        return self.max_x - self.min_x + 1

    @property
    def height(self) -> int:
        return self.max_y - self.min_y + 1

    @property
    def short_side(self) -> int:
        return min(self.width, self.height)

    @property
    def rectangular(self) -> bool:
        return self.size == self.width * self.height

    def cells(self) -> list[Cell]:
        return [Cell(x, y) for y in range(self.min_y, self.max_y + 1)
                for x in range(self.min_x, self.max_x + 1)]


class Contamination:
    """Finite set of contaminated cells backed by a bounding-box bit grid."""

    def __init__(self, grid: np.ndarray, min_x: int = 0, min_y: int = 0):
        grid = np.asarray(grid, dtype=bool)
        if grid.ndim != 2:
            raise ValueError("grid must be two-dimensional")
        rows = np.flatnonzero(grid.any(axis=1))
        if rows.size == 0:
            grid = np.zeros((0, 0), dtype=bool)
            min_x = min_y = 0
        else:
            cols = np.flatnonzero(grid.any(axis=0))
            grid = grid[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1].copy()
            min_x += int(cols[0])
            min_y += int(rows[0])
        grid.flags.writeable = False
        self.grid = grid
        self.min_x = min_x
        self.min_y = min_y

    @classmethod
    def from_cells(cls, cells: Iterable) -> "Contamination":
        cells = [(int(x), int(y)) for x, y in cells]
        if not cells:
            return cls(np.zeros((0, 0), dtype=bool))
        xs = [x for x, _ in cells]
        ys = [y for _, y in cells]
        x0, y0 = min(xs), min(ys)
        grid = np.zeros((max(ys) - y0 + 1, max(xs) - x0 + 1), dtype=bool)
        for x, y in cells:
            grid[y - y0, x - x0] = True
        return cls(grid, x0, y0)

    @classmethod
    def rectangle(cls, width: int, height: int, min_x: int = 0, min_y: int = 0):
        return cls(np.ones((height, width), dtype=bool), min_x, min_y)

    # -- basic queries -----------------------------------------------------

    def __len__(self) -> int:
        return self.count

    @cached_property
    def count(self) -> int:
        return int(self.grid.sum())

    @property
    def is_empty(self) -> bool:
        return self.grid.size == 0

    def __contains__(self, cell) -> bool:
        x, y = cell
        i, j = y - self.min_y, x - self.min_x
        h, w = self.grid.shape
        return 0 <= i < h and 0 <= j < w and bool(self.grid[i, j])

    @cached_property
    def cells(self) -> frozenset:
        ys, xs = np.nonzero(self.grid)
        return frozenset(Cell(int(x) + self.min_x, int(y) + self.min_y) for x, y in zip(xs, ys))

    def sorted_cells(self) -> list[Cell]:
        return sorted(self.cells, key=lambda c: (c.y, c.x))

    def __iter__(self):
        return iter(self.sorted_cells())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Contamination):
            return NotImplemented
        return (self.min_x, self.min_y) == (other.min_x, other.min_y) and np.array_equal(self.grid, other.grid)

    def __hash__(self) -> int:
        return hash((self.min_x, self.min_y, self.grid.shape, self.grid.tobytes()))

    def __repr__(self) -> str:
        return f"Contamination(count={self.count}, origin=({self.min_x}, {self.min_y}), shape={self.grid.shape})"

    @property
    def bounding_box(self) -> BoundingBox:
        if self.is_empty:
            raise ValueError("empty contamination has no bounding box")
        h, w = self.grid.shape
        return BoundingBox(self.min_x, self.min_x + w - 1, self.min_y, self.min_y + h - 1)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def translated(self, dx: int, dy: int) -> "Contamination":
        return Contamination(self.grid, self.min_x + dx, self.min_y + dy)

    def with_cells_removed(self, cells: Iterable) -> "Contamination":
        grid = self.grid.copy()
        for x, y in cells:
            if (x, y) in self:
                grid[y - self.min_y, x - self.min_x] = False
        return Contamination(grid, self.min_x, self.min_y)

    def with_cells_added(self, cells: Iterable) -> "Contamination":
        return Contamination.from_cells(set(self.cells) | {(x, y) for x, y in cells})

    def padded(self, margin: int) -> np.ndarray:
        return np.pad(self.grid, margin)

    # -- derived geometry ----------------------------------------------------

    @cached_property
    def component_count(self) -> int:
        if self.is_empty:
            return 0
        _, n = ndimage.label(self.grid, structure=_CROSS)
        return int(n)

    @property
    def connected(self) -> bool:
        return self.component_count == 1

    @cached_property
    def _clean_regions(self) -> tuple[np.ndarray, int, int]:
        """Label clean cells of the 1-padded grid; returns (labels, n, exterior label)."""
        labels, n = ndimage.label(~np.pad(self.grid, 1), structure=_CROSS)
        return labels, int(n), int(labels[0, 0])

    @cached_property
    def holes(self) -> tuple[Hole, ...]:
        """Bounded clean regions, ordered by (min_y, min_x)."""
        if self.is_empty:
            return ()
        labels, n, exterior = self._clean_regions
        padded = np.pad(self.grid, 1)
        out = []
        for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
            if lab == exterior or sl is None:
                continue
            region = labels[sl] == lab
            size = int(region.sum())
            ring = padded[sl[0].start - 1:sl[0].stop + 1, sl[1].start - 1:sl[1].stop + 1].copy()
            ring[1:-1, 1:-1] |= region
            out.append(Hole(
                min_x=self.min_x + sl[1].start - 1,
                max_x=self.min_x + sl[1].stop - 2,
                min_y=self.min_y + sl[0].start - 1,
                max_y=self.min_y + sl[0].stop - 2,
                size=size,
                enclosed=bool(ring.all()),
            ))
        out.sort(key=lambda hole: (hole.min_y, hole.min_x))
        return tuple(out)

    @cached_property
    def filled(self) -> np.ndarray:
        """Contaminated cells plus hole cells (everything not in the exterior face)."""
        if self.is_empty:
            return self.grid
        labels, _, exterior = self._clean_regions
        out = labels[1:-1, 1:-1] != exterior
        out.flags.writeable = False
        return out

    def border_edge_count(self, cell) -> int:
        return sum(1 for nb in neighbors4(cell) if nb not in self)


# ---------------------------------------------------------------------------
# Perception


# Ring order, counter-clockwise from the front: F, FL, L, RL, B, RR, R, FR; then centre.
FRONT, FRONT_LEFT, LEFT, REAR_LEFT, REAR, REAR_RIGHT, RIGHT, FRONT_RIGHT, CENTER = range(9)
SLOT_NAMES = ("front", "front_left", "left", "rear_left", "rear",
              "rear_right", "right", "front_right", "center")
# offsets for heading N
_NORTH_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 0))
ORTHOGONAL_SLOTS = (FRONT, LEFT, REAR, RIGHT)
DIAGONAL_SLOTS = (FRONT_LEFT, REAR_LEFT, REAR_RIGHT, FRONT_RIGHT)


def _rotate_cw(dx: int, dy: int, times: int) -> tuple[int, int]:
    for _ in range(times % 4):
        dx, dy = dy, -dx
    return dx, dy


@lru_cache(maxsize=None)
def window_offsets(heading: int) -> tuple[tuple[int, int], ...]:
    """World offsets of the nine perception slots for a robot facing ``heading``."""
    return tuple(_rotate_cw(dx, dy, heading) for dx, dy in _NORTH_OFFSETS)


def relative_heading(heading: int, slot: int) -> int:
    """World heading pointing from the centre towards orthogonal ``slot``."""
    return (heading + {FRONT: 0, RIGHT: 1, REAR: 2, LEFT: 3}[slot]) % 4


@dataclass(frozen=True, slots=True)
class Perception:
    """3x3 occupancy window in the robot's heading frame; bit ``i`` is slot ``i``."""

    bits: int

    @classmethod
    def from_slots(cls, slots: Iterable[bool]) -> "Perception":
        bits = 0
        for i, v in enumerate(slots):
            if v:
                bits |= 1 << i
        return cls(bits)

    @classmethod
    def from_names(cls, *names: str) -> "Perception":
        return cls.from_slots(name in names for name in SLOT_NAMES)

    def __getitem__(self, slot: int) -> bool:
        return bool(self.bits >> slot & 1)

    @property
    def front(self) -> bool:
        return self[FRONT]

    @property
    def left(self) -> bool:
        return self[LEFT]

    @property
    def right(self) -> bool:
        return self[RIGHT]

    @property
    def rear(self) -> bool:
        return self[REAR]

    @property
    def center(self) -> bool:
        return self[CENTER]

    @property
    def ring(self) -> int:
        return self.bits & 0xFF

    def rotated(self, quarter_turns: int) -> "Perception":
        """View of the same window after the robot turns right ``quarter_turns`` times."""
        k = (2 * quarter_turns) % 8
        ring = ((self.ring << k) | (self.ring >> (8 - k))) & 0xFF if k else self.ring
        return Perception(ring | (self.bits & 0x100))

    def as_grid(self) -> list[list[bool]]:
        """Rows front-to-rear, columns left-to-right, in the robot frame."""
        return [[self[FRONT_LEFT], self[FRONT], self[FRONT_RIGHT]],
                [self[LEFT], self[CENTER], self[RIGHT]],
                [self[REAR_LEFT], self[REAR], self[REAR_RIGHT]]]


def perceive(contains, position, heading: int) -> Perception:
    """Sample ``contains(cell)`` around ``position`` for a robot facing ``heading``."""
    x, y = position
    bits = 0
    for i, (dx, dy) in enumerate(window_offsets(heading)):
        if contains((x + dx, y + dy)):
            bits |= 1 << i
    return Perception(bits)


@lru_cache(maxsize=None)
def _critical_ring(ring: int) -> bool:
    # Contaminated ring cells form cyclic runs; consecutive ring slots share an
    # edge, non-consecutive ones do not. A run reaches the centre only through
    # one of its orthogonal slots.
    if ring == 0xFF:
        return False
    start = next(i for i in range(8) if not ring >> i & 1)
    runs = 0
    touching = False
    for k in range(1, 9):
        i = (start + k) % 8
        if ring >> i & 1:
            if i % 2 == 0:
                touching = True
        else:
            if touching:
                runs += 1
            touching = False
    return runs >= 2


def is_critical(p: Perception) -> bool:
    """True when removing the centre splits contaminated window cells it connected."""
    if not p.center:
        raise ValueError("criticality is only defined for a contaminated centre")
    return _critical_ring(p.ring)


# ---------------------------------------------------------------------------
# Boundary polygon


class Atom(NamedTuple):
    kind: str  # "E" border edge, "L" left turn, "R" right turn
    x: int     # vertex coordinates (edge: start vertex)
    y: int
    heading: int  # edge direction; for turns the outgoing direction


@dataclass(frozen=True)
class GridPolygon:
    atoms: tuple[Atom, ...]

    @property
    def length(self) -> int:
        return sum(1 for a in self.atoms if a.kind == "E")

    @property
    def right_turns(self) -> int:
        return sum(1 for a in self.atoms if a.kind == "R")

    @property
    def left_turns(self) -> int:
        return sum(1 for a in self.atoms if a.kind == "L")

    def turn_sequence(self) -> str:
        return "".join(a.kind for a in self.atoms if a.kind != "E")

    def has_u_turn(self) -> bool:
        """Two left turns separated only by border edges fold a chain back."""
        turns = self.turn_sequence()
        if not turns:
            return False
        return "LL" in turns + turns[0]


def _trace_boundary(filled: np.ndarray, x0: int, y0: int) -> tuple[Atom, ...]:
    """Clockwise trace of the boundary of the 4-connected set ``filled``."""
    h, w = filled.shape
    rows = filled.tolist()

    def inside(cx: int, cy: int) -> bool:
        return 0 <= cy < h and 0 <= cx < w and rows[cy][cx]

    top = h - 1
    while not any(rows[top]):
        top -= 1
    left = rows[top].index(True)
    # start at the top-left vertex of the top-left cell, arriving northward
    start = (left, top + 1, N)
    vx, vy, d = start
    atoms: list[Atom] = []
    # vertex (vx, vy) is the lower-left corner of cell (vx, vy)
    ahead = {
        # heading: (ahead-right cell offset, ahead-left cell offset) from vertex
        N: ((0, 0), (-1, 0)),
        E: ((0, -1), (0, 0)),
        S: ((-1, -1), (0, -1)),
        W: ((-1, 0), (-1, -1)),
    }
    while True:
        (rx, ry), (lx, ly) = ahead[d]
        if inside(vx + lx, vy + ly) and inside(vx + rx, vy + ry):
            nd = (d - 1) % 4
            atoms.append(Atom("L", vx + x0, vy + y0, nd))
        elif inside(vx + rx, vy + ry):
            nd = d
        else:
            nd = (d + 1) % 4
            atoms.append(Atom("R", vx + x0, vy + y0, nd))
        d = nd
        atoms.append(Atom("E", vx + x0, vy + y0, d))
        dx, dy = DELTA[d]
        vx, vy = vx + dx, vy + dy
        if (vx, vy, d) == start:
            break
    # rotate so the sequence begins with the first atom emitted at the start vertex
    return tuple(atoms)


def outer_polygon(c: Contamination) -> GridPolygon:
    """Clockwise atom sequence of the outer boundary of a connected contamination."""
    if c.is_empty:
        raise ValueError("empty contamination has no boundary")
    if not c.connected:
        raise ValueError("outer_polygon requires a 4-connected contamination")
    return GridPolygon(_trace_boundary(c.filled, c.min_x, c.min_y))


def validate_class_c(c: Contamination) -> tuple[bool, str]:
    """Class-C membership test; returns ``(ok, diagnostic)``.

    Checked in order: non-empty, 4-connected, every hole a fully enclosed
    rectangle, and an outer boundary without U-turns (four monotone chains).
    """
    if c.is_empty:
        return False, "empty contamination"
    if not c.connected:
        return False, f"not 4-connected ({c.component_count} components)"
    for hole in c.holes:
        if not hole.rectangular:
            return False, f"hole at ({hole.min_x}, {hole.min_y}) is not rectangular"
        if not hole.enclosed:
            return False, f"hole at ({hole.min_x}, {hole.min_y}) is not enclosed by contaminated cells"
    poly = GridPolygon(_trace_boundary(c.filled, c.min_x, c.min_y))
    if poly.has_u_turn():
        return False, "outer boundary contains a U-turn (chains not monotone)"
    return True, "ok"


def is_class_c(c: Contamination) -> bool:
    return validate_class_c(c)[0]


def layer_of(cell, bb: BoundingBox) -> int:
    """Ring index of ``cell`` inside ``bb``; cells touching the box are layer 1."""
    if cell not in bb:
        raise ValueError(f"cell {tuple(cell)} lies outside the bounding box")
    x, y = cell
    return 1 + min(x - bb.min_x, bb.max_x - x, y - bb.min_y, bb.max_y - y)


def layer_array(shape: tuple[int, int]) -> np.ndarray:
    """Layer numbers for every cell of a box of ``shape`` (rows, cols)."""
    h, w = shape
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    return 1 + np.minimum(np.minimum(ys, h - 1 - ys), np.minimum(xs, w - 1 - xs))


def ears(c: Contamination) -> dict[str, tuple[Cell, ...]]:
    """North/east/south/west ears: contaminated cells on each side of the box."""
    if c.is_empty:
        return {}
    g = c.grid
    h, w = g.shape
    lines = {
        "N": [Cell(c.min_x + j, c.min_y + h - 1) for j in range(w) if g[h - 1, j]],
        "E": [Cell(c.min_x + w - 1, c.min_y + i) for i in range(h) if g[i, w - 1]],
        "S": [Cell(c.min_x + j, c.min_y) for j in range(w) if g[0, j]],
        "W": [Cell(c.min_x, c.min_y + i) for i in range(h) if g[i, 0]],
    }
    out = {}
    for side, cells in lines.items():
        coords = [cell.x if side in "NS" else cell.y for cell in cells]
        if coords[-1] - coords[0] + 1 != len(coords):
            raise ValueError(f"more than one {side} ear; contamination is not class C")
        out[side] = tuple(cells)
    return out


def is_tail(c: Contamination, cell) -> bool:
    """Contaminated cell with at least three border edges."""
    if cell not in c:
        raise ValueError(f"cell {tuple(cell)} is not contaminated")
    return c.border_edge_count(cell) >= 3


def circumference(c: Contamination) -> int:
    ok, why = validate_class_c(c)
    if not ok:
        raise ValueError(f"circumference formula needs a class-C contamination: {why}")
    return 2 * c.width + 2 * c.height - 4


def max_hole_short_side(c: Contamination) -> int:
    return max((hole.short_side for hole in c.holes), default=0)

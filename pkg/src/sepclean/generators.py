"""Seeded construction of test contaminations.

Random class-C instances are built row by row: the west ends of the rows form
a valley (non-increasing, then non-decreasing going north) touching column 0,
the east ends form a peak touching column ``w - 1``, and consecutive rows
overlap. That gives four monotone chains between the extreme edges of the box.
Rectangular holes are then carved with a contaminated ring around each one,
no two holes closer than one cell (including diagonally).

The distribution is whatever this construction produces; it is not uniform
over class C.

Randomness comes from :class:`Rng`, which only draws ``random.Random.random()``
so streams stay bit-identical across Python versions and platforms.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import asdict, dataclass, replace
from typing import Iterator

import numpy as np

from .dynamics import spread_times
from .grid_core import Cell, Contamination, validate_class_c

FAMILIES = ("random_class_c", "rectangle", "diamond", "strip", "plus")


class GenerationError(ValueError):
    pass


class Rng:
    """Mersenne Twister seeded with a 64-bit integer; integers via ``floor(u * n)``."""

    def __init__(self, seed: int):
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self._r = random.Random(self.seed)

    def uniform(self) -> float:
        return self._r.random()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]`` inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + min(int(self._r.random() * (hi - lo + 1)), hi - lo)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    target_h: int = 5
    target_w: int = 5
    hole_count: int = 0
    max_hole_side: int = 1
    shape_family: str = "random_class_c"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Instance:
    contamination: Contamination
    start: Cell
    spec: GenSpec | None = None


def _valley(rng: Rng, h: int, span: int, max_step: int) -> list[int]:
    """Row offsets >= 0 with a zero somewhere, non-increasing then non-decreasing."""
    lo = rng.randint(0, h - 1)
    hi = rng.randint(lo, min(h - 1, lo + rng.randint(0, h - 1)))
    vals = [0] * h
    for y in range(hi + 1, h):
        vals[y] = min(span, vals[y - 1] + rng.randint(0, max_step))
    for y in range(lo - 1, -1, -1):
        vals[y] = min(span, vals[y + 1] + rng.randint(0, max_step))
    return vals


def _random_outline(rng: Rng, h: int, w: int) -> np.ndarray:
    """Orthogonally convex, 4-connected shape spanning exactly ``h`` x ``w``."""
    if h == 1 or w == 1:
        return np.ones((h, w), dtype=bool)
    max_step = max(1, (2 * w) // h)
    for _ in range(200):
        west = _valley(rng, h, w - 1, max_step)
        east = [w - 1 - v for v in _valley(rng, h, w - 1, max_step)]
        ok = all(west[y] <= east[y] for y in range(h)) and all(
            west[y + 1] <= east[y] and west[y] <= east[y + 1] for y in range(h - 1))
        if ok:
            grid = np.zeros((h, w), dtype=bool)
            for y in range(h):
                grid[y, west[y]:east[y] + 1] = True
            return grid
        max_step = max(1, max_step - 1) if rng.uniform() < 0.3 else max_step
    return np.ones((h, w), dtype=bool)


def _carve_holes(rng: Rng, grid: np.ndarray, count: int, max_side: int) -> np.ndarray:
    h, w = grid.shape
    grid = grid.copy()
    blocked = np.zeros_like(grid)  # cells within Chebyshev distance 1 of a hole
    for index in range(count):
        placed = False
        for _ in range(400):
            hw = rng.randint(1, max_side)
            hh = rng.randint(1, max_side)
            if hw + 2 > w or hh + 2 > h:
                continue
            x0 = rng.randint(1, w - hw - 1)
            y0 = rng.randint(1, h - hh - 1)
            ring = (slice(y0 - 1, y0 + hh + 1), slice(x0 - 1, x0 + hw + 1))
            if not grid[ring].all() or blocked[y0:y0 + hh, x0:x0 + hw].any():
                continue
            grid[y0:y0 + hh, x0:x0 + hw] = False
            blocked[ring] = True
            placed = True
            break
        if not placed:
            raise GenerationError(
                f"could not place hole {index + 1} of {count} (max side {max_side}) in a {h}x{w} box")
    return grid


def _random_class_c(spec: GenSpec, rng: Rng) -> Contamination:
    grid = _random_outline(rng, spec.target_h, spec.target_w)
    if spec.hole_count:
        grid = _carve_holes(rng, grid, spec.hole_count, spec.max_hole_side)
    return Contamination(grid)


def generate(spec: GenSpec) -> Instance:
    """Build the contamination described by ``spec`` plus a contaminated start cell."""
    if spec.target_h < 1 or spec.target_w < 1:
        raise ValueError("target dimensions must be positive")
    if spec.hole_count < 0 or spec.max_hole_side < 1:
        raise ValueError("hole parameters out of range")
    rng = Rng(spec.seed)
    family = spec.shape_family
    h, w = spec.target_h, spec.target_w
    if family == "random_class_c":
        c = _random_class_c(spec, rng)
        start = rng.choice(c.sorted_cells())
    elif family == "rectangle":
        c = Contamination.rectangle(w, h)
        start = rng.choice(c.sorted_cells())
    elif family == "diamond":
        if h != w or h % 2 == 0:
            raise ValueError("diamond needs an odd square target (2k+1)")
        k = (h - 1) // 2
        c = spread_times(Contamination.from_cells([(k, k)]), k)
        start = Cell(k, k)
    elif family == "strip":
        if h != 1:
            raise ValueError("strip needs target_h == 1")
        c = Contamination.rectangle(w, 1)
        # one cell west of the start, the remaining l + 1 cells to the east
        start = Cell(1 if w > 1 else 0, 0)
    elif family == "plus":
        grid = np.zeros((h, w), dtype=bool)
        grid[h // 2, :] = True
        grid[:, w // 2] = True
        c = Contamination(grid)
        start = Cell(w // 2, h // 2)
    else:
        raise ValueError(f"unknown shape family {family!r}")
    if spec.hole_count and family != "random_class_c":
        raise ValueError(f"family {family!r} does not take holes")
    ok, why = validate_class_c(c)
    if not ok:
        raise GenerationError(f"generator produced a non-class-C instance: {why}")
    return Instance(c, Cell(*start), spec)


def derived_seed(seed: int, attempt: int) -> int:
    """Seed for retry number ``attempt`` (attempt 0 is ``seed`` itself)."""
    return (seed + attempt * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF


def generate_retrying(spec: GenSpec, attempts: int = 64) -> Instance:
    """Like :func:`generate`, moving on to derived seeds when hole placement fails.

    The returned instance's ``spec`` carries the seed that worked.
    """
    last = None
    for attempt in range(attempts):
        trial = replace(spec, seed=derived_seed(spec.seed, attempt))
        try:
            return generate(trial)
        except GenerationError as exc:
            last = exc
    raise GenerationError(f"gave up after {attempts} attempts: {last}")


def strip_spec(l: int) -> GenSpec:
    """Single row of ``l + 2`` cells with the start one cell in from the west end."""
    return GenSpec(target_h=1, target_w=l + 2, shape_family="strip")


# ---------------------------------------------------------------------------
# exhaustive enumeration

MAX_EXHAUSTIVE_CELLS = 16


def _full_box_subsets(h: int, w: int) -> Iterator[np.ndarray]:
    n = h * w
    masks = (np.arange(1, 1 << n)[:, None] >> np.arange(n)) & 1
    boxes = masks.astype(bool).reshape(-1, h, w)
    full = (boxes[:, 0, :].any(axis=1) & boxes[:, -1, :].any(axis=1)
            & boxes[:, :, 0].any(axis=1) & boxes[:, :, -1].any(axis=1))
    yield from boxes[full]


def enumerate_small_class_c(max_h: int, max_w: int, max_holes: int = 0) -> Iterator[Contamination]:
    """Every class-C contamination fitting in ``max_h`` x ``max_w``, anchored at the origin.

    Each shape appears once (translation is fixed by anchoring its box at
    (0, 0)). Ordered by (height, width, bitmask).
    """
    if max_h < 1 or max_w < 1:
        raise ValueError("bounds must be positive")
    if max_h * max_w > MAX_EXHAUSTIVE_CELLS:
        raise ValueError(
            f"exhaustive enumeration refused for {max_h}x{max_w} (> {MAX_EXHAUSTIVE_CELLS} cells)")
    for h, w in itertools.product(range(1, max_h + 1), range(1, max_w + 1)):
        for bits in _full_box_subsets(h, w):
            c = Contamination(bits)
            if len(c.holes) > max_holes:
                continue
            if validate_class_c(c)[0]:
                yield c

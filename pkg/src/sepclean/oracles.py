"""Slow, independent reference computations and closed-form bounds.

Everything here avoids the fast paths in :mod:`grid_core` on purpose so the
two can be compared in tests. The bound calculators are also used by the
command line to judge run summaries.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Iterator

from .grid_core import CENTER, DELTA, Contamination, Perception, window_offsets


def _cellset(c) -> set[tuple[int, int]]:
    if isinstance(c, Contamination):
        return {(int(x), int(y)) for x, y in c.cells}
    return {(int(x), int(y)) for x, y in c}


def _components(cells: set) -> list[set]:
    seen, comps = set(), []
    for s in sorted(cells):
        if s in seen:
            continue
        comp = {s}
        queue = deque([s])
        seen.add(s)
        while queue:
            x, y = queue.popleft()
            for dx, dy in DELTA:
                n = (x + dx, y + dy)
                if n in cells and n not in seen:
                    seen.add(n)
                    comp.add(n)
                    queue.append(n)
        comps.append(comp)
    return comps


def bf_connected(c) -> bool:
    """Flood fill; the empty set counts as connected."""
    return len(_components(_cellset(c))) <= 1


def bf_critical_window(p: Perception) -> bool:
    """Window-only test: does removing the centre split its window component?"""
    if not p[CENTER]:
        raise ValueError("centre must be contaminated")
    offsets = window_offsets(0)
    cells = {offsets[i] for i in range(9) if p[i]}
    comp = next(comp for comp in _components(cells) if (0, 0) in comp)
    return len(_components(comp - {(0, 0)})) >= 2


def bf_critical(c, cell) -> bool:
    x, y = cell
    cells = _cellset(c)
    if (x, y) not in cells:
        raise ValueError("cell must be contaminated")
    bits = 0
    for i, (dx, dy) in enumerate(window_offsets(0)):
        if (x + dx, y + dy) in cells:
            bits |= 1 << i
    return bf_critical_window(Perception(bits))


def orthogonally_convex(c: Contamination) -> bool:
    """Every row and column of the hole-filled shape is one contiguous run."""
    f = c.filled
    for line in list(f) + list(f.T):
        idx = [i for i, v in enumerate(line) if v]
        if idx and idx[-1] - idx[0] + 1 != len(idx):
            return False
    return True


def bf_layers(height: int, width: int) -> list[list[int]]:
    """Layer numbers by peeling the outer ring of the box repeatedly (row 0 is south)."""
    layer = [[0] * width for _ in range(height)]
    remaining = {(x, y) for x in range(width) for y in range(height)}
    k = 0
    while remaining:
        k += 1
        xs = [x for x, _ in remaining]
        ys = [y for _, y in remaining]
        ring = {(x, y) for x, y in remaining
                if x in (min(xs), max(xs)) or y in (min(ys), max(ys))}
        for x, y in ring:
            layer[y][x] = k
        remaining -= ring
    return layer


def outer_border_cells(c: Contamination) -> set[tuple[int, int]]:
    """Contaminated cells sharing an edge with the unbounded clean region."""
    cells = _cellset(c)
    if not cells:
        return set()
    xs = [x for x, _ in cells]
    ys = [y for _, y in cells]
    lo_x, hi_x, lo_y, hi_y = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    outside = {(lo_x, lo_y)}
    queue = deque(outside)
    while queue:
        x, y = queue.popleft()
        for dx, dy in DELTA:
            n = (x + dx, y + dy)
            if lo_x <= n[0] <= hi_x and lo_y <= n[1] <= hi_y and n not in cells and n not in outside:
                outside.add(n)
                queue.append(n)
    return {(x, y) for x, y in cells
            if any((x + dx, y + dy) in outside for dx, dy in DELTA)}


def bf_circumference(c: Contamination, max_border_cells: int = 18) -> int:
    """Shortest closed walk over contaminated cells visiting every outer border cell."""
    cells = _cellset(c)
    border = sorted(outer_border_cells(c))
    if not border:
        raise ValueError("empty contamination")
    if len(border) > max_border_cells:
        raise ValueError(f"{len(border)} border cells is too many for exhaustive search")
    index = {cell: i for i, cell in enumerate(border)}
    full = (1 << len(border)) - 1
    start = border[0]
    init = (start, 1)
    if init[1] == full:
        return 0
    dist = {init: 0}
    queue = deque([init])
    while queue:
        pos, mask = queue.popleft()
        step = dist[(pos, mask)] + 1
        for dx, dy in DELTA:
            n = (pos[0] + dx, pos[1] + dy)
            if n not in cells:
                continue
            m = mask | (1 << index[n]) if n in index else mask
            if n == start and m == full:
                return step
            if (n, m) not in dist:
                dist[(n, m)] = step
                queue.append((n, m))
    raise ValueError("contamination is not connected")


def enumerate_polyominoes(max_cells: int) -> Iterator[frozenset]:
    """Fixed polyominoes up to ``max_cells`` cells by growth, normalised to min x = min y = 0."""
    if max_cells < 1:
        return

    def norm(cells) -> frozenset:
        mx = min(x for x, _ in cells)
        my = min(y for _, y in cells)
        return frozenset((x - mx, y - my) for x, y in cells)

    level = {frozenset({(0, 0)})}
    for n in range(1, max_cells + 1):
        yield from sorted(level, key=sorted)
        if n == max_cells:
            break
        grown = set()
        for poly in level:
            for x, y in poly:
                for dx, dy in DELTA:
                    nb = (x + dx, y + dy)
                    if nb not in poly:
                        grown.add(norm(poly | {nb}))
        level = grown


def bf_spread(cells: Iterable) -> set[tuple[int, int]]:
    cells = _cellset(cells)
    return cells | {(x + dx, y + dy) for x, y in cells for dx, dy in DELTA}


# ---------------------------------------------------------------------------
# closed-form bounds


def sep_speed_threshold(h: int, w: int) -> int:
    """Smallest spread period for which SEP is guaranteed to clean an h x w class-C instance."""
    if h < 1 or w < 1:
        raise ValueError("h and w must be positive")
    return 3 * (h + w) + 6


def sep_step_bound(h: int, w: int, lam: int, d: int) -> int:
    """Guaranteed step budget for SEP; odd ``lam`` is rounded up."""
    if h < 1 or w < 1 or lam < 0 or d < 1:
        raise ValueError("arguments out of range")
    return (math.ceil(lam / 2) + h + w + 5) * d


def square_lower_bound(h: int) -> float:
    """Below this spread period no strategy can clean an h x h square."""
    if h < 1:
        raise ValueError("h must be positive")
    return 2 * math.sqrt(2) * h - 4


def square_counting_holds(h: int, d: int) -> bool:
    """After d cleanings of an h x h square, one spread adds more than d cells."""
    remaining = h * h - d
    if remaining < 1:
        return False
    return 2 * math.sqrt(2 * remaining - 1) > d


def square_counting_integer_form(h: int, d: int) -> bool:
    return 8 * h * h + 12 > (d + 4) ** 2


def square_excluded_speeds(h: int) -> range:
    """Positive integer periods strictly below ``ceil(2*sqrt(2)*h) - 4``."""
    return range(1, max(1, math.ceil(2 * math.sqrt(2) * h) - 4))


def greedy_lower_bound(w: int, h: int = 1) -> int:
    """Below this spread period the greedy strategy fails on the strip of width w."""
    return 4 * (w + h) - 16


def greedy_counting_holds(l: int, d: int) -> bool:
    return 16 * l * l + 16 * l + 20 > (d + 4) ** 2

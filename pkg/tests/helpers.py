"""Shared test utilities: a lightweight SEP walker over a plain cell set."""

from sepclean.dynamics import spread
from sepclean.grid_core import Contamination, perceive
from sepclean.strategy_sep import BOUNDARY, detect_spread, initial_state, sep_step


def grid(text: str) -> Contamination:
    """Rows top (north) to bottom; '#' contaminated."""
    rows = text.strip().splitlines()
    return Contamination.from_cells(
        (x, len(rows) - 1 - i) for i, r in enumerate(rows) for x, ch in enumerate(r.strip()) if ch == "#")


def walk_without_spreads(c0: Contamination, start, heading: int = 0, limit: int | None = None):
    """Run SEP with spreads disabled; yield ``(cells, state, perception)`` before every step."""
    cells = set(c0.cells)
    state = initial_state(start, heading)
    limit = limit or 8 * (c0.width + c0.height) * max(c0.count, 1)
    for t in range(limit):
        p = perceive(cells.__contains__, state.position, state.heading)
        yield cells, state, p
        state_next, action = sep_step(state, p, False, t == 0)
        if action.clean:
            cells.discard(tuple(state.position))
        if action.terminate or not cells:
            return
        state = state_next


def boundary_situations(c0: Contamination, start, heading: int = 0):
    """Every boundary-mode pose reached without spreads, as ``(contamination, state, perception)``."""
    for cells, state, p in walk_without_spreads(c0, start, heading):
        if state.mode == BOUNDARY and p.ring:
            yield Contamination.from_cells(cells), state, p


def quick_search_after_spread(c: Contamination, state, before, max_steps: int = 10):
    """Spread ``c`` under a robot in boundary mode; return steps until boundary mode resumes.

    The poses visited are returned as well so callers can check they stay contaminated.
    """
    d = spread(c)
    cells = d.cells
    p = perceive(cells.__contains__, state.position, state.heading)
    detected = detect_spread(before, p)
    s, poses = state, []
    for n in range(max_steps):
        s, _ = sep_step(s, p, detected and n == 0, False, prev=before)
        if s.mode == BOUNDARY:
            return n, poses
        poses.append(s.position)
        p = perceive(cells.__contains__, s.position, s.heading)
    return None, poses


# criterion number -> (passed, detail); filled by the acceptance suite, printed by conftest
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def report(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[criterion] = (passed, detail)
    print(f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}")

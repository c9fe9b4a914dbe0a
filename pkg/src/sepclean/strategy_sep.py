"""Smart Edge Peeling as a pure transition function.

``sep_step(state, perception, ...)`` returns the next :class:`RobotState` and
the :class:`Action` executed during the time step. Turns happen first, then
the criticality flag update, then cleaning, then the forward move.

Quick search replaces the full reset when a spread is noticed in boundary
mode. The robot remembers the window it saw before the spread (8 bits). It
walks a short hard-coded path towards the side that was clean before the
spread, short-cutting towards any diagonal cell that is clean now, and stops
as soon as a 4-neighbour is clean. It then faces so that this cell is on its
left and resumes boundary following in the same step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .grid_core import (
    DELTA, FRONT, FRONT_LEFT, FRONT_RIGHT, LEFT, REAR, REAR_LEFT,
    REAR_RIGHT, RIGHT, N, Cell, Perception, is_critical,
)

SEARCH, BOUNDARY, QUICK_SEARCH = "search", "boundary", "quick_search"
MODES = (SEARCH, BOUNDARY, QUICK_SEARCH)
QUICK_SEARCH_LIMIT = 3

# relative directions as quarter turns to the right
_REL = {"F": 0, "R": 1, "B": 2, "L": 3}
_FACE = {0: (), 1: ("R",), 2: ("R", "R"), 3: ("L",)}

# first moves of quick search, keyed by the first pre-spread slot that was clean
_PLANS = (
    (LEFT, "L"),
    (REAR_LEFT, "LB"),
    (FRONT_LEFT, "LF"),
    (FRONT, "F"),
    (REAR, "B"),
    (FRONT_RIGHT, "FR"),
    (RIGHT, "R"),
    (REAR_RIGHT, "BR"),
)
# a clean diagonal is approached along the front/rear axis of the spread-time heading
_DIAGONAL_APPROACH = ((FRONT_LEFT, "F"), (REAR_LEFT, "B"), (FRONT_RIGHT, "F"), (REAR_RIGHT, "B"))


class ProtocolViolation(RuntimeError):
    """The simulator handed the strategy an impossible situation."""


class QuickSearchError(ProtocolViolation):
    """No clean 4-neighbour within three quick-search steps."""


@dataclass(frozen=True)
class RobotState:
    position: Cell
    heading: int = N
    mode: str = SEARCH
    bearing_counter: int = 0
    critical_cell_passed: bool = True
    last_turn_was_right: bool = False
    quick_search_step: int = 0
    qs_heading: int = N
    qs_plan: str = ""

    def __post_init__(self):
        if not isinstance(self.position, Cell):
            object.__setattr__(self, "position", Cell(*self.position))

    def fsm_memory(self) -> tuple:
        """Everything except the pose; drawn from finite domains."""
        return (self.mode, self.bearing_counter, self.critical_cell_passed,
                self.last_turn_was_right, self.quick_search_step, self.qs_heading, self.qs_plan)


@dataclass(frozen=True)
class Action:
    turns: tuple[str, ...] = ()
    clean: bool = False
    move: bool = False
    terminate: bool = False
    # world-frame displacement for moves that are not "forward" (greedy diagonals)
    offset: tuple[int, int] | None = None

    @property
    def net_rotation(self) -> int:
        return sum(1 if t == "R" else -1 for t in self.turns) % 4

    def encode(self) -> str:
        s = "".join(self.turns) or "-"
        s += "c" if self.clean else ""
        if self.offset is not None:
            s += f"m{self.offset[0]:+d}{self.offset[1]:+d}"
        elif self.move:
            s += "m"
        return s + ("t" if self.terminate else "")


def apply_action(position, heading: int, action: Action) -> tuple[Cell, int]:
    """Pose after executing ``action``; cleaning is handled by the caller."""
    heading = (heading + action.net_rotation) % 4
    x, y = position
    if action.offset is not None:
        x, y = x + action.offset[0], y + action.offset[1]
    elif action.move:
        dx, dy = DELTA[heading]
        x, y = x + dx, y + dy
    return Cell(x, y), heading


def initial_state(start, heading: int = N) -> RobotState:
    return RobotState(position=Cell(*start), heading=heading)


def detect_spread(prev: Perception, cur: Perception) -> bool:
    """Some cell that was clean in ``prev`` is contaminated in ``cur``."""
    return bool(cur.bits & ~prev.bits & 0x1FF)


def _reset(state: RobotState) -> RobotState:
    return replace(state, last_turn_was_right=False, bearing_counter=0, mode=SEARCH,
                   critical_cell_passed=True, quick_search_step=0, qs_plan="")


class _Turner:
    """Accumulates quarter turns and keeps the automatically maintained variables."""

    def __init__(self, state: RobotState, p: Perception):
        self.state = state
        self.p = p  # perception in the frame of the current heading
        self.turns: list[str] = []

    def turn(self, direction: str) -> None:
        s = self.state
        q = 1 if direction == "R" else -1
        bearing = s.bearing_counter
        if s.mode == SEARCH:
            bearing += q
            if bearing < 0:
                raise ProtocolViolation("left turn at bearing 0 in search mode")
            bearing = min(bearing, 2)
        self.state = replace(s, heading=(s.heading + q) % 4, bearing_counter=bearing,
                             last_turn_was_right=(direction == "R"))
        self.p = self.p.rotated(q)
        self.turns.append(direction)


def _boundary_block1(t: _Turner) -> None:
    p = t.p
    if p.left:
        t.turn("L")
    elif p.front:
        pass
    elif p.right:
        t.turn("R")
        t.state = replace(t.state, critical_cell_passed=False)
    elif p.rear:
        t.turn("R")
        t.turn("R")
        t.state = replace(t.state, critical_cell_passed=False)


def _block2(t: _Turner) -> tuple[RobotState, bool]:
    s = t.state
    p = t.p
    if is_critical(p):
        s = replace(s, critical_cell_passed=True)
    clean = False
    if s.mode == BOUNDARY:
        if s.last_turn_was_right and not s.critical_cell_passed:
            clean = True
        elif _in_tail(p):
            clean = True
    return s, clean


def _in_tail(p: Perception) -> bool:
    return (p.front + p.left + p.rear + p.right) <= 1


def _finish(s: RobotState, turns, clean: bool) -> tuple[RobotState, Action]:
    dx, dy = DELTA[s.heading]
    pos = Cell(s.position.x + dx, s.position.y + dy)
    return replace(s, position=pos), Action(turns=tuple(turns), clean=clean, move=True)


def sep_step(state: RobotState, p: Perception, spread_detected: bool, first_step: bool,
             prev: Perception | None = None) -> tuple[RobotState, Action]:
    """One time step of the SEP automaton.

    ``prev`` is the window seen at the same pose before the step (needed to
    plan a quick search).
    """
    if not p.center:
        raise ProtocolViolation(f"robot at {tuple(state.position)} stands on a clean cell")
    s = state
    if first_step or (spread_detected and s.mode != BOUNDARY):
        s = _reset(s)
    elif spread_detected:
        s = _enter_quick_search(s, prev if prev is not None else p)

    if p.ring == 0:
        return s, Action(clean=True, terminate=True)

    if s.mode == QUICK_SEARCH:
        return quick_search_step(s, p)

    t = _Turner(s, p)
    if s.mode == SEARCH and s.bearing_counter == 0:
        if p.front:
            pass
        elif p.right:
            t.turn("R")
        elif p.rear:
            t.turn("R")
            t.turn("R")
            t.state = replace(t.state, mode=BOUNDARY, critical_cell_passed=False)
        elif p.left:
            t.turn("R")
            t.turn("R")
            t.turn("R")
            t.state = replace(t.state, mode=BOUNDARY, critical_cell_passed=False)
    elif s.mode == SEARCH and s.bearing_counter == 1:
        if p.left:
            t.turn("L")
        elif p.front:
            pass
        elif p.right:
            t.turn("R")
            t.state = replace(t.state, mode=BOUNDARY, critical_cell_passed=False)
        elif p.rear:
            t.turn("R")
            t.turn("R")
            t.state = replace(t.state, mode=BOUNDARY, critical_cell_passed=False)
    elif s.mode == BOUNDARY:
        _boundary_block1(t)
    else:
        raise ProtocolViolation(f"bad state {s.mode} / bearing {s.bearing_counter}")
    if t.state.mode == SEARCH and t.state.bearing_counter >= 2:
        t.state = replace(t.state, mode=BOUNDARY, critical_cell_passed=False)

    s, clean = _block2(t)
    return _finish(s, t.turns, clean)


def _enter_quick_search(s: RobotState, before: Perception) -> RobotState:
    plan = next((moves for slot, moves in _PLANS if not before[slot]), "L")
    return replace(s, mode=QUICK_SEARCH, quick_search_step=0, qs_heading=s.heading, qs_plan=plan)


def _slot_in_frame(p: Perception, heading: int, frame: int, slot: int) -> bool:
    """Read ``slot`` of the spread-time frame from a perception taken facing ``heading``."""
    return p.rotated((frame - heading) % 4)[slot]


def quick_search_step(state: RobotState, p: Perception) -> tuple[RobotState, Action]:
    """One step of quick search; re-enters boundary mode once a 4-neighbour is clean."""
    if state.mode != QUICK_SEARCH:
        raise ProtocolViolation("quick_search_step outside quick-search mode")
    if not p.center:
        raise ProtocolViolation("quick search on a clean cell")
    frame = state.qs_heading
    if not (p.front and p.left and p.rear and p.right):
        return _reenter_boundary(state, p)
    if state.quick_search_step >= QUICK_SEARCH_LIMIT:
        raise QuickSearchError(
            f"no clean 4-neighbour after {QUICK_SEARCH_LIMIT} quick-search steps at {tuple(state.position)}")
    move = next((rel for diag, rel in _DIAGONAL_APPROACH
                 if not _slot_in_frame(p, state.heading, frame, diag)), None)
    if move is None:
        plan = state.qs_plan or "L"
        move = plan[min(state.quick_search_step, len(plan) - 1)]
    target = (frame + _REL[move]) % 4
    t = _Turner(state, p)
    for d in _FACE[(target - state.heading) % 4]:
        t.turn(d)
    s = replace(t.state, quick_search_step=state.quick_search_step + 1)
    return _finish(s, t.turns, False)


def _reenter_boundary(state: RobotState, p: Perception) -> tuple[RobotState, Action]:
    frame = state.qs_heading
    options = [(frame + k) % 4 for k in (0, 1, 3, 2)]

    def view(h: int) -> Perception:
        return p.rotated((h - state.heading) % 4)

    with_left = [h for h in options if not view(h).left]
    preferred = [h for h in with_left if view(h).front]
    heading = (preferred or with_left)[0]
    t = _Turner(state, p)
    for d in _FACE[(heading - state.heading) % 4]:
        t.turn(d)
    beside_right_turn = not t.p.rear
    t.state = replace(t.state, mode=BOUNDARY, quick_search_step=0, qs_plan="",
                      last_turn_was_right=beside_right_turn, critical_cell_passed=not beside_right_turn)
    _boundary_block1(t)
    s, clean = _block2(t)
    turns = t.turns
    if len(turns) > 3:
        turns = list(_FACE[sum(1 if d == "R" else -1 for d in turns) % 4])
    return _finish(s, turns, clean)

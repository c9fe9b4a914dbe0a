"""Time-stepped episode loop.

At the start of step ``t`` (``t = 1, 2, ...``) the contamination spreads iff
``t % d == 0``; then the strategy senses its window and executes one action
(turns, optional clean, optional move). Episodes end when the robot reports
termination, the contamination is gone, the divergence detector fires, an
invariant is violated, or the step cap is hit.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import __version__
from .grid_core import (
    N, Cell, Contamination, Perception, is_critical, max_hole_short_side,
    validate_class_c, window_offsets,
)
from .strategy_greedy import greedy_step
from .strategy_sep import (
    BOUNDARY, ProtocolViolation, SEARCH, Action, RobotState, apply_action,
    detect_spread, initial_state, sep_step,
)

log = logging.getLogger(__name__)

CLEANED, DIVERGED, STEP_CAP, INVARIANT_VIOLATION = "cleaned", "diverged", "step_cap", "invariant_violation"
OUTCOMES = (CLEANED, DIVERGED, STEP_CAP, INVARIANT_VIOLATION)
EXIT_CODES = {CLEANED: 0, DIVERGED: 2, STEP_CAP: 3, INVARIANT_VIOLATION: 4}
CHECK_LEVELS = ("off", "cheap", "full")
STRATEGIES = ("sep", "greedy")
TRACE_FORMAT = "sepclean-trace/1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    d: int
    max_steps: int = 200_000
    strategy: str = "sep"
    record_frames: bool = False
    invariant_checks: str = "off"
    seed: int | None = None
    divergence_phases: int = 3
    initial_heading: int = N

    def __post_init__(self):
        if self.d <= 1:
            raise ConfigError("spread period d must be > 1")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.invariant_checks not in CHECK_LEVELS:
            raise ConfigError(f"unknown check level {self.invariant_checks!r}")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SimTrace:
    header: dict
    records: list[dict] = field(default_factory=list)
    outcome: str = STEP_CAP
    summary: dict = field(default_factory=dict)
    frames: list[str] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.records)


def instance_text(c: Contamination, start) -> str:
    from .trace_io import serialize_instance
    return serialize_instance(c, start)


def instance_digest(c: Contamination, start) -> str:
    """Hash of the instance text plus its absolute origin."""
    body = f"{c.min_x},{c.min_y}\n" + instance_text(c, start)
    return hashlib.sha256(body.encode()).hexdigest()


def divergence_detector(phase_end_counts: Sequence[int], phases: int = 3) -> bool:
    """True when the last ``phases`` spread phases each ended with more cells than the one before."""
    if phases <= 0 or len(phase_end_counts) < phases + 1:
        return False
    tail = phase_end_counts[-(phases + 1):]
    return all(b > a for a, b in zip(tail, tail[1:]))


class Field:
    """Mutable contamination owned by one episode: a bit grid with a clean margin."""

    MARGIN = 8

    def __init__(self, c: Contamination):
        self.grid = np.pad(c.grid, self.MARGIN)
        self.x0 = c.min_x - self.MARGIN
        self.y0 = c.min_y - self.MARGIN
        self.count = c.count
        self._weights = {}
        for h in range(4):
            w = np.zeros((3, 3), dtype=np.int64)
            for slot, (dx, dy) in enumerate(window_offsets(h)):
                w[dy + 1, dx + 1] = 1 << slot
            self._weights[h] = w

    def __contains__(self, cell) -> bool:
        i, j = cell[1] - self.y0, cell[0] - self.x0
        return 0 <= i < self.grid.shape[0] and 0 <= j < self.grid.shape[1] and bool(self.grid[i, j])

    def perceive(self, position, heading: int) -> Perception:
        i, j = position[1] - self.y0, position[0] - self.x0
        if not (1 <= i < self.grid.shape[0] - 1 and 1 <= j < self.grid.shape[1] - 1):
            self._regrow()
            i, j = position[1] - self.y0, position[0] - self.x0
        window = self.grid[i - 1:i + 2, j - 1:j + 2]
        return Perception(int(self._weights[heading][window].sum()))

    def clean(self, cell) -> bool:
        i, j = cell[1] - self.y0, cell[0] - self.x0
        if self.grid[i, j]:
            self.grid[i, j] = False
            self.count -= 1
            return True
        return False

    def _regrow(self) -> None:
        m = self.MARGIN
        self.grid = np.pad(self.grid, m)
        self.x0 -= m
        self.y0 -= m

    def spread(self) -> None:
        g = self.grid
        if g[0].any() or g[-1].any() or g[:, 0].any() or g[:, -1].any():
            self._regrow()
            g = self.grid
        out = g.copy()
        out[1:, :] |= g[:-1, :]
        out[:-1, :] |= g[1:, :]
        out[:, 1:] |= g[:, :-1]
        out[:, :-1] |= g[:, 1:]
        self.grid = out
        self.count = int(out.sum())

    def snapshot(self) -> Contamination:
        return Contamination(self.grid, self.x0, self.y0)


def _header(c0: Contamination, start, cfg: SimConfig) -> dict:
    empty = c0.is_empty
    return {
        "format": TRACE_FORMAT,
        "version": __version__,
        "instance_digest": instance_digest(c0, start),
        "instance": instance_text(c0, start),
        "origin": [0, 0] if empty else [c0.min_x, c0.min_y],
        "start": [int(start[0]), int(start[1])],
        "config": cfg.to_dict(),
        "h": 0 if empty else c0.height,
        "w": 0 if empty else c0.width,
        "lambda": 0 if empty else max_hole_short_side(c0),
        "cells": c0.count,
    }


def run_episode(c0: Contamination, start, cfg: SimConfig,
                frame_renderer: Callable[[Contamination, Cell, int], str] | None = None) -> SimTrace:
    """Simulate one episode and return its full trace."""
    start = Cell(int(start[0]), int(start[1]))
    if start not in c0:
        raise ConfigError(f"start cell {tuple(start)} is not contaminated")
    trace = SimTrace(header=_header(c0, start, cfg))
    if cfg.record_frames and frame_renderer is None:
        from .trace_io import render_frame as frame_renderer
    fld = Field(c0)
    state = initial_state(start, cfg.initial_heading)
    pos, heading = start, cfg.initial_heading
    checks = cfg.invariant_checks
    is_sep = cfg.strategy == "sep"

    stats = {
        "spreads": 0,
        "cells_cleaned": 0,
        "first_boundary_step": None,
        "search_time": None,
        "quick_search_durations": [],
        "undetected_boundary_spreads": 0,
        "phase_end_counts": [],
        "disconnection_steps": [],
        "violations": [],
        "max_bearing": 0,
    }
    holes_now = len(c0.holes) if checks == "full" else None
    last_view = fld.perceive(pos, heading)
    qs_started: int | None = None
    outcome = STEP_CAP
    connected = True

    def violation(t: int, what: str) -> None:
        stats["violations"].append({"t": t, "what": what})
        log.debug("t=%d invariant violation: %s", t, what)

    for t in range(1, cfg.max_steps + 1):
        spread_now = t % cfg.d == 0
        if spread_now:
            stats["phase_end_counts"].append(fld.count)
            fld.spread()
            stats["spreads"] += 1
            if checks == "full" and fld.count:
                snap = fld.snapshot()
                ok, why = validate_class_c(snap)
                if not ok and connected:
                    violation(t, f"after spread: {why}")
                n_holes = len(snap.holes)
                if holes_now is not None and n_holes > holes_now:
                    violation(t, f"hole count grew {holes_now} -> {n_holes}")
                holes_now = n_holes
            if divergence_detector(stats["phase_end_counts"], cfg.divergence_phases):
                outcome = DIVERGED
                break

        p = fld.perceive(pos, heading)
        detected = detect_spread(last_view, p)
        cleaned: list[list[int]] = []
        mode_before = state.mode if is_sep else None
        if is_sep:
            if detected and mode_before == BOUNDARY:
                qs_started = t
            elif spread_now and mode_before == BOUNDARY:
                stats["undetected_boundary_spreads"] += 1
            try:
                new_state, action = sep_step(state, p, detected, t == 1, prev=last_view)
            except ProtocolViolation as exc:
                violation(t, str(exc))
                outcome = INVARIANT_VIOLATION
                break
        else:
            action = greedy_step(pos, heading, p)
            new_state = None

        if action.clean and p.center:
            if checks != "off" and is_critical(p):
                violation(t, f"cleaned critical cell {tuple(pos)}")
            fld.clean(pos)
            cleaned.append([pos.x, pos.y])
            stats["cells_cleaned"] += 1
        new_pos, new_heading = apply_action(pos, heading, action)
        if is_sep and (new_pos, new_heading) != (new_state.position, new_state.heading):
            raise AssertionError("strategy pose and action disagree")

        if cleaned and checks == "full" and fld.count:
            snap = fld.snapshot()
            now_connected = snap.connected
            if not now_connected and connected:
                stats["disconnection_steps"].append(t)
            connected = now_connected
            if is_sep:
                ok, why = validate_class_c(snap)
                if not ok:
                    violation(t, f"after clean: {why}")
        elif cleaned and checks == "cheap" and fld.count and is_critical(p):
            stats["disconnection_steps"].append(t)

        if is_sep:
            state = new_state
            stats["max_bearing"] = max(stats["max_bearing"], state.bearing_counter)
            if stats["first_boundary_step"] is None and state.mode == BOUNDARY:
                stats["first_boundary_step"] = t
                stats["search_time"] = t - 1
            if qs_started is not None and state.mode == BOUNDARY:
                stats["quick_search_durations"].append(t - qs_started)
                qs_started = None
        pos, heading = new_pos, new_heading

        trace.records.append({
            "t": t,
            "x": pos.x,
            "y": pos.y,
            "h": heading,
            "mode": state.mode if is_sep else "greedy",
            "action": action.encode(),
            "cleaned": cleaned,
            "spread": spread_now,
            "count": fld.count,
        })
        if cfg.record_frames:
            trace.frames.append(frame_renderer(fld.snapshot(), pos, heading))

        if is_sep and stats["violations"]:
            outcome = INVARIANT_VIOLATION
            break
        if action.terminate:
            if fld.count == 0:
                outcome = CLEANED
            else:
                violation(t, f"terminated with {fld.count} cells left")
                outcome = INVARIANT_VIOLATION
            break
        if fld.count == 0 and not is_sep:
            outcome = CLEANED
            break
        last_view = fld.perceive(pos, heading)

    if qs_started is not None:
        stats["quick_search_open"] = qs_started
    trace.outcome = outcome
    stats["steps"] = len(trace.records)
    trace.summary = stats
    return trace


def replay_divergence(trace: SimTrace, c0: Contamination) -> int | None:
    """First step whose recorded pose/count disagrees with re-executing the actions (0 = header)."""
    from .trace_io import decode_action
    start = Cell(*trace.header["start"])
    if trace.header.get("instance_digest") != instance_digest(c0, start):
        return 0
    d = trace.header["config"]["d"]
    fld = Field(c0)
    pos, heading = start, trace.header["config"].get("initial_heading", N)
    for rec in trace.records:
        t = rec["t"]
        if t % d == 0:
            fld.spread()
        if bool(rec["spread"]) != (t % d == 0):
            return t
        action = decode_action(rec["action"])
        cleaned = []
        if action.clean and pos in fld:
            fld.clean(pos)
            cleaned.append([pos.x, pos.y])
        pos, heading = apply_action(pos, heading, action)
        if (pos.x, pos.y, heading, fld.count) != (rec["x"], rec["y"], rec["h"], rec["count"]):
            return t
        if cleaned != [list(c) for c in rec["cleaned"]]:
            return t
    return None


def replay_states(trace: SimTrace, c0: Contamination) -> Iterator[tuple[int, Contamination, Cell, int]]:
    """Re-execute the recorded actions, yielding ``(t, contamination, position, heading)`` after each step."""
    from .trace_io import decode_action
    d = trace.header["config"]["d"]
    fld = Field(c0)
    pos = Cell(*trace.header["start"])
    heading = trace.header["config"].get("initial_heading", N)
    for rec in trace.records:
        if rec["t"] % d == 0:
            fld.spread()
        action = decode_action(rec["action"])
        if action.clean and pos in fld:
            fld.clean(pos)
        pos, heading = apply_action(pos, heading, action)
        yield rec["t"], fld.snapshot(), pos, heading


def instance_from_header(header: dict) -> tuple[Contamination, Cell]:
    from .trace_io import parse_instance
    c, start = parse_instance(header["instance"])
    ox, oy = header.get("origin", [0, 0])
    return c.translated(ox, oy), Cell(start.x + ox, start.y + oy)


def replay(trace: SimTrace, c0: Contamination) -> bool:
    return replay_divergence(trace, c0) is None


# ---------------------------------------------------------------------------
# batch execution


def _run_job(job):
    c0, start, cfg = job
    return run_episode(c0, start, cfg)


def run_batch(jobs: Iterable[tuple[Contamination, Cell, SimConfig]], workers: int = 1) -> list[SimTrace]:
    """Run independent episodes; results keep the order of ``jobs``."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) < 2:
        return [_run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))

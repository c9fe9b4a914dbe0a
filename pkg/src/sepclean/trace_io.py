"""Instance text format, JSON-lines traces and frame rendering.

Instance text: one line per row, top line is the largest ``y``. ``#`` is a
contaminated cell, ``.`` a clean one, ``R`` the contaminated start cell. All
rows have the same length. Serialisation crops to the bounding box and puts
its south-west corner at (0, 0).

Trace files: the first line is the header object (``"format"`` carries the
version), then one object per step, then a closing summary object. Keys are
sorted and separators are compact so equal traces are equal bytes.

Images are binary PPM (P6), ``scale`` pixels per cell, palette in
:data:`PALETTE`.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .grid_core import DELTA, Cell, Contamination
from .sim_engine import TRACE_FORMAT, SimTrace
from .strategy_sep import Action

CONTAMINATED, CLEAN, ROBOT = "#", ".", "R"
ROBOT_GLYPHS = "^>v<"  # indexed by heading N, E, S, W

PALETTE = {
    "clean": (255, 255, 255),
    "contaminated": (90, 90, 90),
    "robot_on_contaminated": (200, 30, 30),
    "robot_on_clean": (250, 170, 170),
    "heading_mark": (255, 220, 0),
}


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}" if line else message)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# instances


def parse_instance(text: str) -> tuple[Contamination, Cell]:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty grid", 1, 1)
    width = len(lines[0])
    if width == 0:
        raise ParseError("empty row", 1, 1)
    h = len(lines)
    grid = np.zeros((h, width), dtype=bool)
    start = None
    for li, line in enumerate(lines, start=1):
        if len(line) != width:
            raise ParseError(f"row has {len(line)} cells, expected {width}", li, min(len(line), width) + 1)
        y = h - li
        for col, ch in enumerate(line, start=1):
            if ch == ROBOT:
                if start is not None:
                    raise ParseError("more than one 'R'", li, col)
                start = Cell(col - 1, y)
                grid[y, col - 1] = True
            elif ch == CONTAMINATED:
                grid[y, col - 1] = True
            elif ch != CLEAN:
                raise ParseError(f"unexpected character {ch!r}", li, col)
    if start is None:
        raise ParseError("no 'R' start cell")
    return Contamination(grid), start


def serialize_instance(c: Contamination, start) -> str:
    if start not in c:
        raise ValueError("start cell must be contaminated")
    rows = []
    for y in range(c.height - 1, -1, -1):
        row = [CONTAMINATED if v else CLEAN for v in c.grid[y]]
        if start[1] - c.min_y == y:
            row[start[0] - c.min_x] = ROBOT
        rows.append("".join(row))
    return "\n".join(rows) + "\n"


def read_instance(path) -> tuple[Contamination, Cell]:
    return parse_instance(Path(path).read_text())


def write_instance(path, c: Contamination, start) -> None:
    Path(path).write_text(serialize_instance(c, start))


# ---------------------------------------------------------------------------
# actions and traces

_ACTION_RE = re.compile(r"^(?P<turns>[LR]+|-)(?P<clean>c)?(?P<move>m(?P<dx>[+-]\d+)(?P<dy>[+-]\d+)|m)?(?P<term>t)?$")


def decode_action(code: str) -> Action:
    m = _ACTION_RE.match(code)
    if not m:
        raise ParseError(f"bad action code {code!r}")
    turns = () if m["turns"] == "-" else tuple(m["turns"])
    offset = (int(m["dx"]), int(m["dy"])) if m["dx"] is not None else None
    return Action(turns=turns, clean=bool(m["clean"]), move=bool(m["move"]),
                  terminate=bool(m["term"]), offset=offset)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def trace_to_jsonl(trace: SimTrace) -> str:
    out = [_dumps({"type": "header", **trace.header})]
    out.extend(_dumps({"type": "step", **rec}) for rec in trace.records)
    out.append(_dumps({"type": "end", "outcome": trace.outcome, "summary": trace.summary}))
    return "\n".join(out) + "\n"


def trace_from_jsonl(text: str) -> SimTrace:
    header, records, outcome, summary = None, [], None, {}
    for li, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), li, exc.colno) from None
        kind = obj.pop("type", None)
        if kind == "header":
            if obj.get("format") != TRACE_FORMAT:
                raise ParseError(f"unsupported trace format {obj.get('format')!r}", li, 1)
            header = obj
        elif kind == "step":
            records.append(obj)
        elif kind == "end":
            outcome, summary = obj["outcome"], obj["summary"]
        else:
            raise ParseError(f"unknown record type {kind!r}", li, 1)
    if header is None:
        raise ParseError("trace has no header")
    return SimTrace(header=header, records=records, outcome=outcome or "step_cap", summary=summary)


def write_trace(path, trace: SimTrace) -> None:
    Path(path).write_text(trace_to_jsonl(trace))


def read_trace(path) -> SimTrace:
    return trace_from_jsonl(Path(path).read_text())


# ---------------------------------------------------------------------------
# frames


def _frame_box(c: Contamination, position) -> tuple[int, int, int, int]:
    xs, ys = [position[0]], [position[1]]
    if not c.is_empty:
        b = c.bounding_box
        xs += [b.min_x, b.max_x]
        ys += [b.min_y, b.max_y]
    return min(xs), min(ys), max(xs), max(ys)


def render_frame(c: Contamination, position, heading: int) -> str:
    """Text frame over the box spanning ``c`` and the robot; the robot cell shows ``^>v<``."""
    x0, y0, x1, y1 = _frame_box(c, position)
    rows = []
    for y in range(y1, y0 - 1, -1):
        row = []
        for x in range(x0, x1 + 1):
            if (x, y) == tuple(position):
                row.append(ROBOT_GLYPHS[heading])
            else:
                row.append(CONTAMINATED if (x, y) in c else CLEAN)
        rows.append("".join(row))
    return "\n".join(rows) + "\n"


def render_ppm(c: Contamination, position, heading: int, scale: int = 8) -> bytes:
    """Binary PPM of the same area as :func:`render_frame`."""
    if scale < 2:
        raise ValueError("scale must be at least 2")
    x0, y0, x1, y1 = _frame_box(c, position)
    w, h = x1 - x0 + 1, y1 - y0 + 1
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = PALETTE["clean"]
    for x, y in c.cells:
        img[y1 - y, x - x0] = PALETTE["contaminated"]
    rx, ry = position[0] - x0, y1 - position[1]
    on = tuple(position) in c
    img[ry, rx] = PALETTE["robot_on_contaminated" if on else "robot_on_clean"]
    big = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    # a bar along the edge the robot faces
    dx, dy = DELTA[heading]
    top, left = ry * scale, rx * scale
    t = max(1, scale // 4)
    if dy == 1:
        big[top:top + t, left:left + scale] = PALETTE["heading_mark"]
    elif dy == -1:
        big[top + scale - t:top + scale, left:left + scale] = PALETTE["heading_mark"]
    elif dx == 1:
        big[top:top + scale, left + scale - t:left + scale] = PALETTE["heading_mark"]
    else:
        big[top:top + scale, left:left + t] = PALETTE["heading_mark"]
    return f"P6\n{w * scale} {h * scale}\n255\n".encode() + big.tobytes()


def write_frames(directory, frames: list[str]) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, frame in enumerate(frames, start=1):
        p = d / f"frame_{i:06d}.txt"
        p.write_text(frame)
        paths.append(p)
    return paths

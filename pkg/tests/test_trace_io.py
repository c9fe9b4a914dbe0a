import importlib.util
from pathlib import Path

import pytest

from sepclean.generators import GenSpec, Rng, generate, generate_retrying
from sepclean.grid_core import E, N, S, W, Contamination
from sepclean.sim_engine import SimConfig, replay, run_episode
from sepclean.strategy_sep import Action
from sepclean.trace_io import (
    PALETTE, ParseError, decode_action, parse_instance, read_trace, render_frame, render_ppm,
    serialize_instance, trace_from_jsonl, trace_to_jsonl, write_frames, write_trace,
)

GOLDEN = Path(__file__).parent / "golden"


def _regenerate_module():
    spec = importlib.util.spec_from_file_location("golden_regenerate", GOLDEN / "regenerate.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


# -- instances ------------------------------------------------------------------


def test_parse_examples():
    c, start = parse_instance("R")
    assert c.cells == {(0, 0)} and start == (0, 0)
    c, start = parse_instance("#R#\n###")
    assert c == Contamination.rectangle(3, 2) and start == (1, 1)


@pytest.mark.parametrize("text, line, column", [
    ("##\n#", 2, 2),
    ("##\n##", 0, 0),
    ("R#\n#R", 2, 2),
    ("", 1, 1),
    ("#x", 1, 2),
])
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as err:
        parse_instance(text)
    assert (err.value.line, err.value.column) == (line, column)


def test_round_trip_many_instances():
    for seed in range(1000):
        r = Rng(seed)
        inst = generate(GenSpec(seed=seed, target_h=r.randint(1, 12), target_w=r.randint(1, 12)))
        text = serialize_instance(inst.contamination, inst.start)
        c, start = parse_instance(text)
        assert serialize_instance(c, start) == text
        assert c == inst.contamination and start == inst.start


def test_serialize_anchors_at_origin():
    c = Contamination.rectangle(2, 1, min_x=5, min_y=-3)
    assert serialize_instance(c, (6, -3)) == "#R\n"
    with pytest.raises(ValueError):
        serialize_instance(c, (0, 0))


# -- actions and traces ---------------------------------------------------------------


@pytest.mark.parametrize("action", [
    Action(), Action(turns=("R", "R"), clean=True, move=True), Action(turns=("L",), move=True),
    Action(clean=True, terminate=True), Action(clean=True, move=True, offset=(-1, 1)),
])
def test_action_codes_round_trip(action):
    assert decode_action(action.encode()) == action


def test_bad_action_code():
    with pytest.raises(ParseError):
        decode_action("Xm")


def test_trace_round_trip(tmp_path):
    inst = generate_retrying(GenSpec(seed=2, target_h=7, target_w=6, hole_count=1, max_hole_side=2))
    tr = run_episode(inst.contamination, inst.start, SimConfig(d=45))
    path = tmp_path / "t.jsonl"
    write_trace(path, tr)
    back = read_trace(path)
    assert trace_to_jsonl(back) == path.read_text()
    assert back.outcome == tr.outcome and back.records == tr.records
    assert replay(back, inst.contamination)


def test_trace_rejects_unknown_format():
    with pytest.raises(ParseError):
        trace_from_jsonl('{"type":"header","format":"other/9"}\n')
    with pytest.raises(ParseError):
        trace_from_jsonl('{"type":"step","t":1}\n')


# -- frames ---------------------------------------------------------------------------


def test_render_examples():
    one = Contamination.from_cells([(0, 0)])
    assert render_frame(one, (0, 0), N) == "^\n"
    assert render_frame(one, (0, 0), E) == ">\n"
    assert render_frame(one, (1, 0), S) == "#v\n"
    assert render_frame(Contamination.from_cells([]), (3, 3), W) == "<\n"


def test_ppm_header_and_palette():
    data = render_ppm(Contamination.rectangle(2, 1), (0, 0), N, scale=4)
    header, body = data.split(b"\n255\n", 1)
    assert header == b"P6\n8 4"
    assert len(body) == 8 * 4 * 3
    # bottom-right pixel belongs to the plain contaminated cell
    assert tuple(body[-3:]) == PALETTE["contaminated"]


def test_write_frames(tmp_path):
    paths = write_frames(tmp_path / "f", ["a\n", "b\n"])
    assert [p.name for p in paths] == ["frame_000001.txt", "frame_000002.txt"]


# -- goldens ----------------------------------------------------------------------------


def test_golden_trace_and_frames():
    mod = _regenerate_module()
    inst, trace = mod.build()
    assert serialize_instance(inst.contamination, inst.start) == (GOLDEN / "sep_small.txt").read_text()
    assert trace_to_jsonl(trace) == (GOLDEN / "sep_small.trace.jsonl").read_text()
    assert "\n".join(trace.frames) == (GOLDEN / "sep_small.frames.txt").read_text()
    assert trace.summary["quick_search_durations"]


def test_golden_trace_replays():
    trace = read_trace(GOLDEN / "sep_small.trace.jsonl")
    c, start = parse_instance((GOLDEN / "sep_small.txt").read_text())
    assert replay(trace, c)

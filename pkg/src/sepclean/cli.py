"""Command-line front end.

Exit codes: 0 cleaned (or check passed), 1 a verification check failed,
2 diverged, 3 step cap, 4 invariant violation, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .generators import GenerationError, GenSpec, generate, generate_retrying, strip_spec
from .grid_core import Contamination, max_hole_short_side, validate_class_c
from .oracles import bf_connected, orthogonally_convex, sep_speed_threshold, sep_step_bound
from .sim_engine import (
    CHECK_LEVELS, CLEANED, EXIT_CODES, STRATEGIES, ConfigError, SimConfig, instance_from_header,
    replay_divergence, replay_states, run_batch, run_episode,
)
from .trace_io import (
    ParseError, read_instance, read_trace, render_frame, render_ppm, serialize_instance,
    write_frames, write_instance, write_trace,
)

EXIT_USAGE = 64
EXIT_CHECK_FAILED = 1
CSV_COLUMNS = ("h", "w", "d", "lambda", "seed", "outcome", "steps", "bound", "within_bound")

log = logging.getLogger("sepclean")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument helpers


def _kv(body: str) -> dict[str, int]:
    out = {}
    for part in filter(None, body.split(",")):
        key, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {part!r}")
        try:
            out[key.strip()] = int(value)
        except ValueError:
            raise UsageError(f"{key} must be an integer, got {value!r}") from None
    return out


def _dims(body: str) -> tuple[int, int]:
    h, sep, w = body.lower().partition("x")
    try:
        return int(h), int(w) if sep else int(h)
    except ValueError:
        raise UsageError(f"expected HxW, got {body!r}") from None


def parse_generate_spec(text: str) -> GenSpec:
    """``rect:HxW``, ``strip:l=N``, ``diamond:k=K``, ``plus:HxW`` or
    ``random:h=H,w=W,holes=N,lam=L,seed=S``."""
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("rect", "rectangle"):
        h, w = _dims(body)
        return GenSpec(target_h=h, target_w=w, shape_family="rectangle")
    if kind == "plus":
        h, w = _dims(body)
        return GenSpec(target_h=h, target_w=w, shape_family="plus")
    kv = _kv(body)
    if kind == "strip":
        if "l" not in kv:
            raise UsageError("strip needs l=N")
        return strip_spec(kv["l"])
    if kind == "diamond":
        k = kv.get("k", 0)
        return GenSpec(target_h=2 * k + 1, target_w=2 * k + 1, shape_family="diamond")
    if kind == "random":
        unknown = set(kv) - {"h", "w", "holes", "lam", "seed"}
        if unknown:
            raise UsageError(f"unknown random keys: {', '.join(sorted(unknown))}")
        return GenSpec(seed=kv.get("seed", 0), target_h=kv.get("h", 5), target_w=kv.get("w", 5),
                       hole_count=kv.get("holes", 0), max_hole_side=max(1, kv.get("lam", 1)))
    raise UsageError(f"unknown generator {kind!r}")


def parse_range(text: str) -> list[int]:
    """``5``, ``3:7`` (inclusive) or ``1,4,9``; ``hi < lo`` gives an empty range."""
    values = []
    for part in filter(None, text.split(",")):
        lo, sep, hi = part.partition(":")
        try:
            if sep:
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(lo))
        except ValueError:
            raise UsageError(f"bad range {text!r}") from None
    return values


def _build(spec: GenSpec):
    try:
        return generate_retrying(spec) if spec.hole_count else generate(spec)
    except (GenerationError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _load_input(args) -> tuple[Contamination, object]:
    if bool(args.input) == bool(args.generate):
        raise UsageError("give exactly one of --input or --generate")
    if args.input:
        try:
            return read_instance(args.input)
        except (OSError, ParseError) as exc:
            raise UsageError(f"{args.input}: {exc}") from None
    inst = _build(parse_generate_spec(args.generate))
    return inst.contamination, inst.start


def _resolve_d(value: str, c: Contamination) -> int:
    if value == "auto":
        return sep_speed_threshold(c.height, c.width)
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"--d must be an integer or 'auto', got {value!r}") from None


def _bound(c: Contamination, d: int) -> int:
    return sep_step_bound(c.height, c.width, max_hole_short_side(c), d)


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    c, start = _load_input(args)
    d = _resolve_d(args.d, c)
    try:
        cfg = SimConfig(d=d, max_steps=args.max_steps, strategy=args.strategy,
                        record_frames=bool(args.frames), invariant_checks=args.checks)
        trace = run_episode(c, start, cfg)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.trace:
        write_trace(args.trace, trace)
    if args.frames:
        write_frames(args.frames, trace.frames)
    bound = _bound(c, d)
    st = trace.summary
    print(f"outcome={trace.outcome} steps={trace.steps} spreads={st['spreads']} "
          f"cells_cleaned={st['cells_cleaned']} h={c.height} w={c.width} "
          f"lambda={max_hole_short_side(c)} d={d} bound={bound} "
          f"within_bound={'yes' if trace.outcome == CLEANED and trace.steps <= bound else 'no'}")
    for v in st["violations"]:
        log.warning("t=%d: %s", v["t"], v["what"])
    return EXIT_CODES[trace.outcome]


def _sweep_jobs(args):
    jobs, meta = [], []
    for h in parse_range(args.h):
        for w in parse_range(args.w):
            for seed in parse_range(args.seeds):
                spec = GenSpec(seed=seed, target_h=h, target_w=w, hole_count=args.holes,
                               max_hole_side=max(1, args.lam), shape_family=args.family)
                try:
                    inst = generate_retrying(spec) if args.holes else generate(spec)
                except (GenerationError, ValueError) as exc:
                    meta.append((h, w, None, seed, f"error: {exc}"))
                    continue
                c = inst.contamination
                ds = [sep_speed_threshold(c.height, c.width)] if args.d == "auto" else parse_range(args.d)
                for d in ds:
                    try:
                        cfg = SimConfig(d=d, max_steps=args.max_steps, strategy=args.strategy,
                                        invariant_checks=args.checks)
                    except ConfigError as exc:
                        meta.append((h, w, d, seed, f"error: {exc}"))
                        continue
                    meta.append((h, w, d, seed, len(jobs)))
                    jobs.append((c, inst.start, cfg))
    return jobs, meta


def cmd_sweep(args) -> int:
    jobs, meta = _sweep_jobs(args)
    traces = run_batch(jobs, workers=args.workers)
    rows = []
    for h, w, d, seed, ref in meta:
        if isinstance(ref, str):
            rows.append({"h": h, "w": w, "d": d if d is not None else "", "lambda": "", "seed": seed,
                         "outcome": ref, "steps": "", "bound": "", "within_bound": ""})
            continue
        c, _, _ = jobs[ref]
        trace = traces[ref]
        bound = _bound(c, d)
        rows.append({"h": c.height, "w": c.width, "d": d, "lambda": max_hole_short_side(c), "seed": seed,
                     "outcome": trace.outcome, "steps": trace.steps, "bound": bound,
                     "within_bound": "yes" if trace.outcome == CLEANED and trace.steps <= bound else "no"})
    rows.sort(key=lambda r: (r["h"], r["w"], r["d"] if r["d"] != "" else -1, r["seed"]))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_generate(args) -> int:
    inst = _build(parse_generate_spec(args.spec))
    c = inst.contamination
    meta = {
        "format": "sepclean-instance/1",
        "spec": inst.spec.to_dict(),
        "h": c.height,
        "w": c.width,
        "lambda": max_hole_short_side(c),
        "cells": c.count,
        "holes": len(c.holes),
        "start": list(inst.start),
        "d_auto": sep_speed_threshold(c.height, c.width),
    }
    if args.out:
        write_instance(args.out, c, inst.start)
        Path(str(args.out) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(serialize_instance(c, inst.start))
    return 0


def cmd_verify(args) -> int:
    if not args.input and not args.trace:
        raise UsageError("verify needs --input and/or --trace")
    results = []
    if args.input:
        try:
            c, start = read_instance(args.input)
        except (OSError, ParseError) as exc:
            raise UsageError(f"{args.input}: {exc}") from None
        ok, why = validate_class_c(c)
        results += [
            ("class_c", ok, why),
            ("connected", bf_connected(c), f"{c.component_count} component(s)"),
            ("holes_rectangular", all(h.rectangular for h in c.holes), f"{len(c.holes)} hole(s)"),
            ("orthogonally_convex", orthogonally_convex(c), "rows and columns of the filled shape"),
        ]
    if args.trace:
        try:
            trace = read_trace(args.trace)
        except (OSError, ParseError) as exc:
            raise UsageError(f"{args.trace}: {exc}") from None
        c0, _ = instance_from_header(trace.header)
        where = replay_divergence(trace, c0)
        results.append(("replay", where is None, "bit-exact" if where is None else f"first mismatch at step {where}"))
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else EXIT_CHECK_FAILED


def cmd_render(args) -> int:
    if bool(args.input) == bool(args.trace):
        raise UsageError("give exactly one of --input or --trace")
    if args.input:
        c, start = read_instance(args.input)
        frames = [(c, start, args.heading)]
    else:
        trace = read_trace(args.trace)
        c0, start = instance_from_header(trace.header)
        frames = [(c0, start, trace.header["config"].get("initial_heading", 0))]
        frames += [(c, pos, h) for _, c, pos, h in replay_states(trace, c0)]
        frames = frames[1:] if not args.include_initial else frames
    if args.out is None:
        for c, pos, h in frames:
            sys.stdout.write(render_frame(c, pos, h) + "\n")
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, (c, pos, h) in enumerate(frames, start=1):
        if args.format == "ppm":
            (out / f"frame_{i:06d}.ppm").write_bytes(render_ppm(c, pos, h, scale=args.scale))
        else:
            (out / f"frame_{i:06d}.txt").write_text(render_frame(c, pos, h))
    print(f"wrote {len(frames)} frame(s) to {out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sepclean", description="Grid contamination cleaning simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one episode")
    r.add_argument("--input", help="instance file (grid text format)")
    r.add_argument("--generate", metavar="SPEC",
                   help="rect:HxW | strip:l=N | diamond:k=K | plus:HxW | random:h=,w=,holes=,lam=,seed=")
    r.add_argument("--d", default="auto", help="spread period, or 'auto' for 3(h+w)+6 (default)")
    r.add_argument("--strategy", choices=STRATEGIES, default="sep")
    r.add_argument("--max-steps", type=int, default=200_000)
    r.add_argument("--trace", help="write a JSON-lines trace here")
    r.add_argument("--frames", help="write one text frame per step into this directory")
    r.add_argument("--checks", choices=CHECK_LEVELS, default="off")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a batch and write a CSV summary")
    s.add_argument("--h", required=True, help="heights, e.g. 3:7")
    s.add_argument("--w", required=True, help="widths, e.g. 3:7")
    s.add_argument("--d", default="auto", help="'auto' or a range of spread periods")
    s.add_argument("--seeds", default="0", help="seed range, e.g. 0:9")
    s.add_argument("--holes", type=int, default=0)
    s.add_argument("--lam", type=int, default=1, help="largest hole side")
    s.add_argument("--family", default="random_class_c", choices=("random_class_c", "rectangle"))
    s.add_argument("--strategy", choices=STRATEGIES, default="sep")
    s.add_argument("--max-steps", type=int, default=200_000)
    s.add_argument("--checks", choices=CHECK_LEVELS, default="off")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("generate", help="write an instance plus a JSON sidecar")
    g.add_argument("spec", help="same syntax as run --generate")
    g.add_argument("--out", help="instance path; sidecar goes to OUT.json (default: stdout, no sidecar)")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check an instance and/or replay a trace")
    v.add_argument("--input")
    v.add_argument("--trace")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("render", help="render an instance or every step of a trace")
    f.add_argument("--input")
    f.add_argument("--trace")
    f.add_argument("--heading", type=int, choices=range(4), default=0, help="robot heading for --input")
    f.add_argument("--out", help="directory for numbered frames (default: stdout)")
    f.add_argument("--format", choices=("text", "ppm"), default="text")
    f.add_argument("--scale", type=int, default=8, help="pixels per cell for ppm")
    f.add_argument("--include-initial", action="store_true", help="also render the pose before step 1")
    f.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sepclean: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

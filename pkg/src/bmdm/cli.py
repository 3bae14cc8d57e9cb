"""Command-line front end: ``bmdm run | sweep | preset``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .echo import dump_tensor, synthesize_echo
from .errors import BmdmError
from .harness import (DESK_FRAMES, FULL_FRAMES, PipelineOptions, export_csv, prepare,
                      run_trial, sweep)
from .scenario import load_scenario, preset_condition, save_scenario

log = logging.getLogger("bmdm")

AXIS_CHOICES = {"snr": "snr_db", "M": "M", "N": "N", "K": "K", "offset": "beam_offset"}


def parse_values(text: str) -> list[float]:
    """``-20,-10,0`` or an inclusive range ``start:stop:step``."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop:step")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return [start + i * step for i in range(count)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bmdm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one trial from a scenario file")
    run.add_argument("--scenario", required=True)
    run.add_argument("--seed", type=_seed, required=True)
    run.add_argument("--out", help="per-frame trace CSV")
    run.add_argument("--report", help="per-frame suppression CSV")
    run.add_argument("--method", default="cpm", choices=("cpm", "pm", "cf", "ipm", "none"))
    run.add_argument("--no-static", action="store_true", help="skip static clutter removal")
    run.add_argument("--full-tensor", action="store_true",
                     help="synthesise the whole echo tensor instead of the monitor bin only")
    run.add_argument("--dump-tensor", help="write the noisy echo tensor (binary)")

    sw = sub.add_parser("sweep", help="RMSE over one axis for a reference condition")
    sw.add_argument("--condition", type=int, required=True, choices=(1, 2, 3))
    sw.add_argument("--axis", required=True, choices=tuple(AXIS_CHOICES))
    sw.add_argument("--values", type=parse_values, required=True)
    sw.add_argument("--count", type=int, default=20)
    sw.add_argument("--out", required=True)
    sw.add_argument("--seed", type=_seed, default=0)
    sw.add_argument("--snr", type=float, default=0.0, help="SNR (dB) for non-SNR axes")
    sw.add_argument("--method", default="cpm", choices=("cpm", "pm", "cf", "ipm", "none"))
    sw.add_argument("--no-static", action="store_true")
    scale = sw.add_mutually_exclusive_group()
    scale.add_argument("--frames", type=int, default=DESK_FRAMES)
    scale.add_argument("--full-scale", action="store_true", help=f"use {FULL_FRAMES} frames")

    pre = sub.add_parser("preset", help="write a reference scenario file")
    pre.add_argument("--condition", type=int, required=True, choices=(1, 2, 3))
    pre.add_argument("--out", required=True)
    pre.add_argument("--seed", type=_seed, default=0)
    pre.add_argument("--frames", type=int, default=FULL_FRAMES)
    pre.add_argument("--snr", type=float, default=None)
    return ap


def _options(args) -> PipelineOptions:
    return PipelineOptions(dynamic=args.method, static_removal=not args.no_static,
                           full_tensor=getattr(args, "full_tensor", False))


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    result = run_trial(scenario, args.seed, _options(args))
    err = result.trace.error
    print(f"frames={err.size} rmse_m={np.sqrt(np.mean(err**2)):.6e} "
          f"max_abs_error_m={np.max(np.abs(err)):.6e} measured_snr_db={result.measured_snr_db:.3f} "
          f"wrap_corrections={result.trace.total_corrections}")
    if args.out:
        export_csv(result, args.out)
    if args.report:
        result.suppression.to_csv(args.report)
    if args.dump_tensor:
        prep = prepare(scenario)
        dump_tensor(synthesize_echo(scenario, prep.truth, args.seed), args.dump_tensor)
    return 0


def cmd_sweep(args) -> int:
    frames = FULL_FRAMES if args.full_scale else args.frames
    base = preset_condition(args.condition, args.seed).replace(snr_db=args.snr)
    base = base.replace_radio(num_frames=frames)
    result = sweep(base, AXIS_CHOICES[args.axis], args.values, args.count, _options(args))
    export_csv(result, args.out)
    log.info("sweep finished in %.1f s", result.wall_time)
    for v, r in zip(result.values, result.rmse_m):
        print(f"{result.axis}={v:g} rmse_m={r:.6e}")
    return 0


def cmd_preset(args) -> int:
    cfg = preset_condition(args.condition, args.seed).replace_radio(num_frames=args.frames)
    if args.snr is not None:
        cfg = cfg.replace(snr_db=args.snr)
    save_scenario(cfg, args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "sweep": cmd_sweep, "preset": cmd_preset}[args.command]
    try:
        return handler(args)
    except (BmdmError, ValueError, OSError) as exc:
        print(f"bmdm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Subcarrier count, symbol count, mover count and beam offset sweeps at fixed SNR.

    python3 scripts/parameter_sweeps.py --out results/ [--snr 0] [--count 20]
"""
import argparse
import logging
from pathlib import Path

from bmdm.harness import export_csv, sweep
from bmdm.scenario import preset_condition

GRID = {
    "M": [256, 512, 1024, 2048],
    "N": [14, 28, 42, 52],
    "K": list(range(9)),
    "beam_offset": [0.0, 2.5, 5.0, 7.5, 10.0, 20.0, 40.0],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--snr", type=float, default=0.0)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--frames", type=int, default=300)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out.mkdir(parents=True, exist_ok=True)

    for axis, values in GRID.items():
        conditions = (1,) if axis == "K" else (1, 2, 3)
        for cond in conditions:
            base = preset_condition(cond).replace(snr_db=args.snr).replace_radio(num_frames=args.frames)
            result = sweep(base, axis, values, args.count)
            export_csv(result, args.out / f"{axis}_condition{cond}.csv")
            print(f"{axis:>11} condition {cond}: " + " ".join(f"{r:.2e}" for r in result.rmse_m))


if __name__ == "__main__":
    main()

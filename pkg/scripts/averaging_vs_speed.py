"""Mover power left after symbol averaging, as a function of radial speed.

Shows the nulls at speeds whose phasor completes whole turns within the
frame, and the extended symbol count that recovers the slow movers.

    python3 scripts/averaging_vs_speed.py [--symbols 28] [--out results/averaging.csv]
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from bmdm.scenario import RadioParams
from bmdm.suppression import doppler_to_velocity, ipm_symbol_count, pm_mdis


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--symbols", type=int, default=28)
    ap.add_argument("--extended", type=int, default=1200)
    ap.add_argument("--out", type=Path, default=Path("results/averaging.csv"))
    args = ap.parse_args()
    radio = RadioParams(num_symbols=args.symbols)
    args.out.parent.mkdir(parents=True, exist_ok=True)

    speeds = np.round(np.arange(1.0, 50.01, 0.5), 2)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["speed_mps", "residual_db", "extended_symbols", "extended_residual_db"])
        for v in speeds:
            f = v / doppler_to_velocity(1.0, radio)  # cycles per symbol
            tone = np.exp(2j * np.pi * f * np.arange(args.extended))
            plain = 10 * math.log10(abs(pm_mdis(tone[:args.symbols])) ** 2 + 1e-300)
            choice = ipm_symbol_count(tone + 1.0, radio)
            ext = 10 * math.log10(abs(pm_mdis(tone[:choice.num_symbols])) ** 2 + 1e-300)
            w.writerow([repr(float(v)), f"{plain:.3f}", choice.num_symbols, f"{ext:.3f}"])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

"""RMSE against SNR for the three reference conditions, with and without suppression.

    python3 scripts/rmse_vs_snr.py --out results/ [--count 20] [--frames 300]

Writes ``snr_condition{1,2,3}_{cpm,pm,none}.csv`` (sweep CSV schema).
"""
import argparse
import logging
from pathlib import Path

from bmdm.harness import NO_SUPPRESSION, PipelineOptions, export_csv, sweep
from bmdm.scenario import preset_condition

PIPELINES = {
    "cpm": PipelineOptions(),
    "pm": PipelineOptions(dynamic="pm"),
    "none": NO_SUPPRESSION,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--frames", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out.mkdir(parents=True, exist_ok=True)

    snrs = list(range(-20, 21, 5))
    for cond in (1, 2, 3):
        base = preset_condition(cond, args.seed).replace_radio(num_frames=args.frames)
        for name, options in PIPELINES.items():
            result = sweep(base, "snr_db", snrs, args.count, options)
            export_csv(result, args.out / f"snr_condition{cond}_{name}.csv")
            print(f"condition {cond} {name:>4}: " + " ".join(f"{r:.2e}" for r in result.rmse_m))


if __name__ == "__main__":
    main()

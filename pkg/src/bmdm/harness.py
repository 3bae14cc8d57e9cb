"""Monte Carlo trials, RMSE aggregation and parameter sweeps."""
from __future__ import annotations

import csv
import dataclasses
import functools
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import sample_deformation_truth
from .echo import CleanFeature, clean_feature, noisy_feature, synthesize_echo
from .errors import BmdmError, DegenerateFit, EmptyInput
from .estimation import DeformationTrace, estimate_trace
from .ranging import extract_feature, micro_range_bin, range_profile
from .scenario import ScenarioConfig, with_random_interferers
from .suppression import SuppressionReport, cf_msir, suppress_dynamic

log = logging.getLogger(__name__)

DESK_FRAMES = 300
FULL_FRAMES = 1500
AXES = ("snr_db", "M", "N", "K", "beam_offset")
AXIS_ALIASES = {"snr": "snr_db", "offset": "beam_offset"}


@dataclass(frozen=True)
class PipelineOptions:
    dynamic: str = "cpm"  # cpm | pm | cf | ipm | none
    static_removal: bool = True
    full_tensor: bool = False  # build the (P, N, M) tensor instead of the single-bin path


NO_SUPPRESSION = PipelineOptions(dynamic="none", static_removal=False)


@dataclass
class TrialResult:
    trace: DeformationTrace
    suppression: SuppressionReport
    measured_snr_db: float
    seed: int


@dataclass(frozen=True)
class Prepared:
    truth: np.ndarray
    kappa: int
    clean: CleanFeature
    num_symbols: int


def _noise_free_key(scenario: ScenarioConfig) -> ScenarioConfig:
    return scenario.replace(snr_db=0.0, rng_seed=0)


@functools.lru_cache(maxsize=32)
def _prepare(key: ScenarioConfig) -> Prepared:
    radio = key.radio
    truth = sample_deformation_truth(key)
    kappa = micro_range_bin(float(np.linalg.norm(radio.monitor_point)),
                            radio.num_subcarriers, radio.subcarrier_spacing)
    n_sym = max(radio.num_symbols, key.ipm_symbols)
    return Prepared(truth, kappa, clean_feature(key, truth, kappa, n_sym), n_sym)


def prepare(scenario: ScenarioConfig) -> Prepared:
    """Noise-independent part of a trial, cached per scene."""
    return _prepare(_noise_free_key(scenario))


def trial_seed(scenario: ScenarioConfig, index: int) -> int:
    return scenario.rng_seed ^ index


def run_trial(scenario: ScenarioConfig, seed: Optional[int] = None,
              options: PipelineOptions = PipelineOptions()) -> TrialResult:
    """One noise realisation through the whole estimation chain."""
    seed = scenario.rng_seed if seed is None else seed
    radio = scenario.radio
    prep = prepare(scenario)
    if options.full_tensor:
        echo = synthesize_echo(scenario, prep.truth, seed, prep.num_symbols)
        feature = extract_feature(range_profile(echo.data), prep.kappa,
                                  radio.subcarrier_spacing).values
        snr = echo.measured_snr_db
    else:
        feature, _, snr = noisy_feature(prep.clean, scenario.snr_db, seed)

    try:
        series, report = suppress_dynamic(
            feature, radio.num_symbols, options.dynamic, scenario.cpm_threshold,
            scenario.cpm_proportion, radio if scenario.ipm_symbols or options.dynamic == "ipm" else None)
        if options.static_removal:
            try:
                series, report.static_center = cf_msir(series)
            except DegenerateFit:
                report.static_fallback = True
        trace = estimate_trace(series, radio, prep.truth)
    except BmdmError as exc:
        raise type(exc)(f"seed {seed}: {exc}") from exc
    return TrialResult(trace, report, snr, seed)


def rmse(trials: Sequence[TrialResult]) -> float:
    """Root mean square vertical error over every frame of every trial."""
    if not trials:
        raise EmptyInput("no trials")
    lengths = {t.trace.error.size for t in trials}
    if len(lengths) != 1:
        raise ValueError("trials have different frame counts")
    err = np.concatenate([t.trace.error for t in trials])
    return float(np.sqrt(np.mean(err**2)))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("BMDM_WORKERS", "1")))
    except ValueError:
        return 1


def run_trials(scenario: ScenarioConfig, count: int,
               options: PipelineOptions = PipelineOptions(),
               workers: Optional[int] = None) -> list[TrialResult]:
    seeds = [trial_seed(scenario, i) for i in range(count)]
    prepare(scenario)
    workers = workers or worker_count()
    if workers == 1:
        return [run_trial(scenario, s, options) for s in seeds]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda s: run_trial(scenario, s, options), seeds))


@dataclass
class SweepResult:
    axis: str
    values: list[float]
    rmse_m: list[float]
    count: int
    wall_time: float
    measured_snr_db: list[float] = dataclasses.field(default_factory=list)
    methods: list[dict] = dataclasses.field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["axis", "value", "rmse_m", "count", "measured_snr_db"])
            for v, r, s in zip(self.values, self.rmse_m, self.measured_snr_db):
                w.writerow([self.axis, repr(float(v)), repr(float(r)), self.count, repr(float(s))])


def apply_axis(base: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    axis = AXIS_ALIASES.get(axis, axis)
    if axis == "snr_db":
        return base.replace(snr_db=float(value))
    if axis in ("M", "N", "K") and float(value) != int(value):
        raise ValueError(f"{axis} needs integer values, got {value}")
    if axis == "M":
        return base.replace_radio(num_subcarriers=int(value))
    if axis == "N":
        return base.replace_radio(num_symbols=int(value))
    if axis == "K":
        if int(value) < 0:
            raise ValueError("K must be non-negative")
        return with_random_interferers(base, int(value), seed=base.rng_seed)
    if axis == "beam_offset":
        shift = np.asarray(base.bridge.direction) * float(value)
        return base.replace_radio(beam_offset=tuple(shift))
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {AXES}")


def sweep(base: ScenarioConfig, axis: str, values: Sequence[float], count: int,
          options: PipelineOptions = PipelineOptions(),
          workers: Optional[int] = None) -> SweepResult:
    """RMSE at each value of one scenario axis, ``count`` trials per point.

    All points share the trial seeds, so neighbouring points see the same noise.
    """
    if count < 1:
        raise ValueError("count must be positive")
    axis = AXIS_ALIASES.get(axis, axis)
    scenarios = [apply_axis(base, axis, v) for v in values]  # validate everything first
    start = time.perf_counter()
    result = SweepResult(axis, [float(v) for v in values], [], count, 0.0)
    for v, sc in zip(values, scenarios):
        trials = run_trials(sc, count, options, workers)
        result.rmse_m.append(rmse(trials))
        result.measured_snr_db.append(float(np.mean([t.measured_snr_db for t in trials])))
        counts: dict[str, int] = {}
        for t in trials:
            for m, c in t.suppression.method_counts().items():
                counts[m] = counts.get(m, 0) + c
        result.methods.append(counts)
        log.info("%s=%s rmse=%.3e m methods=%s", axis, v, result.rmse_m[-1], counts)
    result.wall_time = time.perf_counter() - start
    return result


def export_csv(result, path) -> None:
    """Write a sweep (one row per axis point) or a trial trace (one row per frame)."""
    if isinstance(result, SweepResult):
        result.to_csv(path)
    elif isinstance(result, TrialResult):
        result.trace.to_csv(path)
    elif isinstance(result, DeformationTrace):
        result.to_csv(path)
    else:
        raise TypeError(f"cannot export {type(result).__name__}")

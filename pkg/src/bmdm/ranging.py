"""Range profiles over the subcarrier axis and monitor-bin extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import AmbiguousRange


def range_profile(Y: np.ndarray) -> np.ndarray:
    """1/M-normalised inverse DFT along the last (subcarrier) axis."""
    return np.fft.ifft(np.asarray(Y), axis=-1)


def bin_resolution(num_subcarriers: int, spacing: float) -> float:
    return SPEED_OF_LIGHT / (2 * num_subcarriers * spacing)


def micro_range_bin(r0: float, num_subcarriers: int, spacing: float) -> int:
    """Nearest range bin to ``r0``; exact halves round to even."""
    if r0 < 0 or r0 >= SPEED_OF_LIGHT / (2 * spacing):
        raise AmbiguousRange(f"range {r0} m outside [0, {SPEED_OF_LIGHT / (2 * spacing)}) m")
    return int(np.rint(num_subcarriers * spacing * 2 * r0 / SPEED_OF_LIGHT)) % num_subcarriers


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # (P, N)
    kappa: int
    resolution: float  # metres per bin


def extract_feature(profile: np.ndarray, kappa: int, spacing: float) -> FeatureMatrix:
    M = profile.shape[-1]
    if not 0 <= kappa < M:
        raise IndexError(f"bin {kappa} outside [0, {M})")
    return FeatureMatrix(profile[..., kappa], kappa, bin_resolution(M, spacing))

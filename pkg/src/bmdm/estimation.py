"""Phase tracking of the clean monitor phasor and conversion to vertical motion."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import DegenerateGeometry, MissingFrame
from .scenario import RadioParams


def micro_phase_rate(radio: RadioParams) -> float:
    """Phase slope (rad / 2 pi per metre of range) seen at the monitor bin; negative."""
    M = radio.num_subcarriers
    return -(2 * radio.carrier_freq + radio.subcarrier_spacing * (M - 1)) / SPEED_OF_LIGHT


def phase_series(series) -> np.ndarray:
    """Wrapped phase in (-pi, pi] of every frame."""
    z = np.asarray(series, dtype=complex)
    dead = np.flatnonzero(z == 0)
    if dead.size:
        raise MissingFrame(int(dead[0]))
    phi = np.angle(z)
    phi[phi <= -np.pi] = np.pi
    return phi


def predict_range(older: float, old: float, last: float) -> float:
    """Constant-acceleration extrapolation from the last three radial offsets."""
    return 3 * last - 3 * old + older


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def unwrap_phase(phi: float, phi_hat: float) -> float:
    """Pick ``phi + 2 pi k`` closest to the prediction; ties go away from zero."""
    return phi + 2 * np.pi * float(_round_half_away((phi_hat - phi) / (2 * np.pi)))


def vertical_from_radial(delta_r, monitor_point):
    """Invert ``R(dD) - R0 = delta_r`` for the vertical offset nearest zero.

    Uses ``(z0 + dD)^2 = z0^2 + 2 R0 dr + dr^2`` in a cancellation-free form.
    """
    x, y, z = (float(c) for c in monitor_point)
    if z == 0:
        raise DegenerateGeometry("monitor point level with the base station")
    r0 = np.sqrt(x * x + y * y + z * z)
    dr = np.asarray(delta_r, dtype=float)
    excess = 2 * r0 * dr + dr * dr
    # a radial shrink beyond the closest approach has no vertical solution;
    # clamp to the closest point so a runaway tracker still yields a number
    q = np.maximum(z * z + excess, 0.0)
    return excess / (z + np.sign(z) * np.sqrt(q))


@dataclass
class DeformationTrace:
    time: np.ndarray
    radial: np.ndarray  # R_p - R_0, metres
    estimate: np.ndarray  # vertical, relative to frame 0
    truth: np.ndarray  # vertical, as sampled
    wrapped: np.ndarray
    unwrapped: np.ndarray
    wrap_index: np.ndarray  # integer number of turns added at each frame

    @property
    def reference_truth(self) -> np.ndarray:
        """Truth re-referenced to frame 0, the quantity the estimate tracks."""
        return self.truth - self.truth[0]

    @property
    def error(self) -> np.ndarray:
        return self.estimate - self.reference_truth

    @property
    def corrections(self) -> np.ndarray:
        """Cumulative count of wrap corrections."""
        return np.concatenate([[0], np.cumsum(np.abs(np.diff(self.wrap_index)))])

    @property
    def total_corrections(self) -> int:
        return int(self.corrections[-1])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frame", "t_seconds", "truth_m", "estimate_m", "wrapped_phase",
                        "unwrapped_phase", "wrap_corrections"])
            for p in range(self.time.size):
                w.writerow([p, repr(float(self.time[p])), repr(float(self.reference_truth[p])),
                            repr(float(self.estimate[p])), repr(float(self.wrapped[p])),
                            repr(float(self.unwrapped[p])), int(self.corrections[p])])


def estimate_trace(series, radio: RadioParams, truth=None) -> DeformationTrace:
    """Track the monitor phase frame by frame and convert it to vertical motion.

    Frames 1 and 2 continue from their predecessor; later frames are unwrapped
    against a constant-acceleration prediction from the three previous radial
    offsets.
    """
    phi = phase_series(series)
    P = phi.size
    if P < 4:
        raise ValueError("need at least 4 frames")
    rate = 2 * np.pi * micro_phase_rate(radio)
    unwrapped = np.empty(P)
    radial = np.empty(P)
    unwrapped[0], radial[0] = phi[0], 0.0
    for p in range(1, P):
        if p < 3:
            guess = unwrapped[p - 1]
        else:
            guess = phi[0] + rate * predict_range(radial[p - 3], radial[p - 2], radial[p - 1])
        unwrapped[p] = unwrap_phase(phi[p], guess)
        radial[p] = (unwrapped[p] - phi[0]) / rate
    time = np.arange(P) * radio.frame_duration
    estimate = vertical_from_radial(radial, radio.monitor_point)
    wrap_index = np.rint((unwrapped - phi) / (2 * np.pi)).astype(int)
    truth = np.zeros(P) if truth is None else np.asarray(truth, dtype=float)
    return DeformationTrace(time, radial, estimate, truth, phi, unwrapped, wrap_index)

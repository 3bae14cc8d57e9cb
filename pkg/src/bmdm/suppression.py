"""Dynamic (within-frame) and static (across-frame) clutter removal.

Within a frame the monitor reflector and static clutter are constant over
symbols while each mover rotates at its Doppler rate. One mover traces a
circle, whose centre is the clean value; several movers are averaged out.
Across frames the monitor phasor turns with the deformation around the fixed
static-clutter sum, which is again recovered as a circle centre.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import DegenerateFit, NoDopplerPeak
from .scenario import RadioParams

METHODS = ("CF-SDIR", "PM-MDIS", "IPM", "NONE")
MAX_CONDITION = 1e12
MIN_ARC = 0.1  # rad, smallest arc CF-MSIR accepts


@dataclass(frozen=True)
class CircleFit:
    center: complex
    radius: float
    rms_residual: float
    qualified_fraction: float


def fit_circle(points, threshold_factor: float = 0.2, min_points: int = 3) -> CircleFit:
    """Algebraic least-squares circle through complex points.

    Solves ``2 Re(c) x + 2 Im(c) y + k = x^2 + y^2`` with ``k = r^2 - |c|^2``
    after centring and scaling the points, so conditioning does not depend on
    where the cloud sits or how large it is.
    """
    z = np.asarray(points, dtype=complex).ravel()
    if z.size < min_points:
        raise DegenerateFit(f"need at least {min_points} points, got {z.size}")
    shift = z.mean()
    u = z - shift
    scale = np.sqrt(np.mean(np.abs(u) ** 2))
    if not scale > 0:
        raise DegenerateFit("all points coincide")
    u = u / scale
    A = np.column_stack([2 * u.real, 2 * u.imag, np.ones(u.size)])
    if np.linalg.cond(A.T @ A) > MAX_CONDITION:
        raise DegenerateFit("points are collinear")
    sol, *_ = np.linalg.lstsq(A, np.abs(u) ** 2, rcond=None)
    c = complex(sol[0], sol[1])
    r2 = sol[2] + abs(c) ** 2
    radius = math.sqrt(max(r2, 0.0)) * scale
    center = shift + c * scale
    resid = np.abs(z - center) - radius
    return CircleFit(
        center=center,
        radius=radius,
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        qualified_fraction=float(np.mean(np.abs(resid) <= threshold_factor * radius)),
    )


def classify_circular(points, fit: CircleFit, threshold_factor: float = 0.2,
                      proportion: float = 0.9) -> bool:
    """True when enough points sit within ``threshold_factor * radius`` of the circle."""
    z = np.asarray(points, dtype=complex).ravel()
    resid = np.abs(np.abs(z - fit.center) - fit.radius)
    return float(np.mean(resid <= threshold_factor * fit.radius)) >= proportion


def cf_sdir(points) -> complex:
    """Centre of the circle traced by a single rotating mover."""
    return fit_circle(points).center


def pm_mdis(points) -> complex:
    """Symbol-axis mean; cancels every mover completing whole turns."""
    return complex(np.mean(np.asarray(points, dtype=complex)))


# ---------------------------------------------------------------------------
# IPM

def doppler_to_velocity(freq: float, radio: RadioParams) -> float:
    """Cycles per symbol to radial velocity."""
    return freq * SPEED_OF_LIGHT / (2 * radio.carrier_freq * radio.symbol_duration)


def turn_length(velocity: float, radio: RadioParams) -> float:
    """Symbols needed for a mover's phasor to complete one turn."""
    return SPEED_OF_LIGHT / (2 * radio.carrier_freq * abs(velocity) * radio.symbol_duration)


def estimate_doppler(points, pad: int = 16, peak_ratio: float = 4.0,
                     max_movers: int = 16) -> np.ndarray:
    """Doppler frequencies (cycles/symbol) of the movers in one frame.

    The strongest non-DC line of the plain DFT is accepted while it exceeds
    ``peak_ratio`` times the median magnitude of the original spectrum. Its
    frequency is placed on a ``pad``-times finer zero-padded grid within one
    coarse bin (no interpolation), the tone is subtracted and the search
    repeats. Subtracting keeps window sidelobes from posing as extra movers.
    """
    z = np.asarray(points, dtype=complex)
    n = z.size
    resid = z - z.mean()
    floor = np.median(np.abs(np.fft.fft(resid)))
    idx = np.arange(n)
    freqs: list[float] = []
    for _ in range(max_movers):
        coarse = np.abs(np.fft.fft(resid))
        coarse[0] = 0.0
        k = int(np.argmax(coarse))
        if not coarse[k] > peak_ratio * floor:
            break
        fine = np.abs(np.fft.fft(resid, n * pad))
        grid = (k * pad + np.arange(-pad, pad + 1)) % (n * pad)
        f = grid[np.argmax(fine[grid])] / (n * pad)
        f = f - 1 if f > 0.5 else f
        if any(abs(f - g) < 1.0 / n for g in freqs):
            break  # what is left is the subtraction residue of a found line
        tone = np.exp(2j * np.pi * f * idx)
        resid = resid - np.vdot(tone, resid) / n * tone
        freqs.append(f)
    if not freqs:
        raise NoDopplerPeak("no mover above the spectral floor")
    return np.array(freqs)


@dataclass(frozen=True)
class IpmChoice:
    num_symbols: int
    velocities: tuple[float, ...] = ()
    turn_lengths: tuple[int, ...] = ()
    capped: bool = False
    no_peak: bool = False


def ipm_symbol_count(points_long, radio: RadioParams, v_res_target: float = 1.0,
                     pad: int = 16) -> IpmChoice:
    """Symbol count making every detected mover complete whole turns.

    The count is the least common multiple of the per-mover turn lengths,
    capped at the number of symbols available.
    """
    z = np.asarray(points_long, dtype=complex)
    available = z.size
    needed = SPEED_OF_LIGHT / (2 * radio.carrier_freq * radio.symbol_duration * v_res_target)
    if available < needed:
        raise ValueError(f"{available} symbols cannot resolve {v_res_target} m/s "
                         f"(need {math.ceil(needed)})")
    try:
        freqs = estimate_doppler(z, pad=pad)
    except NoDopplerPeak:
        return IpmChoice(available, no_peak=True)
    velocities = tuple(doppler_to_velocity(f, radio) for f in freqs)
    lengths = tuple(max(1, round(1 / abs(f))) for f in freqs)
    total = math.lcm(*lengths)
    if total > available:
        warnings.warn(f"IPM symbol count {total} exceeds {available}; capping", RuntimeWarning)
        return IpmChoice(available, velocities, lengths, capped=True)
    return IpmChoice(total, velocities, lengths)


# ---------------------------------------------------------------------------
# CPM dispatcher

@dataclass(frozen=True)
class FrameOutcome:
    value: complex
    method: str
    qualified_fraction: float
    velocities: tuple[float, ...] = ()


def cpm(points, threshold_factor: float = 0.2, proportion: float = 0.9,
        extended=None, radio: Optional[RadioParams] = None) -> FrameOutcome:
    """Circle-fit first; CF-SDIR if the frame is circular, else PM-MDIS.

    With ``extended`` (a longer capture of the same frame) and ``radio`` given,
    the non-circular branch runs IPM instead of the plain mean.
    """
    z = np.asarray(points, dtype=complex)
    try:
        fit = fit_circle(z, threshold_factor)
    except DegenerateFit:
        fit = None
    fraction = fit.qualified_fraction if fit else 0.0
    if fit is not None and fraction >= proportion:
        return FrameOutcome(fit.center, "CF-SDIR", fraction)
    if extended is not None and radio is not None:
        choice = ipm_symbol_count(extended, radio)
        return FrameOutcome(pm_mdis(np.asarray(extended)[:choice.num_symbols]), "IPM",
                            fraction, choice.velocities)
    return FrameOutcome(pm_mdis(z), "PM-MDIS", fraction)


@dataclass
class SuppressionReport:
    methods: list[str] = field(default_factory=list)
    qualified_fractions: list[float] = field(default_factory=list)
    values: list[complex] = field(default_factory=list)
    velocities: dict[int, tuple[float, ...]] = field(default_factory=dict)
    static_center: Optional[complex] = None
    static_fallback: bool = False

    def add(self, frame: int, outcome: FrameOutcome) -> None:
        assert outcome.method in METHODS
        self.methods.append(outcome.method)
        self.qualified_fractions.append(outcome.qualified_fraction)
        self.values.append(outcome.value)
        if outcome.velocities:
            self.velocities[frame] = outcome.velocities

    def method_counts(self) -> dict[str, int]:
        return {m: self.methods.count(m) for m in METHODS if m in self.methods}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frame", "method", "qualified_fraction", "center_re", "center_im"])
            for p, (m, q, v) in enumerate(zip(self.methods, self.qualified_fractions, self.values)):
                w.writerow([p, m, repr(q), repr(v.real), repr(v.imag)])


def suppress_dynamic(F: np.ndarray, num_symbols: int, method: str = "cpm",
                     threshold_factor: float = 0.2, proportion: float = 0.9,
                     radio: Optional[RadioParams] = None):
    """Collapse each frame of the monitor-bin feature to one phasor.

    ``F`` may carry more than ``num_symbols`` columns; the extra ones are only
    used by IPM. ``method`` is one of ``cpm``, ``pm``, ``cf``, ``ipm``, ``none``
    (``none`` keeps the first symbol untouched).
    """
    F = np.asarray(F)
    use_ipm = F.shape[1] > num_symbols and radio is not None
    report = SuppressionReport()
    out = np.empty(F.shape[0], dtype=complex)
    for p in range(F.shape[0]):
        row = F[p, :num_symbols]
        if method == "cpm":
            res = cpm(row, threshold_factor, proportion,
                      extended=F[p] if use_ipm else None, radio=radio)
        elif method == "pm":
            res = FrameOutcome(pm_mdis(row), "PM-MDIS", float("nan"))
        elif method == "cf":
            try:
                res = FrameOutcome(cf_sdir(row), "CF-SDIR", float("nan"))
            except DegenerateFit:
                res = FrameOutcome(pm_mdis(row), "PM-MDIS", float("nan"))
        elif method == "ipm":
            if radio is None:
                raise ValueError("ipm needs radio parameters")
            choice = ipm_symbol_count(F[p], radio)
            res = FrameOutcome(pm_mdis(F[p, :choice.num_symbols]), "IPM", float("nan"),
                               choice.velocities)
        elif method == "none":
            res = FrameOutcome(complex(row[0]), "NONE", float("nan"))
        else:
            raise ValueError(f"unknown dynamic suppression method {method!r}")
        out[p] = res.value
        report.add(p, res)
    return out, report


def _arc_span(angles: np.ndarray) -> float:
    a = np.sort(np.mod(angles, 2 * np.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))
    return float(2 * np.pi - gaps.max())


def cf_msir(series) -> tuple[np.ndarray, complex]:
    """Remove the static-clutter offset from a per-frame phasor series.

    Returns ``(series - center, center)``. Raises DegenerateFit when the
    series spans less than ``MIN_ARC`` around the fitted centre.
    """
    O = np.asarray(series, dtype=complex)
    if O.size < 3:
        raise DegenerateFit("need at least 3 frames")
    fit = fit_circle(O)
    if _arc_span(np.angle(O - fit.center)) < MIN_ARC:
        raise DegenerateFit("deformation arc too flat for a circle fit")
    return O - fit.center, fit.center

"""Compensated OFDM echo synthesis.

The echo on subcarrier ``m`` of symbol ``n`` in frame ``p`` is a sum of paths
(monitor reflector, movers, static clutter), each with a complex amplitude that
may depend on ``(p, n)`` and a range that depends on ``p`` only. That
factorisation is what both the full tensor and the single-bin fast path use.
"""
from __future__ import annotations

import dataclasses
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import SPEED_OF_LIGHT
from .dynamics import interferer_kinematics, spatial_directions, to_spherical
from .errors import ZeroSignal
from .scenario import RadioParams, ScenarioConfig

# stream tags for the counter-style noise generators
_FULL_NOISE = 0x5E
_BIN_NOISE = 0xB1
_FRAME_CHUNK = 64


def steering_vector(psi: float, omega: float, nx: int, nz: int, fc: float) -> np.ndarray:
    """Planar-array response, x-axis Kronecker z-axis, half-wavelength spacing."""
    spacing = SPEED_OF_LIGHT / (2 * fc)
    k = 2 * np.pi * fc * spacing / SPEED_OF_LIGHT
    ax = np.exp(1j * k * psi * np.arange(nx))
    az = np.exp(1j * k * omega * np.arange(nz))
    return np.kron(ax, az)


def _directions(point) -> tuple[float, float]:
    pose = to_spherical(point)
    return spatial_directions(pose.azimuth, pose.elevation)


def array_factor(radio: RadioParams) -> complex:
    """Receive-combine times transmit-beam gain for the monitor direction.

    The beams are aimed at ``monitor_point + beam_offset`` while every path
    arrives from the monitor direction.
    """
    true_dir = _directions(radio.monitor_point)
    beam_dir = _directions(np.add(radio.monitor_point, radio.beam_offset))
    fc = radio.carrier_freq
    a_r = steering_vector(*true_dir, *radio.rx_array, fc)
    a_h = steering_vector(*true_dir, *radio.tx_array, fc)
    w = steering_vector(*beam_dir, *radio.rx_array, fc) / np.sqrt(a_r.size)
    x = np.sqrt(radio.tx_power / a_h.size) * steering_vector(*beam_dir, *radio.tx_array, fc)
    return complex(np.vdot(w, a_r) * (a_h @ np.conj(x)))


def alignment_loss(radio: RadioParams) -> float:
    """Power ratio between the actual and a perfectly aimed beam pair."""
    aligned = array_factor(dataclasses.replace(radio, beam_offset=(0.0, 0.0, 0.0)))
    return abs(array_factor(radio)) ** 2 / abs(aligned) ** 2


@dataclass(frozen=True)
class GainSet:
    micro: complex
    interferers: np.ndarray  # (K, P)
    clutter: np.ndarray  # (S,)


def beamforming_gains(scenario: ScenarioConfig) -> GainSet:
    af = array_factor(scenario.radio)
    P = scenario.radio.num_frames
    movers = np.array([[itf.gain * af] * P for itf in scenario.interferers],
                      dtype=complex).reshape(len(scenario.interferers), P)
    clutter = np.array([cl.gain * af for cl in scenario.clutter], dtype=complex)
    return GainSet(scenario.radio.micro_gain * af, movers, clutter)


def subcarrier_frequencies(radio: RadioParams) -> np.ndarray:
    return radio.carrier_freq + np.arange(radio.num_subcarriers) * radio.subcarrier_spacing


def path_model(scenario: ScenarioConfig, truth: np.ndarray, num_symbols: int | None = None):
    """Per-path amplitudes ``(P, N, L)`` and ranges ``(P, L)``.

    Path order: monitor reflector, movers, static clutter.
    """
    radio = scenario.radio
    P = radio.num_frames
    N = num_symbols or radio.num_symbols
    truth = np.asarray(truth, dtype=float)
    if truth.shape != (P,):
        raise ValueError(f"truth must have {P} samples, got {truth.shape}")
    gains = beamforming_gains(scenario)
    K, S = len(scenario.interferers), len(scenario.clutter)
    L = 1 + K + S

    ranges = np.empty((P, L))
    ranges[:, 0] = to_spherical(radio.monitor_point, truth).distance
    amps = np.empty((P, N, L), dtype=complex)
    amps[:, :, 0] = gains.micro

    n = np.arange(N)
    for k in range(K):
        state = interferer_kinematics(scenario, k)
        ranges[:, 1 + k] = state.distance
        doppler = np.exp(1j * 4 * np.pi * radio.carrier_freq * radio.symbol_duration
                         / SPEED_OF_LIGHT * np.outer(state.radial_velocity, n))
        amps[:, :, 1 + k] = gains.interferers[k][:, None] * doppler
    for s, cl in enumerate(scenario.clutter):
        ranges[:, 1 + K + s] = np.linalg.norm(cl.position)
        amps[:, :, 1 + K + s] = gains.clutter[s]
    return amps, ranges


def _range_phasors(ranges: np.ndarray, radio: RadioParams) -> np.ndarray:
    """exp(-j 4 pi f_m R / c) with shape ``ranges.shape + (M,)``."""
    fm = subcarrier_frequencies(radio)
    return np.exp(-1j * (4 * np.pi / SPEED_OF_LIGHT) * ranges[..., None] * fm)


def noiseless_echo(scenario: ScenarioConfig, truth: np.ndarray,
                   num_symbols: int | None = None) -> np.ndarray:
    amps, ranges = path_model(scenario, truth, num_symbols)
    out = np.empty(amps.shape[:2] + (scenario.radio.num_subcarriers,), dtype=complex)
    for lo in range(0, amps.shape[0], _FRAME_CHUNK):
        hi = lo + _FRAME_CHUNK
        out[lo:hi] = amps[lo:hi] @ _range_phasors(ranges[lo:hi], scenario.radio)
    return out


def noise_variance(signal_power: float, snr_db: float) -> float:
    if not signal_power > 0:
        raise ZeroSignal("noiseless echo has zero power")
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    return signal_power / 10 ** (snr_db / 10)


def calibrate_noise(noiseless: np.ndarray, snr_db: float) -> float:
    """Noise variance giving ``snr_db`` against the mean echo power."""
    if np.size(noiseless) == 0:
        raise ZeroSignal("empty tensor")
    return noise_variance(float(np.mean(np.abs(noiseless) ** 2)), snr_db)


def frame_noise(seed: int, stream: int, frame: int, shape, variance: float) -> np.ndarray:
    """Circular Gaussian noise for one frame from an indexed generator.

    Each ``(seed, stream, frame)`` triple owns its generator, so frames can be
    produced in any order or concurrently with identical results.
    """
    rng = np.random.default_rng([int(seed) & (2**63 - 1), stream, frame])
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    return np.sqrt(variance / 2) * (z[..., 0] + 1j * z[..., 1])


@dataclass
class EchoTensor:
    data: np.ndarray  # (P, N, M)
    signal_power: float  # mean noiseless power with ideal beam alignment
    noise_var: float
    measured_snr_db: float  # received power over the drawn noise power


def _snr_db(signal: float, noise: float) -> float:
    return float(10 * np.log10(signal / noise)) if noise > 0 else np.inf


def synthesize_echo(scenario: ScenarioConfig, truth: np.ndarray, seed: int | None = None,
                    num_symbols: int | None = None) -> EchoTensor:
    """Full ``(P, N, M)`` echo tensor with calibrated noise.

    The SNR is referenced to a perfectly aimed beam, so a beam offset lowers the
    received SNR below ``scenario.snr_db``.
    """
    seed = scenario.rng_seed if seed is None else seed
    clean = noiseless_echo(scenario, truth, num_symbols)
    received = float(np.mean(np.abs(clean) ** 2))
    power = received / alignment_loss(scenario.radio)
    sigma2 = noise_variance(power, scenario.snr_db)
    drawn = 0.0
    if sigma2:
        shape = clean.shape[1:]
        for p in range(clean.shape[0]):
            noise = frame_noise(seed, _FULL_NOISE, p, shape, sigma2)
            drawn += float(np.sum(np.abs(noise) ** 2))
            clean[p] += noise
        drawn /= clean.size
    return EchoTensor(clean, power, sigma2, _snr_db(received, drawn))


# ---------------------------------------------------------------------------
# single-bin fast path

@dataclass(frozen=True)
class CleanFeature:
    """Noiseless feature at one range bin plus the tensor power it came from."""

    values: np.ndarray  # (P, N)
    kappa: int
    signal_power: float  # mean |Y|^2 over the full noiseless tensor, ideal alignment
    received_power: float  # same, with the configured beam offset
    num_subcarriers: int


def clean_feature(scenario: ScenarioConfig, truth: np.ndarray, kappa: int,
                  num_symbols: int | None = None) -> CleanFeature:
    """Noiseless ``IDFT(Y)[p, n, kappa]`` without building the tensor.

    Each path's subcarrier sum collapses to one bin response per frame; the
    full-tensor power comes from the per-frame path Gram matrices.
    """
    radio = scenario.radio
    M = radio.num_subcarriers
    amps, ranges = path_model(scenario, truth, num_symbols)
    weights = np.exp(2j * np.pi * np.arange(M) * kappa / M) / M
    values = np.empty(amps.shape[:2], dtype=complex)
    power = 0.0
    for lo in range(0, amps.shape[0], _FRAME_CHUNK):
        hi = lo + _FRAME_CHUNK
        E = _range_phasors(ranges[lo:hi], radio)  # (p, L, M)
        A = amps[lo:hi, :radio.num_symbols]
        values[lo:hi] = np.einsum("pnl,pl->pn", amps[lo:hi], E @ weights)
        gram = np.conj(E) @ np.swapaxes(E, 1, 2)  # (p, L, L)
        power += float(np.einsum("pnl,plk,pnk->", np.conj(A), gram, A).real)
    power /= radio.num_frames * radio.num_symbols * M
    return CleanFeature(values, kappa, power / alignment_loss(radio), power, M)


def noisy_feature(clean: CleanFeature, snr_db: float, seed: int):
    """Add the bin-domain image of i.i.d. subcarrier noise.

    A 1/M-normalised inverse DFT maps CN(0, s2) per subcarrier to CN(0, s2/M)
    per bin, independent across frames and symbols.

    Returns ``(values, noise_variance, measured_snr_db)``.
    """
    sigma2 = noise_variance(clean.signal_power, snr_db)
    out = clean.values.copy()
    drawn = 0.0
    if sigma2:
        per_bin = sigma2 / clean.num_subcarriers
        for p in range(out.shape[0]):
            noise = frame_noise(seed, _BIN_NOISE, p, out.shape[1], per_bin)
            drawn += float(np.sum(np.abs(noise) ** 2))
            out[p] += noise
        drawn *= clean.num_subcarriers / out.size
    return out, sigma2, _snr_db(clean.received_power, drawn)


# ---------------------------------------------------------------------------
# tensor dump

_HEADER = struct.Struct("<4s3I4xd4x")
_MAGIC = b"BMDM"


def dump_tensor(echo: EchoTensor, path) -> None:
    """Little-endian complex64 in (p, n, m) C order after a 32-byte header."""
    P, N, M = echo.data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, P, N, M, float(echo.noise_var)))
        fh.write(np.ascontiguousarray(echo.data, dtype="<c8").tobytes())


def load_tensor(path) -> tuple[np.ndarray, float]:
    raw = Path(path).read_bytes()
    magic, P, N, M, sigma2 = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError("not a BMDM tensor dump")
    data = np.frombuffer(raw, dtype="<c8", offset=_HEADER.size)
    if data.size != P * N * M:
        raise ValueError("truncated tensor dump")
    return data.reshape(P, N, M), sigma2

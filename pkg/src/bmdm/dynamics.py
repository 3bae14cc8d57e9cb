"""Bridge deformation truth and scene kinematics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateGeometry
from .scenario import BridgeParams, ExcitationSource, ScenarioConfig


def fundamental_frequency(bridge: BridgeParams) -> float:
    """First bending-mode frequency of a simply supported span, in Hz."""
    return np.pi / (2 * bridge.span**2) * np.sqrt(
        bridge.youngs_modulus * bridge.inertia / bridge.mass_per_length)


def free_deformation(t, bridge: BridgeParams):
    f_b = fundamental_frequency(bridge)
    return bridge.free_amplitude * np.sin(2 * np.pi * f_b * np.asarray(t) + bridge.free_phase)


def forced_deformation(
    t,
    sources: Sequence[ExcitationSource],
    monitor_point,
    damping: float,
    interferer_position: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
):
    """Sum of damped sinusoidal excitations seen at the monitor point.

    ``interferer_position(k, t)`` must return positions of shape ``t.shape + (3,)``
    for sources riding a mover. Decay uses the magnitude of ``damping``.
    """
    t = np.asarray(t, dtype=float)
    monitor = np.asarray(monitor_point, dtype=float)
    total = np.zeros_like(t)
    for src in sources:
        if src.interferer is None:
            dist = np.linalg.norm(np.asarray(src.position) - monitor)
        else:
            if interferer_position is None:
                raise ValueError("source rides a mover but no position provider was given")
            dist = np.linalg.norm(interferer_position(src.interferer, t) - monitor, axis=-1)
        total = total + src.amplitude * np.exp(-abs(damping) * dist) * np.sin(
            2 * np.pi * src.frequency * t + src.phase)
    return total


@dataclass(frozen=True)
class InterfererState:
    position: np.ndarray  # (P, 3)
    distance: np.ndarray  # (P,)
    radial_velocity: np.ndarray  # (P,)


def interferer_velocity(scenario: ScenarioConfig, k: int) -> np.ndarray:
    return np.asarray(scenario.bridge.direction) * scenario.interferers[k].speed


def interferer_position_at(scenario: ScenarioConfig, k: int, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    start = np.asarray(scenario.interferers[k].position)
    return start + t[..., None] * interferer_velocity(scenario, k)


def interferer_kinematics(scenario: ScenarioConfig, k: int, frames=None) -> InterfererState:
    """Position, range and radial velocity of mover ``k`` at the given frames."""
    if frames is None:
        frames = np.arange(scenario.radio.num_frames)
    frames = np.asarray(frames)
    vel = interferer_velocity(scenario, k)
    pos = interferer_position_at(scenario, k, frames * scenario.radio.frame_duration)
    dist = np.linalg.norm(pos, axis=-1)
    if np.any(dist == 0):
        raise DegenerateGeometry(f"interferer {k} passes through the base station")
    radial = (pos / dist[..., None]) @ vel
    return InterfererState(pos, dist, radial)


def sample_deformation_truth(scenario: ScenarioConfig) -> np.ndarray:
    """Vertical deformation at the monitor point, one sample per frame."""
    radio = scenario.radio
    t = np.arange(radio.num_frames) * radio.frame_duration
    forced = forced_deformation(
        t, scenario.sources, radio.monitor_point, scenario.bridge.damping,
        lambda k, tt: interferer_position_at(scenario, k, tt))
    return free_deformation(t, scenario.bridge) + forced


@dataclass(frozen=True)
class SphericalPose:
    azimuth: float
    elevation: float  # polar angle from +z, arccos convention
    distance: np.ndarray | float


def to_spherical(monitor_point, deformation=0.0) -> SphericalPose:
    x, y, z = (float(c) for c in monitor_point)
    r0 = np.sqrt(x * x + y * y + z * z)
    if r0 == 0:
        raise DegenerateGeometry("monitor point at the origin")
    dz = z + np.asarray(deformation, dtype=float)
    dist = np.sqrt(x * x + y * y + dz * dz)
    return SphericalPose(np.arctan2(y, x), np.arccos(z / r0), dist)


def spatial_directions(azimuth, elevation) -> tuple[float, float]:
    """Horizontal and pitch direction cosines used by the steering vectors."""
    return np.cos(elevation) * np.cos(azimuth), np.sin(elevation)

"""Scene description: bridge, excitation sources, movers, clutter and radio setup.

Everything here is an immutable dataclass so a scenario can be shared freely
between trial workers and used as a cache key.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import ParseError, ValidationError

Vec3 = tuple[float, float, float]


def _vec3(v) -> Vec3:
    out = tuple(float(x) for x in v)
    if len(out) != 3:
        raise ValueError("expected 3 components")
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class BridgeParams:
    span: float = 100.0
    youngs_modulus: float = 2.943e10
    inertia: float = 8.65
    mass_per_length: float = 3.6e4
    damping: float = 0.02  # attenuation per metre, stored as a magnitude
    free_amplitude: float = 1.35e-3
    free_phase: float = 0.0
    direction: Vec3 = (1.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("span", "youngs_modulus", "inertia", "mass_per_length"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        if self.free_amplitude < 0:
            raise ValidationError("free_amplitude", "must be non-negative")
        object.__setattr__(self, "damping", abs(float(self.damping)))
        d = np.asarray(_vec3(self.direction))
        norm = float(np.linalg.norm(d))
        if norm == 0 or not math.isfinite(norm):
            raise ValidationError("direction", "must be a non-zero vector")
        object.__setattr__(self, "direction", _vec3(d / norm))


@dataclass(frozen=True)
class ExcitationSource:
    """Either fixed at ``position`` or riding the interferer with index ``interferer``."""

    amplitude: float
    frequency: float
    phase: float = 0.0
    position: Optional[Vec3] = None
    interferer: Optional[int] = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError("amplitude", "must be non-negative")
        if not self.frequency > 0:
            raise ValidationError("frequency", "must be positive")
        if (self.position is None) == (self.interferer is None):
            raise ValidationError("position", "give exactly one of position / interferer")
        if self.position is not None:
            object.__setattr__(self, "position", _vec3(self.position))


@dataclass(frozen=True)
class Interferer:
    position: Vec3
    speed: float  # signed, along the bridge direction
    gain: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "gain", complex(self.gain))


@dataclass(frozen=True)
class StaticClutter:
    position: Vec3
    gain: complex

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "gain", complex(self.gain))


@dataclass(frozen=True)
class RadioParams:
    carrier_freq: float = 26e9
    subcarrier_spacing: float = 480e3
    num_subcarriers: int = 1024
    num_symbols: int = 42
    num_frames: int = 1500
    frame_duration: float = 10e-3
    symbol_duration: float = 10e-6
    tx_array: tuple[int, int] = (8, 8)
    rx_array: tuple[int, int] = (8, 8)
    monitor_point: Vec3 = (180.0, 60.0, -25.0)
    beam_offset: Vec3 = (0.0, 0.0, 0.0)
    micro_gain: complex = 1 + 0j
    tx_power: float = 1.0  # power allocation times transmit power, normalised

    def __post_init__(self):
        m = self.num_subcarriers
        if m < 2 or m & (m - 1):
            raise ValidationError("num_subcarriers", "must be a power of two >= 2")
        if self.num_symbols < 1:
            raise ValidationError("num_symbols", "must be >= 1")
        if self.num_frames < 4:
            raise ValidationError("num_frames", "need at least 4 frames")
        for name in ("carrier_freq", "subcarrier_spacing", "frame_duration",
                     "symbol_duration", "tx_power"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        for name in ("tx_array", "rx_array"):
            arr = tuple(int(x) for x in getattr(self, name))
            if len(arr) != 2 or min(arr) < 1:
                raise ValidationError(name, "need two antenna counts >= 1")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "monitor_point", _vec3(self.monitor_point))
        object.__setattr__(self, "beam_offset", _vec3(self.beam_offset))
        if np.linalg.norm(self.monitor_point) == 0:
            raise ValidationError("monitor_point", "cannot coincide with the base station")
        object.__setattr__(self, "micro_gain", complex(self.micro_gain))
        if self.micro_gain == 0:
            raise ValidationError("micro_gain", "must be non-zero")

    @property
    def max_range(self) -> float:
        """Unambiguous range of the subcarrier grid."""
        return SPEED_OF_LIGHT / (2 * self.subcarrier_spacing)


@dataclass(frozen=True)
class ScenarioConfig:
    bridge: BridgeParams = field(default_factory=BridgeParams)
    radio: RadioParams = field(default_factory=RadioParams)
    sources: tuple[ExcitationSource, ...] = ()
    interferers: tuple[Interferer, ...] = ()
    clutter: tuple[StaticClutter, ...] = ()
    snr_db: float = math.inf  # inf means noiseless
    rng_seed: int = 0
    cpm_threshold: float = 0.2
    cpm_proportion: float = 0.9
    ipm_symbols: int = 0  # extended symbol budget for IPM; 0 disables

    def __post_init__(self):
        for name in ("sources", "interferers", "clutter"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not 0 < self.cpm_threshold < 1:
            raise ValidationError("cpm_threshold", "must lie in (0, 1)")
        if not 0 < self.cpm_proportion <= 1:
            raise ValidationError("cpm_proportion", "must lie in (0, 1]")
        if math.isnan(self.snr_db):
            raise ValidationError("snr_db", "is NaN")
        if self.ipm_symbols and self.ipm_symbols < self.radio.num_symbols:
            raise ValidationError("ipm_symbols", "must be 0 or >= num_symbols")

        monitor = np.asarray(self.radio.monitor_point)
        direction = np.asarray(self.bridge.direction)
        half_span = self.bridge.span / 2
        for k, itf in enumerate(self.interferers):
            rel = np.asarray(itf.position) - monitor
            along = float(rel @ direction)
            off_line = float(np.linalg.norm(rel - along * direction))
            if off_line > 1e-6 * self.bridge.span or abs(along) > half_span * (1 + 1e-12):
                raise ValidationError(f"interferers[{k}].position", "not on the bridge span")
        for s, src in enumerate(self.sources):
            if src.interferer is not None and not 0 <= src.interferer < len(self.interferers):
                raise ValidationError(f"sources[{s}].interferer", "unknown interferer index")
        for s, cl in enumerate(self.clutter):
            r = float(np.linalg.norm(cl.position))
            if not 0 < r < self.radio.max_range:
                raise ValidationError(f"clutter[{s}].position", "outside the service area")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def replace_radio(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, radio=dataclasses.replace(self.radio, **changes))


# ---------------------------------------------------------------------------
# presets

TABLE_SOURCES = (
    (5.15e-3, 0.8, (145.0, 60.0, -25.0)),
    (3.72e-3, 1.5, (165.0, 60.0, -25.0)),
    (4.59e-3, 0.6, (180.0, 60.0, -25.0)),
    (3.42e-3, 1.1, (195.0, 60.0, -25.0)),
    (4.68e-3, 1.3, (220.0, 60.0, -25.0)),
)

# (speed m/s, start offset along the bridge from the monitor point in m).
# Starts are chosen so every mover crosses the monitor point inside the first 3 s.
CONDITION_MOVERS = {
    1: (),
    2: ((12.0, -15.0),),
    3: ((30.0, -30.0), (15.0, -10.0), (-12.0, 20.0)),
}

NUM_CLUTTER = 8
CLUTTER_HALF_WIDTH = 6.0  # m, box around the monitor point
CLUTTER_GAIN_RANGE = (0.1, 0.33)  # relative to the monitor reflector
INTERFERER_GAIN = 1.0  # same echo strength as the monitored reflector
DYNAMIC_AMPLITUDE_RANGE = (10e-3, 50e-3)
DYNAMIC_FREQUENCY_RANGE = (0.2, 5.0)


def _draw_clutter(rng: np.random.Generator, monitor) -> tuple[StaticClutter, ...]:
    out = []
    for _ in range(NUM_CLUTTER):
        pos = np.asarray(monitor) + rng.uniform(-CLUTTER_HALF_WIDTH, CLUTTER_HALF_WIDTH, 3)
        mag = rng.uniform(*CLUTTER_GAIN_RANGE)
        out.append(StaticClutter(tuple(pos), mag * np.exp(1j * rng.uniform(0, 2 * np.pi))))
    return tuple(out)


def _dynamic_source(rng: np.random.Generator, k: int) -> ExcitationSource:
    return ExcitationSource(
        amplitude=float(rng.uniform(*DYNAMIC_AMPLITUDE_RANGE)),
        frequency=float(rng.uniform(*DYNAMIC_FREQUENCY_RANGE)),
        interferer=k,
    )


def preset_condition(condition: int, rng_seed: int = 0) -> ScenarioConfig:
    """Build one of the three reference scenes.

    Static clutter positions/gains and the dynamic excitation parameters are
    drawn from ``rng_seed``; the clutter draw does not depend on the condition,
    so the three conditions share the same static environment.
    """
    if condition not in CONDITION_MOVERS:
        raise ValueError(f"unknown condition {condition!r}")
    bridge = BridgeParams()
    radio = RadioParams()
    rng = np.random.default_rng(rng_seed)
    clutter = _draw_clutter(rng, radio.monitor_point)

    monitor = np.asarray(radio.monitor_point)
    direction = np.asarray(bridge.direction)
    interferers = tuple(
        Interferer(tuple(monitor + offset * direction), speed, INTERFERER_GAIN)
        for speed, offset in CONDITION_MOVERS[condition]
    )
    sources = [ExcitationSource(a, f, position=pos) for a, f, pos in TABLE_SOURCES]
    sources += [_dynamic_source(rng, k) for k in range(len(interferers))]
    return ScenarioConfig(bridge=bridge, radio=radio, sources=tuple(sources),
                          interferers=interferers, clutter=clutter, rng_seed=rng_seed)


def with_random_interferers(base: ScenarioConfig, count: int, seed: int,
                            max_speed: float = 50.0) -> ScenarioConfig:
    """Replace the movers of ``base`` with ``count`` random ones.

    Speeds are uniform in [0, max_speed] with a random sign. Each mover
    enters from the span end it drives away from and carries its own
    excitation source.
    """
    rng = np.random.default_rng([seed, count, 0x4B])
    monitor = np.asarray(base.radio.monitor_point)
    direction = np.asarray(base.bridge.direction)
    half = base.bridge.span / 2
    interferers = []
    for _ in range(count):
        speed = rng.uniform(0, max_speed) * rng.choice((-1.0, 1.0))
        offset = -half if speed >= 0 else half
        interferers.append(Interferer(tuple(monitor + offset * direction), speed, INTERFERER_GAIN))
    sources = [s for s in base.sources if s.interferer is None]
    sources += [_dynamic_source(rng, k) for k in range(count)]
    return base.replace(interferers=tuple(interferers), sources=tuple(sources))


# ---------------------------------------------------------------------------
# structured-text files

def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, bool):
        raise TypeError("booleans are not part of the format")
    if isinstance(value, (int, float, complex)):
        return repr(value)
    raise TypeError(f"cannot serialise {value!r}")


def _parse_vec3(text: str) -> Vec3:
    return _vec3(float(x) for x in text.split(","))


def _parse_pair(text: str) -> tuple[int, int]:
    vals = tuple(int(x) for x in text.split(","))
    if len(vals) != 2:
        raise ValueError("expected two integers")
    return vals  # type: ignore[return-value]


_CONVERTERS = {
    float: float, int: int, complex: complex,
    Vec3: _parse_vec3, Optional[Vec3]: _parse_vec3, Optional[int]: int,
    tuple[int, int]: _parse_pair,
}

_SECTIONS = {
    "scenario": ScenarioConfig,
    "bridge": BridgeParams,
    "radio": RadioParams,
    "source": ExcitationSource,
    "interferer": Interferer,
    "clutter": StaticClutter,
}
_NESTED = {"bridge", "radio", "sources", "interferers", "clutter"}


def _schema(cls) -> dict:
    import typing

    hints = typing.get_type_hints(cls, globalns=globals())
    return {f.name: _CONVERTERS[hints[f.name]] for f in dataclasses.fields(cls)
            if f.name not in _NESTED or cls is not ScenarioConfig}


def dumps(cfg: ScenarioConfig) -> str:
    lines = ["# bmdm scenario (SI units)"]

    def section(name, obj, skip=()):
        lines.append(f"\n[{name}]")
        for f in dataclasses.fields(obj):
            if f.name in skip:
                continue
            val = getattr(obj, f.name)
            if val is None:
                continue
            lines.append(f"{f.name} = {_fmt(val)}")

    section("scenario", cfg, skip=_NESTED)
    section("bridge", cfg.bridge)
    section("radio", cfg.radio)
    for s in cfg.sources:
        section("source", s)
    for itf in cfg.interferers:
        section("interferer", itf)
    for cl in cfg.clutter:
        section("clutter", cl)
    return "\n".join(lines) + "\n"


def loads(text: str) -> ScenarioConfig:
    blocks: list[tuple[str, dict[str, str], int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ParseError(f"line {lineno}: unknown section [{name}]")
            blocks.append((name, {}, lineno))
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value'")
        if not blocks:
            raise ParseError(f"line {lineno}: key outside of a section")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in blocks[-1][1]:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        blocks[-1][1][key] = value

    singles = [b[0] for b in blocks if b[0] in ("scenario", "bridge", "radio")]
    for name in set(singles):
        if singles.count(name) > 1:
            raise ParseError(f"section [{name}] given more than once")

    built: dict[str, list] = {name: [] for name in _SECTIONS}
    for name, raw, lineno in blocks:
        cls = _SECTIONS[name]
        schema = _schema(cls)
        kwargs = {}
        for key, value in raw.items():
            if key not in schema:
                raise ParseError(f"[{name}] line {lineno}: unknown key {key!r}")
            try:
                kwargs[key] = schema[key](value)
            except ValueError as exc:
                raise ParseError(f"[{name}] {key}: cannot parse {value!r} ({exc})") from None
        try:
            built[name].append(kwargs if name == "scenario" else cls(**kwargs))
        except TypeError as exc:
            raise ParseError(f"[{name}] line {lineno}: {exc}") from None

    top = built["scenario"][0] if built["scenario"] else {}
    return ScenarioConfig(
        bridge=built["bridge"][0] if built["bridge"] else BridgeParams(),
        radio=built["radio"][0] if built["radio"] else RadioParams(),
        sources=tuple(built["source"]),
        interferers=tuple(built["interferer"]),
        clutter=tuple(built["clutter"]),
        **top,
    )


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    return loads(Path(path).read_text())


def save_scenario(cfg: ScenarioConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(cfg))

from __future__ import annotations

import json
import logging
import types
import typing
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .absorption import SpectrumMethod
from .catalog import CatalogFormat, parse_weather_condition
from .models import RanTiming, Scheme, SecurityScenario, TsOokRegime, WeatherCondition
from .units import parse_grid_spec

LOGGER = logging.getLogger(__name__)

DEFAULT_GRID = "100e9:2e12:1901"
ATMOSPHERE_PRESETS = ("standard", "sea-surface", "indoor")
# Output-location fields do not change what a command computes.
CACHE_NEUTRAL_FIELDS = ("directory", "cache")


class ConfigError(ValueError):
    """Raised when a configuration field is unknown or invalid."""


@dataclass(frozen=True)
class AtmosphereConfig:
    preset: str = "standard"
    pressure_atm: float = 1.0
    temperature_k: float = 290.0
    water_vapor_density: float = 7.5
    oxygen_mixing_ratio: float = 0.209
    relative_humidity: float = 0.5
    supersaturated: bool = False
    profile_top_km: float = 30.0
    profile_step_km: float = 0.5


@dataclass(frozen=True)
class LinkConfig:
    distances_m: tuple[float, ...] = (1.0, 10.0, 100.0)
    carrier_hz: float = 300e9
    bandwidth_hz: float = 10e9
    tx_power_w: float = 1e-3
    tx_gain_db: float = 20.0
    rx_gain_db: float = 20.0
    weather: str = "clear"
    self_noise_coupling: float = 1.0


@dataclass(frozen=True)
class WindowsConfig:
    distances_m: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    threshold_db: float = 10.0
    min_bandwidth_hz: float = 1e9
    merge_gaps: int = 0
    required_bandwidth_hz: float | None = None


@dataclass(frozen=True)
class WeatherConfig:
    conditions: tuple[str, ...] = ("clear", "rain:25", "rain:5", "fog:100", "sand:1")
    coefficients_path: str | None = None


@dataclass(frozen=True)
class AltitudeSweepConfig:
    altitudes_km: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)
    frequencies_hz: tuple[float, ...] = (340e9, 410e9, 670e9, 850e9, 1030e9, 1350e9, 1500e9)
    n_segments: int = 60


@dataclass(frozen=True)
class SecurityConfig:
    carrier_hz: float = 300e9
    bandwidth_hz: float = 10e9
    tx_power_w: float = 1e-3
    tx_gain_db: float = 0.0
    rx_gain_db: float = 0.0
    an_power_w: float = 0.0
    an_fraction: float = 0.0
    snr_min: float = 1.0
    snr_covert: float = 0.01
    self_noise_coupling: float = 1.0
    weather: str = "clear"
    d_b_m: float = 10.0
    d_e_m: tuple[float, ...] = (2.0, 5.0, 10.0, 20.0, 50.0)
    schemes: tuple[str, ...] = tuple(scheme.value for scheme in Scheme)

    def scenario(self, noise_temperature_k: float, weather: WeatherCondition) -> SecurityScenario:
        """Template scenario; the sweep replaces ``d_e_m`` and ``scheme``."""

        return SecurityScenario(
            d_b_m=self.d_b_m,
            d_e_m=self.d_b_m,
            carrier_hz=self.carrier_hz,
            bandwidth_hz=self.bandwidth_hz,
            tx_power_w=self.tx_power_w,
            tx_gain_db=self.tx_gain_db,
            rx_gain_db=self.rx_gain_db,
            snr_min=self.snr_min,
            snr_covert=self.snr_covert,
            an_power_w=self.an_power_w,
            an_fraction=self.an_fraction,
            noise_temperature_k=noise_temperature_k,
            self_noise_coupling=self.self_noise_coupling,
            weather=weather,
        )


@dataclass(frozen=True)
class RanConfig:
    rms_duration_s: float = 5e-12
    sample_period_s: float = 2e-12
    min_samples: int = 1024
    guard_s: float = 5e-12
    slot_offset_s: float = 50e-12
    symbol_rate_hz: float = 5e9
    self_loop_m: float = 0.01
    pulse_center_hz: float | None = None

    def timing(self) -> RanTiming:
        return RanTiming(**asdict(self))


@dataclass(frozen=True)
class TsOokConfig:
    pulse_energy: float = 1.0
    thermal_noise: float = 1.0
    self_noise: float = 0.0
    spreading_factor: float = 100.0
    pulse_duration_s: float = 1e-13
    n_points: int = 101

    def regime(self) -> TsOokRegime:
        return TsOokRegime(
            pulse_energy=self.pulse_energy,
            thermal_noise=self.thermal_noise,
            self_noise=self.self_noise,
            spreading_factor=self.spreading_factor,
        )


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "output"
    svg: bool = False
    cache: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Every setting a command reads, with all defaults explicit."""

    grid: str = DEFAULT_GRID
    method: str = SpectrumMethod.LBL.value
    catalog_paths: tuple[str, ...] = ()
    catalog_format: str | None = None
    altitudes_km: tuple[float, ...] = (0.0, 10.0, 20.0)
    atmosphere: AtmosphereConfig = field(default_factory=AtmosphereConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    windows: WindowsConfig = field(default_factory=WindowsConfig)
    weather: WeatherConfig = field(default_factory=WeatherConfig)
    altitude_sweep: AltitudeSweepConfig = field(default_factory=AltitudeSweepConfig)
    security: SecurityConfig = field(default_factory=SecurityConfig)
    ran: RanConfig = field(default_factory=RanConfig)
    tsook: TsOokConfig = field(default_factory=TsOokConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def load_calibration() -> dict[str, Any]:
    """The shipped calibration profile (security, RAN timing and TS-OOK regime)."""

    text = resources.files("thz_absorption").joinpath("data").joinpath("calibration.json").read_text(encoding="utf-8")
    return json.loads(text)


def _type_name(hint: Any) -> str:
    return getattr(hint, "__name__", str(hint))


def _coerce(value: Any, hint: Any, path: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [arg for arg in args if arg is not type(None)]
        return _coerce(value, inner[0], path)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"configuration field '{path}' expects a list, got {type(value).__name__}")
        return tuple(_coerce(item, args[0], f"{path}[{index}]") for index, item in enumerate(value))
    if hint is bool:
        if isinstance(value, bool):
            return value
    elif hint is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif hint is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif hint is str:
        if isinstance(value, str):
            return value
    raise ConfigError(f"configuration field '{path}' expects {_type_name(hint)}, got {type(value).__name__}")


def _merge(instance: Any, mapping: Any, prefix: str = "") -> Any:
    if not isinstance(mapping, Mapping):
        raise ConfigError(f"configuration section '{prefix or '<root>'}' must be an object")
    hints = typing.get_type_hints(type(instance))
    names = {item.name for item in fields(instance)}
    changes: dict[str, Any] = {}
    for key, value in mapping.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in names:
            raise ConfigError(f"unknown configuration field '{path}'")
        current = getattr(instance, key)
        if is_dataclass(current):
            changes[key] = _merge(current, value, path)
        else:
            changes[key] = _coerce(value, hints[key], path)
    return replace(instance, **changes)


def _expand_dotted(overrides: Mapping[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        target = nested
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
    return nested


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{path}: {message}")


def validate_run_config(config: RunConfig) -> None:
    try:
        parse_grid_spec(config.grid)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    _require(config.method in {method.value for method in SpectrumMethod}, "method", f"unknown method '{config.method}'")
    if config.catalog_format is not None:
        _require(
            config.catalog_format in {fmt.value for fmt in CatalogFormat},
            "catalog_format",
            f"unknown catalog format '{config.catalog_format}'",
        )
    _require(len(config.altitudes_km) > 0, "altitudes_km", "must not be empty")
    _require(config.atmosphere.preset in ATMOSPHERE_PRESETS, "atmosphere.preset", f"unknown preset '{config.atmosphere.preset}'")

    _require(len(config.link.distances_m) > 0, "link.distances_m", "must not be empty")
    _require(all(d > 0 for d in config.link.distances_m), "link.distances_m", "distances must be positive")
    _require(len(config.windows.distances_m) > 0, "windows.distances_m", "must not be empty")
    _require(config.windows.threshold_db > 0, "windows.threshold_db", "must be positive")
    _require(config.windows.merge_gaps >= 0, "windows.merge_gaps", "must be non-negative")

    _require(len(config.weather.conditions) > 0, "weather.conditions", "must not be empty")
    for path, text in [("link.weather", config.link.weather), ("security.weather", config.security.weather)] + [
        (f"weather.conditions[{index}]", text) for index, text in enumerate(config.weather.conditions)
    ]:
        try:
            parse_weather_condition(text)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    _require(len(config.altitude_sweep.altitudes_km) > 0, "altitude_sweep.altitudes_km", "must not be empty")
    _require(len(config.altitude_sweep.frequencies_hz) > 0, "altitude_sweep.frequencies_hz", "must not be empty")
    _require(config.altitude_sweep.n_segments >= 1, "altitude_sweep.n_segments", "must be at least 1")

    _require(len(config.security.d_e_m) > 0, "security.d_e_m", "must not be empty")
    _require(all(d > 0 for d in config.security.d_e_m), "security.d_e_m", "distances must be positive")
    known = {scheme.value for scheme in Scheme}
    for index, name in enumerate(config.security.schemes):
        _require(name in known, f"security.schemes[{index}]", f"unknown scheme '{name}'")
    _require(config.tsook.n_points >= 2, "tsook.n_points", "must be at least 2")


def load_run_config(path: Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Resolve defaults, the calibration profile, an optional JSON file and dotted overrides."""

    config = _merge(RunConfig(), load_calibration())
    if path is not None:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration file {path} is not valid JSON: {exc}") from exc
        config = _merge(config, payload)
        LOGGER.debug("Loaded configuration file %s", path)
    if overrides:
        config = _merge(config, _expand_dotted(overrides))
    validate_run_config(config)
    return config


def resolved_config_dict(config: RunConfig) -> dict[str, Any]:
    return json.loads(json.dumps(asdict(config)))


def cache_relevant_dict(config: RunConfig) -> dict[str, Any]:
    resolved = resolved_config_dict(config)
    for name in CACHE_NEUTRAL_FIELDS:
        resolved["output"].pop(name, None)
    return resolved

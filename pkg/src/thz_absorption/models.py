from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np
from scipy import constants

from .units import RangeError, db_to_linear, saturation_vapor_pressure_hpa, wavenumber_to_hz

MAX_FREQUENCY_HZ = 10e12
MAX_LINE_FREQUENCY_HZ = 15e12
SATURATION_VALID_RANGE_K = (180.0, 330.0)
WATER_MOLAR_MASS_G = 18.01528


class Species(IntEnum):
    """HITRAN molecule numbers of the species handled natively."""

    H2O = 1
    O2 = 7


def species_label(code: int) -> str:
    try:
        return Species(code).name
    except ValueError:
        return f"M{code}"


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = constants.c
    h: float = constants.h
    k_b: float = constants.k
    n_a: float = constants.N_A
    t0: float = 296.0
    p0_atm: float = 1.0
    atm_pa: float = constants.atm

    @property
    def c2(self) -> float:
        """Second radiation constant h·c/k_B in cm·K."""

        return self.h * self.c * 100.0 / self.k_b


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class SpectralLine:
    """One catalog absorption line in HITRAN units (1/cm, 1/cm per atm)."""

    species: int
    center_wavenumber: float
    intensity_ref: float
    air_halfwidth_ref: float
    self_halfwidth_ref: float
    temperature_exponent: float
    lower_state_energy: float
    pressure_shift: float = 0.0
    isotopologue: int = 1

    def __post_init__(self) -> None:
        if not self.center_wavenumber > 0:
            raise ValueError("center_wavenumber must be positive")
        if self.intensity_ref < 0:
            raise ValueError("intensity_ref must be non-negative")
        if not self.air_halfwidth_ref > 0:
            raise ValueError("air_halfwidth_ref must be positive")
        if self.lower_state_energy < 0:
            raise ValueError("lower_state_energy must be non-negative")

    @property
    def center_frequency_hz(self) -> float:
        return wavenumber_to_hz(self.center_wavenumber)


@dataclass(frozen=True)
class AtmosphereState:
    """Gas state at one point: pressure [atm], temperature [K], vapour [g/m³]."""

    pressure_atm: float
    temperature_k: float
    water_vapor_density: float
    oxygen_mixing_ratio: float = 0.209
    supersaturated: bool = False
    other_mixing_ratios: tuple[tuple[int, float], ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if not self.pressure_atm > 0:
            raise ValueError("pressure must be positive")
        if not self.temperature_k > 0:
            raise ValueError("temperature must be positive")
        if self.water_vapor_density < 0:
            raise ValueError("water vapour density must be non-negative")
        if not 0 <= self.oxygen_mixing_ratio <= 1:
            raise ValueError("oxygen mixing ratio must lie in [0, 1]")
        for code, ratio in self.other_mixing_ratios:
            if code in (Species.H2O, Species.O2):
                raise ValueError(f"{species_label(code)} abundance is set through its own field")
            if not 0 <= ratio <= 1:
                raise ValueError(f"mixing ratio of species {code} must lie in [0, 1]")
        if self.supersaturated:
            return
        low, high = SATURATION_VALID_RANGE_K
        if low <= self.temperature_k <= high:
            limit = saturation_vapor_density(self.temperature_k)
            # relative slack absorbs the float round trip of saturated presets
            if self.water_vapor_density > limit * (1 + 1e-9):
                raise ValueError(
                    f"water vapour density {self.water_vapor_density:g} g/m³ exceeds saturation "
                    f"{limit:.4g} g/m³ at {self.temperature_k:g} K; set supersaturated=True to allow"
                )

    @property
    def water_number_density(self) -> float:
        """Water molecules per cm³."""

        return self.water_vapor_density / WATER_MOLAR_MASS_G * CONSTANTS.n_a / 1e6

    @property
    def water_partial_pressure_atm(self) -> float:
        pascal = self.water_number_density * 1e6 * CONSTANTS.k_b * self.temperature_k
        return pascal / CONSTANTS.atm_pa

    @property
    def dry_pressure_atm(self) -> float:
        return max(self.pressure_atm - self.water_partial_pressure_atm, 0.0)

    def number_density(self, species: int) -> float:
        """Molecules per cm³ of ``species``; zero for species without an abundance."""

        if species == Species.H2O:
            return self.water_number_density
        if species == Species.O2:
            ratio = self.oxygen_mixing_ratio
        else:
            ratio = dict(self.other_mixing_ratios).get(int(species), 0.0)
        if ratio == 0.0:
            return 0.0
        dry_pa = self.dry_pressure_atm * CONSTANTS.atm_pa
        return ratio * dry_pa / (CONSTANTS.k_b * self.temperature_k) / 1e6


def saturation_vapor_density(temperature_k: float) -> float:
    """Saturated water vapour density in g/m³ (Magnus pressure, ideal gas)."""

    low, high = SATURATION_VALID_RANGE_K
    if not low <= temperature_k <= high:
        raise RangeError(f"temperature {temperature_k:g} K outside [{low:g}, {high:g}] K")
    pressure_pa = saturation_vapor_pressure_hpa(temperature_k) * 100.0
    return pressure_pa * WATER_MOLAR_MASS_G / (constants.R * temperature_k)


@dataclass(frozen=True)
class AltitudeProfile:
    """Ordered ``(altitude_km, AtmosphereState)`` samples."""

    samples: tuple[tuple[float, AtmosphereState], ...]

    def __post_init__(self) -> None:
        if len(self.samples) < 1:
            raise ValueError("altitude profile requires at least one sample")
        altitudes = [altitude for altitude, _ in self.samples]
        if any(b <= a for a, b in zip(altitudes, altitudes[1:])):
            raise ValueError("profile altitudes must be strictly increasing")
        sea_level = [state for altitude, state in self.samples if altitude == 0.0]
        if sea_level:
            limit = 0.01 * sea_level[0].water_vapor_density
            for altitude, state in self.samples:
                if altitude >= 10.0 and state.water_vapor_density > limit:
                    raise ValueError(
                        f"vapour density at {altitude:g} km exceeds 1% of the sea-level value"
                    )

    @property
    def altitudes(self) -> list[float]:
        return [altitude for altitude, _ in self.samples]

    @property
    def top_km(self) -> float:
        return self.samples[-1][0]


class WeatherKind(str, Enum):
    CLEAR = "clear"
    RAIN = "rain"
    FOG = "fog"
    SAND = "sand"


@dataclass(frozen=True)
class WeatherCoefficients:
    rain_frequency_ghz: tuple[float, ...]
    rain_k: tuple[float, ...]
    rain_alpha: tuple[float, ...]
    fog_slope: float
    fog_max: float
    fog_visibility_scale_km: float
    fog_visibility_exponent: float
    sand_slope: float
    sand_max: float
    defaults: dict[str, float] = field(default_factory=dict, hash=False, compare=False)


@dataclass(frozen=True)
class WeatherCondition:
    """A weather condition with its parameter (rain rate, visibility or density)."""

    kind: WeatherKind
    value: float = 0.0
    coefficients: WeatherCoefficients | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind is not WeatherKind.CLEAR:
            if self.coefficients is None:
                raise ValueError(f"{self.kind.value} weather requires attenuation coefficients")
            if not self.value > 0:
                raise ValueError(f"{self.kind.value} parameter must be positive")

    @property
    def label(self) -> str:
        if self.kind is WeatherKind.CLEAR:
            return "clear"
        return f"{self.kind.value}:{self.value:g}"

    def attenuation_db_km(self, frequency_hz: float | np.ndarray) -> float | np.ndarray:
        """Specific attenuation in dB/km; never negative."""

        f_ghz = np.asarray(frequency_hz, dtype=float) / 1e9
        coeff = self.coefficients
        if self.kind is WeatherKind.CLEAR or coeff is None:
            result = np.zeros_like(f_ghz)
        elif self.kind is WeatherKind.RAIN:
            log_f = np.log10(np.clip(f_ghz, coeff.rain_frequency_ghz[0], coeff.rain_frequency_ghz[-1]))
            grid = np.log10(coeff.rain_frequency_ghz)
            k = np.interp(log_f, grid, coeff.rain_k)
            alpha = np.interp(log_f, grid, coeff.rain_alpha)
            result = k * self.value**alpha
        elif self.kind is WeatherKind.FOG:
            liquid_water = (coeff.fog_visibility_scale_km / (self.value / 1000.0)) ** coeff.fog_visibility_exponent
            result = np.minimum(coeff.fog_slope * f_ghz, coeff.fog_max) * liquid_water
        else:
            result = np.minimum(coeff.sand_slope * f_ghz, coeff.sand_max) * self.value
        result = np.maximum(result, 0.0)
        return float(result) if result.ndim == 0 else result


CLEAR_SKY = WeatherCondition(WeatherKind.CLEAR)


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float
    f_stop: float
    n_points: int

    def __post_init__(self) -> None:
        if not 0 < self.f_start < self.f_stop:
            raise ValueError("grid requires 0 < f_start < f_stop")
        if self.f_stop > MAX_FREQUENCY_HZ:
            raise ValueError("grid must end at or below 10 THz")
        if self.n_points < 2:
            raise ValueError("grid requires at least two points")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.f_stop - self.f_start) / (self.n_points - 1)

    @property
    def spec(self) -> str:
        return f"{self.f_start:g}:{self.f_stop:g}:{self.n_points}"


@dataclass(eq=False)
class AbsorptionSpectrum:
    """Absorption coefficient k(f) in dB/km with its per-species decomposition."""

    grid: FrequencyGrid
    k_total: np.ndarray
    k_by_species: dict[int, np.ndarray]
    provenance: str = ""

    def __post_init__(self) -> None:
        self.k_total = np.asarray(self.k_total, dtype=float)
        if self.k_total.shape != (self.grid.n_points,):
            raise ValueError("k_total does not match the grid")
        if np.any(self.k_total < 0):
            raise ValueError("absorption coefficient must be non-negative")
        for species, values in self.k_by_species.items():
            if np.shape(values) != (self.grid.n_points,):
                raise ValueError(f"{species_label(species)} contribution does not match the grid")
            if np.any(np.asarray(values) < 0):
                raise ValueError(f"{species_label(species)} contribution must be non-negative")
        if self.k_by_species:
            summed = np.sum([self.k_by_species[key] for key in sorted(self.k_by_species)], axis=0)
            if not np.allclose(summed, self.k_total, rtol=1e-9, atol=0.0):
                raise ValueError("species contributions do not sum to k_total")

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies

    def species(self, code: int) -> np.ndarray:
        return self.k_by_species.get(int(code), np.zeros(self.grid.n_points))

    def at(self, frequency_hz: float) -> float:
        """Linear interpolation of k_total at ``frequency_hz`` inside the grid."""

        if not self.grid.f_start <= frequency_hz <= self.grid.f_stop:
            raise RangeError(f"frequency {frequency_hz:g} Hz outside the spectrum grid")
        return float(np.interp(frequency_hz, self.frequencies, self.k_total))

    @classmethod
    def constant(cls, grid: FrequencyGrid, k_db_km: float, provenance: str = "constant") -> "AbsorptionSpectrum":
        values = np.full(grid.n_points, float(k_db_km))
        return cls(grid=grid, k_total=values, k_by_species={int(Species.H2O): values.copy()}, provenance=provenance)


@dataclass(frozen=True)
class LinkGeometry:
    """Scalar link parameters; gains in dB, powers in W, distance in m."""

    distance_m: float
    carrier_hz: float
    bandwidth_hz: float
    tx_power_w: float
    tx_gain_db: float = 0.0
    rx_gain_db: float = 0.0
    tx_altitude_km: float = 0.0
    rx_altitude_km: float = 0.0
    weather: WeatherCondition = CLEAR_SKY
    self_noise_coupling: float = 1.0

    def __post_init__(self) -> None:
        if not self.distance_m > 0:
            raise ValueError("distance must be positive")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")
        if not self.carrier_hz > 0:
            raise ValueError("carrier frequency must be positive")
        if self.tx_power_w < 0:
            raise ValueError("transmit power must be non-negative")
        if not 0 <= self.self_noise_coupling <= 1:
            raise ValueError("self_noise_coupling must lie in [0, 1]")

    @property
    def gain_linear(self) -> float:
        return db_to_linear(self.tx_gain_db + self.rx_gain_db)

    @property
    def distance_km(self) -> float:
        return self.distance_m / 1000.0


@dataclass(frozen=True)
class LinkBudget:
    distance_m: float
    frequency_hz: float
    spreading_loss_db: float
    absorption_loss_db: float
    weather_loss_db: float
    received_power_w: float
    thermal_noise_w: float
    absorption_noise_w: float
    snr: float
    capacity_bps: float
    capacity_bps_hz: float

    @property
    def total_loss_db(self) -> float:
        return self.spreading_loss_db + self.absorption_loss_db + self.weather_loss_db

    @property
    def noise_w(self) -> float:
        return self.thermal_noise_w + self.absorption_noise_w


@dataclass(eq=False)
class Pulse:
    """Complex baseband samples around ``carrier_hz``."""

    sample_period_s: float
    samples: np.ndarray
    carrier_hz: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=complex)
        size = self.samples.size
        if size < 2 or not is_power_of_two(size):
            raise ValueError("pulse length must be a power of two")
        if not self.sample_period_s > 0:
            raise ValueError("sample period must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("pulse samples must be finite")

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.samples.size) - self.samples.size // 2) * self.sample_period_s


@dataclass(eq=False)
class ChannelResponse:
    """Complex gain H(f) on absolute frequencies for a path of ``distance_m``."""

    frequencies: np.ndarray
    gain: np.ndarray
    distance_m: float
    is_identity: bool = False

    def __post_init__(self) -> None:
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.gain = np.asarray(self.gain, dtype=complex)
        if self.frequencies.shape != self.gain.shape:
            raise ValueError("gain and frequency arrays differ in shape")

    @classmethod
    def identity(cls, frequencies: np.ndarray, distance_m: float = 0.0) -> "ChannelResponse":
        freqs = np.asarray(frequencies, dtype=float)
        return cls(freqs, np.ones(freqs.shape, dtype=complex), distance_m, is_identity=True)


@dataclass(frozen=True)
class SpectralWindow:
    f_low: float
    f_high: float
    max_total_loss_db: float
    distance_m: float
    threshold_db: float
    mean_k_db_km: float

    def __post_init__(self) -> None:
        if not self.f_low < self.f_high:
            raise ValueError("window requires f_low < f_high")

    @property
    def bandwidth_hz(self) -> float:
        return self.f_high - self.f_low


class Scheme(str, Enum):
    BASELINE = "baseline"
    TAN = "tan"
    APM = "apm"
    RAN = "ran"


@dataclass(frozen=True)
class SecurityScenario:
    """Transmitter, legitimate user (LU) and eavesdropper on a common LoS axis."""

    d_b_m: float
    d_e_m: float
    carrier_hz: float
    bandwidth_hz: float
    tx_power_w: float
    tx_gain_db: float
    rx_gain_db: float
    snr_min: float
    snr_covert: float
    an_power_w: float = 0.0
    an_fraction: float = 0.0
    scheme: Scheme = Scheme.BASELINE
    noise_temperature_k: float = 290.0
    self_noise_coupling: float = 1.0
    weather: WeatherCondition = CLEAR_SKY

    def __post_init__(self) -> None:
        if not (self.d_b_m > 0 and self.d_e_m > 0):
            raise ValueError("d_B and d_E must be positive")
        if self.an_power_w < 0:
            raise ValueError("AN power must be non-negative")
        if not self.snr_min > self.snr_covert >= 0:
            raise ValueError("require snr_min > snr_covert >= 0")
        if not 0 <= self.an_fraction < 1:
            raise ValueError("AN fraction must lie in [0, 1)")

    def geometry(self, distance_m: float, carrier_hz: float | None = None, tx_power_w: float | None = None) -> LinkGeometry:
        return LinkGeometry(
            distance_m=distance_m,
            carrier_hz=self.carrier_hz if carrier_hz is None else carrier_hz,
            bandwidth_hz=self.bandwidth_hz,
            tx_power_w=self.tx_power_w if tx_power_w is None else tx_power_w,
            tx_gain_db=self.tx_gain_db,
            rx_gain_db=self.rx_gain_db,
            weather=self.weather,
            self_noise_coupling=self.self_noise_coupling,
        )


@dataclass(frozen=True)
class RanTiming:
    """Pulse and slot timing of the receiver-AN scheme."""

    rms_duration_s: float = 5e-12
    sample_period_s: float = 2e-12
    guard_s: float = 5e-12
    slot_offset_s: float = 50e-12
    symbol_rate_hz: float = 5e9
    self_loop_m: float = 0.01
    min_samples: int = 1024
    pulse_center_hz: float | None = None

    def __post_init__(self) -> None:
        for name in ("rms_duration_s", "sample_period_s", "slot_offset_s", "symbol_rate_hz", "self_loop_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.guard_s < 0:
            raise ValueError("guard_s must be non-negative")


@dataclass(frozen=True)
class SecrecyResult:
    scheme: Scheme
    d_e_m: float
    c_b: float
    c_e: float
    secrecy_rate: float
    covert: bool
    chosen_frequency_hz: float
    snr_b: float
    snr_e: float
    feasible: bool = True
    reason: str | None = None


@dataclass(frozen=True)
class TsOokRegime:
    """Received pulse energy and noise variances of a TS-OOK link (common energy unit)."""

    pulse_energy: float
    thermal_noise: float
    self_noise: float = 0.0
    spreading_factor: float = 100.0

    def __post_init__(self) -> None:
        if not self.pulse_energy > 0:
            raise ValueError("pulse energy must be positive")
        if not self.thermal_noise > 0:
            raise ValueError("thermal noise variance must be positive")
        if self.self_noise < 0:
            raise ValueError("self noise variance must be non-negative")
        if self.spreading_factor < 1:
            raise ValueError("spreading factor must be at least 1")

    def scaled(self, power_ratio: float) -> "TsOokRegime":
        """Regime after scaling the transmit power by ``power_ratio``."""

        if not power_ratio > 0:
            raise ValueError("power ratio must be positive")
        return TsOokRegime(
            pulse_energy=self.pulse_energy * power_ratio,
            thermal_noise=self.thermal_noise,
            self_noise=self.self_noise * power_ratio,
            spreading_factor=self.spreading_factor,
        )


def is_power_of_two(value: int) -> bool:
    return value > 0 and not value & (value - 1)


def next_power_of_two(value: int) -> int:
    return 1 << max(0, math.ceil(math.log2(max(value, 1))))

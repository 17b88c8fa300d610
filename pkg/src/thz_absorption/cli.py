from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .absorption import compute_spectrum, point_coefficient
from .catalog import (
    CatalogError,
    atmosphere_at,
    default_profile,
    indoor_state,
    load_catalog,
    load_weather_coefficients,
    parse_weather_condition,
    sea_surface_state,
)
from .channel import ChannelError, link_budget, point_engine, slant_absorption_db
from .config import ConfigError, RunConfig, cache_relevant_dict, load_run_config, resolved_config_dict
from .models import CLEAR_SKY, AbsorptionSpectrum, AtmosphereState, LinkGeometry, Scheme, SpectralLine, WeatherCondition
from .nano import capacity_curve, optimize_source, symbol_rate_capacity
from .output import (
    altitude_label,
    cache_dir,
    cache_key,
    ensure_output_dir,
    k_spectrum_filename,
    output_path,
    restore_cached,
    store_cached,
    write_altitude_sweep_csv,
    write_link_budget_csv,
    write_pulse_csv,
    write_resolved_config,
    write_spectrum_csv,
    write_sweep_csv,
    write_tsook_csv,
    write_weather_csv,
    write_windows_csv,
)
from .plotting import create_line_plot, save_svg
from .security import ran_pulse_trace, sweep_eavesdropper
from .units import RangeError, parse_frequency, parse_grid_spec
from .windows import adaptive_band, find_windows, total_bandwidth

LOGGER = logging.getLogger(__name__)

COMMANDS_WITH_CATALOG = {"k-spectrum", "loss", "windows", "altitude-sweep", "secrecy-sweep"}


class CliError(RuntimeError):
    """Raised when CLI validation fails."""


class CommandError(RuntimeError):
    """Raised when a command finished but its result is unusable."""


@dataclass(slots=True)
class CommandContext:
    config: RunConfig
    out_dir: Path
    catalog: list[SpectralLine]

    @property
    def svg(self) -> bool:
        return self.config.output.svg


def _split_arg(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [part.strip() for part in value.split(",") if part.strip()]


def _split_floats(value: str | None, flag: str) -> list[float] | None:
    parts = _split_arg(value)
    if parts is None:
        return None
    try:
        return [float(part) for part in parts]
    except ValueError as exc:
        raise CliError(f"{flag} expects comma-separated numbers, got '{value}'") from exc


def _split_frequencies(value: str | None, flag: str) -> list[float] | None:
    parts = _split_arg(value)
    if parts is None:
        return None
    try:
        return [parse_frequency(part) for part in parts]
    except ValueError as exc:
        raise CliError(f"{flag}: {exc}") from exc


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON configuration file.")
    common.add_argument("--out", help="Output directory (default: output).")
    common.add_argument("--svg", action="store_true", default=None, help="Also write SVG figures.")
    common.add_argument(
        "--no-cache",
        dest="cache",
        action="store_false",
        default=None,
        help="Recompute even when a cached result exists.",
    )
    common.add_argument("--grid", help="Frequency grid as f_start:f_stop:n, e.g. 0.1THz:2THz:1901.")
    common.add_argument("--method", choices=["lbl", "itu", "hybrid"], help="Absorption engine.")
    common.add_argument(
        "--catalog",
        action="append",
        help="Line catalog file (.par for HITRAN records); may be repeated.",
    )
    common.add_argument(
        "--atmosphere",
        choices=["standard", "sea-surface", "indoor"],
        help="Surface atmosphere preset.",
    )
    common.add_argument("--verbose", action="store_true", help="Enable debug logging.")
    return common


def parse_arguments(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="thz-absorption",
        description="Simulate THz molecular absorption, link budgets and physical-layer security.",
    )
    common = _common_parser()
    subparsers = parser.add_subparsers(dest="command", required=True)

    k_spectrum = subparsers.add_parser("k-spectrum", parents=[common], help="Absorption coefficient per altitude.")
    k_spectrum.add_argument("--altitudes", help="Comma-separated altitudes in km.")

    loss = subparsers.add_parser("loss", parents=[common], help="Link budget over the grid per distance.")
    loss.add_argument("--distances", help="Comma-separated link distances in m.")
    loss.add_argument("--weather", help="Weather condition, e.g. rain:25.")

    windows = subparsers.add_parser("windows", parents=[common], help="Transmission windows per distance.")
    windows.add_argument("--distances", help="Comma-separated link distances in m.")
    windows.add_argument("--threshold", type=float, help="Absorption loss threshold in dB.")
    windows.add_argument("--merge-gaps", type=int, help="Bridge failing runs of up to this many grid points.")
    windows.add_argument("--required-bandwidth", help="Report the best window at least this wide.")

    weather = subparsers.add_parser("weather", parents=[common], help="Weather attenuation over the grid.")
    weather.add_argument("--conditions", help="Comma-separated conditions, e.g. clear,rain:25,fog:100.")

    altitude = subparsers.add_parser("altitude-sweep", parents=[common], help="k and zenith loss versus altitude.")
    altitude.add_argument("--altitudes", help="Comma-separated altitudes in km.")
    altitude.add_argument("--frequencies", help="Comma-separated frequencies, e.g. 340G,410G.")
    altitude.add_argument("--segments", type=int, help="Integration segments along the zenith path.")

    secrecy = subparsers.add_parser("secrecy-sweep", parents=[common], help="Secrecy rate versus eavesdropper distance.")
    secrecy.add_argument("--schemes", help="Comma-separated schemes (baseline,tan,apm,ran).")
    secrecy.add_argument("--d-b", type=float, help="Legitimate user distance in m.")
    secrecy.add_argument("--d-e", help="Comma-separated eavesdropper distances in m.")

    tsook = subparsers.add_parser("tsook", parents=[common], help="TS-OOK mutual information versus pulse probability.")
    tsook.add_argument("--points", type=int, help="Number of pulse probabilities in [0, 1].")
    tsook.add_argument("--self-noise", type=float, help="Self-induced noise variance.")

    return parser.parse_args(argv)


def _command_overrides(args: argparse.Namespace) -> dict[str, Any]:
    command = args.command
    overrides: dict[str, Any] = {}
    if command == "k-spectrum":
        overrides["altitudes_km"] = _split_floats(args.altitudes, "--altitudes")
    elif command == "loss":
        overrides["link.distances_m"] = _split_floats(args.distances, "--distances")
        overrides["link.weather"] = args.weather
    elif command == "windows":
        overrides["windows.distances_m"] = _split_floats(args.distances, "--distances")
        overrides["windows.threshold_db"] = args.threshold
        overrides["windows.merge_gaps"] = args.merge_gaps
        if args.required_bandwidth is not None:
            try:
                overrides["windows.required_bandwidth_hz"] = parse_frequency(args.required_bandwidth)
            except ValueError as exc:
                raise CliError(f"--required-bandwidth: {exc}") from exc
    elif command == "weather":
        overrides["weather.conditions"] = _split_arg(args.conditions)
    elif command == "altitude-sweep":
        overrides["altitude_sweep.altitudes_km"] = _split_floats(args.altitudes, "--altitudes")
        overrides["altitude_sweep.frequencies_hz"] = _split_frequencies(args.frequencies, "--frequencies")
        overrides["altitude_sweep.n_segments"] = args.segments
    elif command == "secrecy-sweep":
        overrides["security.schemes"] = _split_arg(args.schemes)
        overrides["security.d_b_m"] = args.d_b
        overrides["security.d_e_m"] = _split_floats(args.d_e, "--d-e")
    elif command == "tsook":
        overrides["tsook.n_points"] = args.points
        overrides["tsook.self_noise"] = args.self_noise
    return overrides


def build_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Dotted configuration overrides for every flag given on the command line."""

    if args.grid is not None:
        try:
            parse_grid_spec(args.grid)
        except ValueError as exc:
            raise CliError(f"--grid: {exc}") from exc
    overrides: dict[str, Any] = {
        "grid": args.grid,
        "method": args.method,
        "catalog_paths": args.catalog,
        "atmosphere.preset": args.atmosphere,
        "output.directory": args.out,
        "output.svg": args.svg,
        "output.cache": args.cache,
    }
    overrides.update(_command_overrides(args))
    return {key: value for key, value in overrides.items() if value is not None}


def surface_state(config: RunConfig) -> AtmosphereState:
    atmosphere = config.atmosphere
    if atmosphere.preset == "sea-surface":
        return sea_surface_state(atmosphere.temperature_k, atmosphere.pressure_atm)
    if atmosphere.preset == "indoor":
        return indoor_state(atmosphere.temperature_k, atmosphere.relative_humidity, atmosphere.pressure_atm)
    return AtmosphereState(
        pressure_atm=atmosphere.pressure_atm,
        temperature_k=atmosphere.temperature_k,
        water_vapor_density=atmosphere.water_vapor_density,
        oxygen_mixing_ratio=atmosphere.oxygen_mixing_ratio,
        supersaturated=atmosphere.supersaturated,
        label=atmosphere.preset,
    )


def _weather_coefficients(config: RunConfig):
    path = config.weather.coefficients_path
    return load_weather_coefficients(Path(path) if path else None)


def link_weather(config: RunConfig, text: str) -> WeatherCondition:
    condition = parse_weather_condition(text, _weather_coefficients(config))
    if config.atmosphere.preset == "indoor" and condition.label != CLEAR_SKY.label:
        LOGGER.warning("Ignoring weather '%s' for an indoor link", condition.label)
        return CLEAR_SKY
    return condition


def _surface_spectrum(context: CommandContext) -> tuple[AtmosphereState, AbsorptionSpectrum]:
    atm = surface_state(context.config)
    grid = parse_grid_spec(context.config.grid)
    return atm, compute_spectrum(context.config.method, context.catalog, atm, grid)


def _profile(config: RunConfig):
    return default_profile(
        surface_state(config),
        top_km=config.atmosphere.profile_top_km,
        step_km=config.atmosphere.profile_step_km,
    )


def run_k_spectrum(context: CommandContext) -> list[Path]:
    config = context.config
    profile = _profile(config)
    grid = parse_grid_spec(config.grid)
    written: list[Path] = []
    curves: list[tuple[str, np.ndarray]] = []
    for altitude in config.altitudes_km:
        spectrum = compute_spectrum(config.method, context.catalog, atmosphere_at(profile, altitude), grid)
        written.append(write_spectrum_csv(output_path(context.out_dir, k_spectrum_filename(altitude)), spectrum))
        curves.append((f"{altitude_label(altitude)} km", spectrum.k_total))
        LOGGER.info("Altitude %g km: peak k %.4g dB/km", altitude, float(spectrum.k_total.max()))
    if context.svg:
        fig = create_line_plot(
            grid.frequencies / 1e12,
            curves,
            xlabel="Frequency [THz]",
            ylabel="Absorption coefficient [dB/km]",
            title="Molecular absorption versus altitude",
            log_y=True,
        )
        written.append(save_svg(fig, output_path(context.out_dir, "k-spectrum.svg")))
    return written


def run_loss(context: CommandContext) -> list[Path]:
    config = context.config
    link = config.link
    atm, spectrum = _surface_spectrum(context)
    weather = link_weather(config, link.weather)
    budgets = []
    for distance in link.distances_m:
        geometry = LinkGeometry(
            distance_m=distance,
            carrier_hz=link.carrier_hz,
            bandwidth_hz=link.bandwidth_hz,
            tx_power_w=link.tx_power_w,
            tx_gain_db=link.tx_gain_db,
            rx_gain_db=link.rx_gain_db,
            weather=weather,
            self_noise_coupling=link.self_noise_coupling,
        )
        for frequency, k in zip(spectrum.frequencies, spectrum.k_total):
            budgets.append(link_budget(geometry, float(k), atm.temperature_k, frequency_hz=float(frequency)))
    return [write_link_budget_csv(output_path(context.out_dir, "loss.csv"), budgets)]


def run_windows(context: CommandContext) -> list[Path]:
    settings = context.config.windows
    _, spectrum = _surface_spectrum(context)
    found = []
    for distance in settings.distances_m:
        windows = find_windows(
            spectrum,
            distance,
            settings.threshold_db,
            min_bandwidth_hz=settings.min_bandwidth_hz,
            merge_gaps=settings.merge_gaps,
        )
        LOGGER.info("d=%g m: %d windows, %.4g GHz total", distance, len(windows), total_bandwidth(windows) / 1e9)
        found.extend(windows)
        if settings.required_bandwidth_hz is not None:
            band = adaptive_band(
                spectrum,
                distance,
                settings.required_bandwidth_hz,
                settings.threshold_db,
                min_bandwidth_hz=settings.min_bandwidth_hz,
            )
            if band is None:
                LOGGER.warning("d=%g m: no window offers %.4g Hz", distance, settings.required_bandwidth_hz)
            else:
                LOGGER.info("d=%g m: best band %.6g-%.6g Hz", distance, band.f_low, band.f_high)
    return [write_windows_csv(output_path(context.out_dir, "windows.csv"), found)]


def run_weather(context: CommandContext) -> list[Path]:
    config = context.config
    coefficients = _weather_coefficients(config)
    frequencies = parse_grid_spec(config.grid).frequencies
    columns = []
    for text in config.weather.conditions:
        condition = parse_weather_condition(text, coefficients)
        values = np.broadcast_to(condition.attenuation_db_km(frequencies), frequencies.shape)
        columns.append((condition.label, np.asarray(values, dtype=float)))
    written = [write_weather_csv(output_path(context.out_dir, "weather.csv"), frequencies, columns)]
    if context.svg:
        fig = create_line_plot(
            frequencies / 1e12,
            columns,
            xlabel="Frequency [THz]",
            ylabel="Attenuation [dB/km]",
            title="Weather attenuation",
        )
        written.append(save_svg(fig, output_path(context.out_dir, "weather.svg")))
    return written


def run_altitude_sweep(context: CommandContext) -> list[Path]:
    config = context.config
    sweep = config.altitude_sweep
    profile = _profile(config)
    top = profile.top_km
    rows = []
    for altitude in sweep.altitudes_km:
        atm = atmosphere_at(profile, altitude)
        for frequency in sweep.frequencies_hz:
            k = point_coefficient(config.method, context.catalog, atm, frequency)
            zenith = 0.0
            if altitude < top:
                geometry = LinkGeometry(
                    distance_m=(top - altitude) * 1000.0,
                    carrier_hz=frequency,
                    bandwidth_hz=1.0,
                    tx_power_w=0.0,
                    tx_altitude_km=altitude,
                    rx_altitude_km=top,
                )
                engine = point_engine(context.catalog, frequency, config.method)
                zenith = slant_absorption_db(profile, geometry, engine, sweep.n_segments)
            rows.append((altitude, frequency, k, zenith))
    return [write_altitude_sweep_csv(output_path(context.out_dir, "altitude-sweep.csv"), rows)]


def run_secrecy_sweep(context: CommandContext) -> list[Path]:
    config = context.config
    settings = config.security
    atm, spectrum = _surface_spectrum(context)
    template = settings.scenario(atm.temperature_k, link_weather(config, settings.weather))
    timing = config.ran.timing()
    results = sweep_eavesdropper(template, settings.d_e_m, settings.schemes, spectrum, timing)
    written = [write_sweep_csv(output_path(context.out_dir, "secrecy-sweep.csv"), results)]

    if Scheme.RAN.value in settings.schemes:
        trace = ran_pulse_trace(template, spectrum, timing)
        written.append(write_pulse_csv(output_path(context.out_dir, "ran-pulse.csv"), trace))

    for scheme in settings.schemes:
        rates = [result.secrecy_rate for result in results if result.scheme.value == scheme]
        LOGGER.info("%s: peak secrecy %.4g bit/s/Hz", scheme, max(rates))

    if context.svg:
        d_e = np.asarray(settings.d_e_m, dtype=float)
        series = [
            (scheme.upper(), np.array([r.secrecy_rate for r in results if r.scheme.value == scheme]))
            for scheme in settings.schemes
        ]
        fig = create_line_plot(
            d_e,
            series,
            xlabel="Eavesdropper distance [m]",
            ylabel="Secrecy rate [bit/s/Hz]",
            title=f"Secrecy rate, d_B = {settings.d_b_m:g} m",
        )
        written.append(save_svg(fig, output_path(context.out_dir, "secrecy-sweep.svg")))

    infeasible = [result for result in results if result.scheme is Scheme.RAN and not result.feasible]
    if infeasible:
        raise CommandError(f"RAN infeasible at d_E={infeasible[0].d_e_m:g} m: {infeasible[0].reason}")
    return written


def run_tsook(context: CommandContext) -> list[Path]:
    settings = context.config.tsook
    regime = settings.regime()
    probabilities, capacities = capacity_curve(regime, settings.n_points)
    optimum_index = int(np.argmax(capacities))
    p_star = optimize_source(regime)
    rate = symbol_rate_capacity(regime, p_star, settings.pulse_duration_s)
    LOGGER.info("Optimal pulse probability %.4f, %.4g bit/s", p_star, rate)
    return [
        write_tsook_csv(output_path(context.out_dir, "tsook.csv"), probabilities, capacities, optimum_index)
    ]


COMMANDS: dict[str, Callable[[CommandContext], list[Path]]] = {
    "k-spectrum": run_k_spectrum,
    "loss": run_loss,
    "windows": run_windows,
    "weather": run_weather,
    "altitude-sweep": run_altitude_sweep,
    "secrecy-sweep": run_secrecy_sweep,
    "tsook": run_tsook,
}


def _input_bytes(command: str, config: RunConfig) -> tuple[list[SpectralLine], bytes]:
    catalog: list[SpectralLine] = []
    data = b""
    if command in COMMANDS_WITH_CATALOG:
        paths = [Path(path) for path in config.catalog_paths]
        catalog, data = load_catalog(paths or None, fmt=config.catalog_format)
    if config.weather.coefficients_path:
        data += b"\0" + Path(config.weather.coefficients_path).read_bytes()
    return catalog, data


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    try:
        args = parse_arguments(argv)
        config = load_run_config(args.config, build_overrides(args))
    except (CliError, ConfigError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 2

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    command = args.command
    out_dir = ensure_output_dir(Path(config.output.directory))
    try:
        catalog, data = _input_bytes(command, config)
    except (CatalogError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1

    write_resolved_config(output_path(out_dir, f"{command}-resolved-config.json"), resolved_config_dict(config))
    entry = cache_dir(out_dir, command, cache_key(command, cache_relevant_dict(config), data))
    if config.output.cache:
        restored = restore_cached(entry, out_dir)
        if restored is not None:
            LOGGER.info("Cache hit for %s (%s)", command, entry.name)
            print(f"{command}: restored {len(restored)} file(s) in {out_dir}")
            return 0

    context = CommandContext(config=config, out_dir=out_dir, catalog=catalog)
    try:
        written = COMMANDS[command](context)
    except CommandError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    except (CatalogError, ChannelError, RangeError, ValueError, RuntimeError, OSError) as exc:
        print(f"Error: {command}: {exc}", file=sys.stderr)
        return 1

    if config.output.cache:
        store_cached(entry, written)
    print(f"{command}: wrote {len(written)} file(s) to {out_dir}")
    return 0


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    raise SystemExit(main())

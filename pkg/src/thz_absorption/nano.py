from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate, optimize, stats

from .models import TsOokRegime

LOGGER = logging.getLogger(__name__)

QUADRATURE_TOLERANCE_BIT = 1e-10
TAIL_SIGMAS = 10.0
SOURCE_TOLERANCE = 1e-5
_MC_CHUNK = 1_000_000


def symbol_snr(regime: TsOokRegime, symbol: int) -> float:
    """Received SNR of a pulse (1) or a silence (0)."""

    if symbol == 1:
        return regime.pulse_energy / (regime.thermal_noise + regime.self_noise)
    if symbol == 0:
        return 0.0
    raise ValueError("symbol must be 0 or 1")


def _output_laws(regime: TsOokRegime) -> tuple[stats.rv_continuous, stats.rv_continuous]:
    silence = stats.norm(loc=0.0, scale=math.sqrt(regime.thermal_noise))
    pulse = stats.norm(
        loc=math.sqrt(regime.pulse_energy),
        scale=math.sqrt(regime.thermal_noise + regime.self_noise),
    )
    return silence, pulse


def _normal_logpdf(y: float, mean: float, sigma: float) -> float:
    z = (y - mean) / sigma
    return -0.5 * z * z - math.log(sigma) - 0.5 * math.log(2.0 * math.pi)


def _check_probability(p_one: float) -> None:
    if not 0.0 <= p_one <= 1.0:
        raise ValueError("p_one must lie in [0, 1]")


def ts_ook_capacity(regime: TsOokRegime, p_one: float) -> float:
    """Mutual information I(X;Y) in bit/symbol for a pulse probability ``p_one``."""

    _check_probability(p_one)
    if p_one in (0.0, 1.0):
        return 0.0
    log_p0 = math.log1p(-p_one)
    log_p1 = math.log(p_one)
    sigma0 = math.sqrt(regime.thermal_noise)
    sigma1 = math.sqrt(regime.thermal_noise + regime.self_noise)
    mean1 = math.sqrt(regime.pulse_energy)

    def integrand(y: float) -> float:
        log_f0 = _normal_logpdf(y, 0.0, sigma0)
        log_f1 = _normal_logpdf(y, mean1, sigma1)
        log_f = float(np.logaddexp(log_p0 + log_f0, log_p1 + log_f1))
        term0 = math.exp(log_p0 + log_f0) * (log_f0 - log_f)
        term1 = math.exp(log_p1 + log_f1) * (log_f1 - log_f)
        return (term0 + term1) / math.log(2.0)

    low = min(-TAIL_SIGMAS * sigma0, mean1 - TAIL_SIGMAS * sigma1)
    high = max(TAIL_SIGMAS * sigma0, mean1 + TAIL_SIGMAS * sigma1)
    value, error = integrate.quad(
        integrand,
        low,
        high,
        points=(0.0, mean1),
        epsabs=QUADRATURE_TOLERANCE_BIT,
        epsrel=QUADRATURE_TOLERANCE_BIT,
        limit=200,
    )
    if error > 1e-6:
        LOGGER.warning("TS-OOK quadrature error estimate %.3g bit at p_one=%.4f", error, p_one)
    return max(0.0, value)


def capacity_curve(regime: TsOokRegime, n_points: int = 101) -> tuple[np.ndarray, np.ndarray]:
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    probabilities = np.linspace(0.0, 1.0, n_points)
    return probabilities, np.array([ts_ook_capacity(regime, float(p)) for p in probabilities])


def optimize_source(regime: TsOokRegime) -> float:
    """Pulse probability maximising I(X;Y), by golden-section search."""

    result = optimize.minimize_scalar(
        lambda p: -ts_ook_capacity(regime, float(np.clip(p, 0.0, 1.0))),
        bracket=(0.0, 0.5, 1.0),
        method="golden",
        options={"xtol": SOURCE_TOLERANCE},
    )
    return float(np.clip(result.x, 0.0, 1.0))


def symbol_rate_capacity(regime: TsOokRegime, p_one: float, pulse_duration_s: float) -> float:
    """Information rate in bit/s for symbols spaced ``spreading_factor`` pulse widths apart."""

    if not pulse_duration_s > 0:
        raise ValueError("pulse duration must be positive")
    return ts_ook_capacity(regime, p_one) / (regime.spreading_factor * pulse_duration_s)


def monte_carlo_capacity(regime: TsOokRegime, p_one: float, n_samples: int, seed: int = 0) -> float:
    """Monte-Carlo estimate of I(X;Y) in bit/symbol."""

    _check_probability(p_one)
    if p_one in (0.0, 1.0):
        return 0.0
    silence, pulse = _output_laws(regime)
    rng = np.random.default_rng(seed)
    log_p0 = math.log1p(-p_one)
    log_p1 = math.log(p_one)
    total = 0.0
    remaining = n_samples
    while remaining > 0:
        size = min(_MC_CHUNK, remaining)
        ones = rng.random(size) < p_one
        noise = rng.standard_normal(size)
        y = np.where(ones, pulse.mean() + pulse.std() * noise, silence.std() * noise)
        log_f0 = silence.logpdf(y)
        log_f1 = pulse.logpdf(y)
        log_f = np.logaddexp(log_p0 + log_f0, log_p1 + log_f1)
        total += float(np.sum(np.where(ones, log_f1, log_f0) - log_f))
        remaining -= size
    return total / n_samples / math.log(2.0)

"""Closed-form subcarrier-wise SI power with Wiener phase noise.

For a path delayed by ``b`` samples plus ``delta`` seconds, the phase-noise
mixing function is ``J_k = (1/N) sum_n exp(j(phi_t(nTs - bTs - delta) - phi_r(nTs))) e^{-j2pi kn/N}``.
Its expected power spectrum depends only on the lag kernel
``K(m) = E[exp(j(Delta phase over lag m))]``:

    S[k] = (1/N^2) [N + sum_{m=1}^{N-1} 2 (N - m) K(m) cos(2 pi k m / N)]

Independent oscillators give ``K(m) = exp(-4 pi beta m Ts)``. A common
oscillator cancels the overlapping part of the two Wiener increments, which
gives ``K(m) = exp(-4 pi beta min(m Ts, b Ts + delta))``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .phasenoise import OscillatorKind, OscillatorScenario

_CLAMP = 1e-15


@dataclass(frozen=True)
class KernelSpectrum:
    values: np.ndarray = field(repr=False)
    tap_delay: int
    scenario: OscillatorScenario | None = None


@dataclass(frozen=True)
class PowerSpectrum:
    values: np.ndarray = field(repr=False)
    reference_power: float

    @property
    def db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.values / self.reference_power)


def _independent_exponent(m, beta: float, ts: float) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise ValueError("lag must be >= 0")
    return 4.0 * np.pi * beta * (m * ts)


def _common_exponent(m, b: int, beta: float, ts: float, delta: float) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or b < 0 or delta < 0:
        raise ValueError("lag, tap delay and delta must be >= 0")
    return 4.0 * np.pi * beta * np.minimum(m * ts, b * ts + delta)


def kernel_independent(m, beta: float, ts: float):
    return np.exp(-_independent_exponent(m, beta, ts))


def kernel_common(m, b: int, beta: float, ts: float, delta: float):
    return np.exp(-_common_exponent(m, b, beta, ts, delta))


def lag_exponent(scenario: OscillatorScenario, b: int, ts: float) -> Callable[[np.ndarray], np.ndarray]:
    """``-log K(m)`` for the tap at delay ``b``."""
    if scenario.kind is OscillatorKind.INDEPENDENT:
        return functools.partial(_independent_exponent, beta=scenario.beta, ts=ts)
    return functools.partial(_common_exponent, b=b, beta=scenario.beta, ts=ts, delta=scenario.tx_rx_delay)


def lag_kernel(scenario: OscillatorScenario, b: int, ts: float) -> Callable[[np.ndarray], np.ndarray]:
    exponent = lag_exponent(scenario, b, ts)
    return lambda m: np.exp(-exponent(m))


@functools.lru_cache(maxsize=8)
def _cos_table(n: int) -> np.ndarray:
    km = np.outer(np.arange(n), np.arange(n)) % n
    table = np.cos(2.0 * np.pi * np.arange(n) / n)[km]
    table.setflags(write=False)
    return table


@functools.lru_cache(maxsize=8)
def _circulant_index(n: int) -> np.ndarray:
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    idx.setflags(write=False)
    return idx


def spectrum_from_deficit(deficit: np.ndarray, method: str = "direct") -> np.ndarray:
    """Spectrum from ``D(m) = 1 - K(m)``, m = 0..N-1.

    Uses ``S[k] = delta[k] - (1/N^2) sum_{m>=1} 2 (N - m) D(m) cos(2 pi k m / N)``,
    which equals the plain weighted cosine sum because ``K = 1`` gives a unit
    impulse. Working with the deficit keeps off-peak bins free of cancellation.
    """
    deficit = np.asarray(deficit, dtype=float)
    n = deficit.shape[0]
    if n < 2:
        raise ValueError("N must be >= 2")
    m = np.arange(n)
    w = 2.0 * (n - m) * deficit
    w[0] = 0.0
    if method == "direct":
        values = -(_cos_table(n) @ w)
    elif method == "fft":
        values = -np.fft.fft(w).real
    else:
        raise ValueError(f"unknown method {method!r}")
    values /= n * n
    values[0] += 1.0
    values[(values < 0.0) & (values > -_CLAMP)] = 0.0
    return values


def kernel_spectrum_values(kernel_values: np.ndarray, method: str = "direct") -> np.ndarray:
    """Spectrum from a sampled lag kernel ``K(0..N-1)`` with ``K(0) = 1``."""
    return spectrum_from_deficit(1.0 - np.asarray(kernel_values, dtype=float), method)


def kernel_spectrum(
    kernel: Callable[[np.ndarray], np.ndarray],
    n: int,
    *,
    tap_delay: int = 0,
    scenario: OscillatorScenario | None = None,
    method: str = "direct",
) -> KernelSpectrum:
    values = kernel_spectrum_values(kernel(np.arange(n)), method)
    return KernelSpectrum(values, tap_delay, scenario)


@functools.lru_cache(maxsize=256)
def _tap_spectrum_cached(scenario: OscillatorScenario, b: int, n: int, ts: float, method: str) -> np.ndarray:
    deficit = -np.expm1(-lag_exponent(scenario, b, ts)(np.arange(n)))
    values = spectrum_from_deficit(deficit, method)
    values.setflags(write=False)
    return values


def tap_spectrum(
    scenario: OscillatorScenario, b: int, n: int, ts: float, method: str = "direct"
) -> KernelSpectrum:
    """Kernel spectrum of the tap at delay ``b``."""
    return KernelSpectrum(_tap_spectrum_cached(scenario, b, n, ts, method), b, scenario)


def circular_convolve(x: np.ndarray, kernel: np.ndarray, method: str = "direct") -> np.ndarray:
    """``out[k] = sum_l x[l] * kernel[(k - l) mod N]``."""
    x = np.asarray(x, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    if method == "direct":
        return kernel[_circulant_index(x.shape[0])] @ x
    if method == "fft":
        return np.fft.irfft(np.fft.rfft(x) * np.fft.rfft(kernel), n=x.shape[0])
    raise ValueError(f"unknown method {method!r}")


def _check(tap_delays: Sequence[int], tap_powers: Sequence[float], sigma_l2: np.ndarray, n: int) -> None:
    if len(tap_delays) != len(tap_powers):
        raise ValueError("tap delays and powers must align")
    if sigma_l2.shape != (n,):
        raise ValueError(f"sigma_l2 must have length {n}")


def si_power_pre_dlc(
    n: int,
    ts: float,
    tap_delays: Sequence[int],
    tap_powers: Sequence[float],
    scenario: OscillatorScenario,
    sigma_l2: np.ndarray,
    reference_power: float = 1.0,
    method: str = "direct",
) -> PowerSpectrum:
    """Expected ``|Y_k|^2`` for post-ALC tap powers ``tap_powers``."""
    sigma_l2 = np.asarray(sigma_l2, dtype=float)
    _check(tap_delays, tap_powers, sigma_l2, n)
    out = np.zeros(n)
    for b, p in zip(tap_delays, tap_powers):
        if p == 0:
            continue
        s = tap_spectrum(scenario, b, n, ts, method).values
        off_peak = s.copy()
        off_peak[0] = 0.0
        out += p * (sigma_l2 * s[0] + circular_convolve(sigma_l2, off_peak, method))
    return PowerSpectrum(out, reference_power)


def si_power_post_dlc(
    n: int,
    ts: float,
    tap_delays: Sequence[int],
    tap_powers: Sequence[float],
    scenario: OscillatorScenario,
    sigma_l2: np.ndarray,
    sigma_ee2: float,
    reference_power: float = 1.0,
    method: str = "direct",
) -> PowerSpectrum:
    """Expected ``|U_k|^2``: ICI from the true taps plus estimation error on the own bin.

    ``sigma_ee2`` is the absolute per-tap error variance, applied to every tap.
    """
    if sigma_ee2 < 0:
        raise ValueError("sigma_ee2 must be >= 0")
    sigma_l2 = np.asarray(sigma_l2, dtype=float)
    _check(tap_delays, tap_powers, sigma_l2, n)
    out = np.zeros(n)
    for b, p in zip(tap_delays, tap_powers):
        s = tap_spectrum(scenario, b, n, ts, method).values
        if p != 0:
            # l != k terms only: convolve with the off-peak part of the spectrum
            off_peak = s.copy()
            off_peak[0] = 0.0
            out += p * circular_convolve(sigma_l2, off_peak, method)
        out += sigma_ee2 * sigma_l2 * s[0]
    np.maximum(out, 0.0, out=out)
    return PowerSpectrum(out, reference_power)


def inband_average(spec: PowerSpectrum, active_set: Sequence[int]) -> float:
    """Mean power over ``active_set`` in dB relative to the reference."""
    idx = np.asarray(active_set, dtype=int)
    if idx.size == 0:
        raise ValueError("active_set is empty")
    mean = float(np.mean(spec.values[idx]))
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(mean / spec.reference_power))

"""Digital linear cancellation (DLC): estimation-error model and time-domain subtraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coupling import ChannelRealization, complex_normal
from .ofdm import TimeSymbol


@dataclass(frozen=True)
class DlcSetting:
    """``suppression`` is the linear DLC factor d, or None for ideal DLC."""

    suppression: float | None
    est_error_var: float

    @classmethod
    def ideal(cls) -> "DlcSetting":
        return cls(None, 0.0)

    @classmethod
    def from_suppression(cls, d: float, a: float, p: int) -> "DlcSetting":
        return cls(d, dlc_error_variance(d, a, p))

    @property
    def is_ideal(self) -> bool:
        return self.suppression is None


@dataclass(frozen=True)
class ChannelEstimate:
    taps: np.ndarray = field(repr=False)
    tap_delays: tuple[int, ...]


def dlc_error_variance(d: float, a: float, p: int) -> float:
    """Per-tap estimation-error variance ``d*a/(P+1)``.

    Relative to the no-cancellation reference power; multiply by the
    reference to get an absolute variance.
    """
    if not 0 <= d <= 1:
        raise ValueError("d must lie in [0, 1]")
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    if p < 0:
        raise ValueError("P must be >= 0")
    return d * a / (p + 1)


def block_cpe(tx_phase: np.ndarray, rx_phase: np.ndarray) -> complex:
    """Mean of ``exp(j(phi_t - phi_r))`` over the symbol body."""
    return complex(np.mean(np.exp(1j * (np.asarray(tx_phase) - np.asarray(rx_phase)))))


def estimate_effective_channel(
    true_taps: ChannelRealization,
    carrier_rotations: np.ndarray,
    cpe: complex,
    sigma_ee2: float,
    rng: np.random.Generator,
) -> ChannelEstimate:
    if sigma_ee2 < 0:
        raise ValueError("sigma_ee2 must be >= 0")
    taps = np.asarray(true_taps.taps) * np.asarray(carrier_rotations) * cpe
    if sigma_ee2 > 0:
        taps = taps + complex_normal(taps.shape, sigma_ee2, rng)
    return ChannelEstimate(taps, true_taps.tap_delays)


def tapped_delay(x: np.ndarray, taps: np.ndarray, tap_delays: Sequence[int]) -> np.ndarray:
    """``sum_b taps[b] * x[n - d_b]``, cyclic over the whole CP-extended symbol."""
    out = np.zeros(x.shape, dtype=complex)
    for h, d in zip(taps, tap_delays):
        if h != 0:
            out += h * np.roll(x, d)
    return out


def apply_dlc(
    rx: TimeSymbol | np.ndarray,
    tx_reference: TimeSymbol | np.ndarray,
    est: ChannelEstimate,
    tap_delays: Sequence[int] | None = None,
) -> TimeSymbol | np.ndarray:
    r = rx.samples if isinstance(rx, TimeSymbol) else np.asarray(rx, dtype=complex)
    x = tx_reference.samples if isinstance(tx_reference, TimeSymbol) else np.asarray(tx_reference)
    if r.shape != x.shape:
        raise ValueError(f"length mismatch: rx {r.shape} vs tx {x.shape}")
    delays = est.tap_delays if tap_delays is None else tuple(tap_delays)
    if len(delays) != len(est.taps):
        raise ValueError("tap_delays do not match the estimate")
    u = r - tapped_delay(x, est.taps, delays)
    return TimeSymbol(u, rx.cp_len) if isinstance(rx, TimeSymbol) else u

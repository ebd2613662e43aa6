"""OFDM baseband waveform: numerology, 16QAM symbols, CP framing and the DFT pair.

The transform convention is forward unscaled, inverse scaled by 1/N::

    X[k] = sum_n x[n] exp(-j 2 pi k n / N)
    x[n] = (1/N) sum_k X[k] exp(+j 2 pi k n / N)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Gray-coded 16QAM rail levels, bit pair -> amplitude.
_GRAY_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])
QAM16_SCALE = 1.0 / np.sqrt(10.0)


@dataclass(frozen=True)
class OfdmConfig:
    n_subcarriers: int
    active_set: tuple[int, ...]
    cp_len: int
    sample_interval: float
    subcarrier_spacing: float
    carrier_freq: float
    modulation: str = "16qam"

    def __post_init__(self) -> None:
        n = self.n_subcarriers
        if n < 2:
            raise ValueError("n_subcarriers must be >= 2")
        if not 0 <= self.cp_len < n:
            raise ValueError("cp_len must satisfy 0 <= cp_len < n_subcarriers")
        prod = self.sample_interval * self.subcarrier_spacing * n
        if abs(prod - 1.0) > 1e-12:
            raise ValueError(f"sample_interval * subcarrier_spacing * N = {prod!r}, expected 1")
        active = set(self.active_set)
        if len(active) != len(self.active_set):
            raise ValueError("active_set contains duplicates")
        if any(not 0 <= k < n for k in active):
            raise ValueError("active_set index out of range")
        if 0 in active:
            raise ValueError("active_set must exclude the DC bin")
        if any((n - k) not in active for k in active):
            raise ValueError("active_set must be symmetric about DC")
        if self.modulation != "16qam":
            raise ValueError(f"unsupported modulation {self.modulation!r}")
        object.__setattr__(self, "active_set", tuple(sorted(active)))

    @classmethod
    def lte_like(
        cls,
        n_subcarriers: int = 1024,
        active_per_side: int = 300,
        cp_len: int = 63,
        sample_rate: float = 15.36e6,
        carrier_freq: float = 1.875e9,
    ) -> "OfdmConfig":
        """Build a config with ``active_per_side`` bins on each side of DC."""
        if not 0 <= active_per_side < n_subcarriers // 2:
            raise ValueError("active_per_side out of range")
        pos = range(1, active_per_side + 1)
        active = tuple(pos) + tuple(n_subcarriers - k for k in pos)
        return cls(
            n_subcarriers=n_subcarriers,
            active_set=active,
            cp_len=cp_len,
            sample_interval=1.0 / sample_rate,
            subcarrier_spacing=sample_rate / n_subcarriers,
            carrier_freq=carrier_freq,
        )

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def omega_c(self) -> float:
        return 2.0 * np.pi * self.carrier_freq

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.sample_interval

    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_subcarriers, dtype=bool)
        mask[list(self.active_set)] = True
        return mask

    def subcarrier_powers(self) -> np.ndarray:
        """Expected per-bin data power: 1 on active bins, 0 elsewhere."""
        return self.active_mask().astype(float)


@dataclass(frozen=True)
class FreqSymbol:
    bins: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TimeSymbol:
    samples: np.ndarray = field(repr=False)
    cp_len: int

    @property
    def body(self) -> np.ndarray:
        return self.samples[self.cp_len:]


def qam16(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` uniform Gray-mapped 16QAM points with unit average power."""
    bits = rng.integers(0, 4, size=(2, n))
    return (_GRAY_LEVELS[bits[0]] + 1j * _GRAY_LEVELS[bits[1]]) * QAM16_SCALE


def _check_len(x: np.ndarray, n: int | None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise ValueError("expected a 1-D block")
    if n is not None and x.shape[0] != n:
        raise ValueError(f"block length {x.shape[0]} != {n}")
    return x


def dft(block: np.ndarray, n: int | None = None) -> np.ndarray:
    """Unscaled forward DFT, optionally checking the block length against ``n``."""
    return np.fft.fft(_check_len(block, n))


def idft(bins: np.ndarray, n: int | None = None) -> np.ndarray:
    """Inverse DFT with 1/N scaling."""
    return np.fft.ifft(_check_len(bins, n))


def direct_dft(block: np.ndarray) -> np.ndarray:
    """O(N^2) reference DFT by explicit summation."""
    x = np.asarray(block, dtype=complex)
    n = x.shape[0]
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) @ x


def add_cp(body: np.ndarray, cp_len: int) -> TimeSymbol:
    body = np.asarray(body, dtype=complex)
    head = body[body.shape[0] - cp_len:] if cp_len else body[:0]
    return TimeSymbol(np.concatenate([head, body]), cp_len)


def generate_symbol(cfg: OfdmConfig, rng: np.random.Generator) -> tuple[FreqSymbol, TimeSymbol]:
    bins = np.zeros(cfg.n_subcarriers, dtype=complex)
    idx = np.asarray(cfg.active_set, dtype=int)
    bins[idx] = qam16(idx.size, rng)
    return FreqSymbol(bins), add_cp(idft(bins), cfg.cp_len)


def demodulate(time: TimeSymbol | np.ndarray, cfg: OfdmConfig) -> FreqSymbol:
    """Strip the cyclic prefix and transform the symbol body."""
    samples = time.samples if isinstance(time, TimeSymbol) else np.asarray(time, dtype=complex)
    if samples.shape[-1] != cfg.symbol_len:
        raise ValueError(f"symbol length {samples.shape[-1]} != {cfg.symbol_len}")
    return FreqSymbol(np.fft.fft(samples[..., cfg.cp_len:], axis=-1))

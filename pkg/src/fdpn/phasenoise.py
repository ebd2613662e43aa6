"""Free-running oscillator phase noise modeled as a Wiener process.

A Wiener phase with 3-dB bandwidth ``beta`` has increments
``phi(t + tau) - phi(t) ~ Normal(0, 4 pi beta tau)``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class OscillatorKind(str, enum.Enum):
    COMMON = "common"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class OscillatorScenario:
    kind: OscillatorKind
    beta: float
    tx_rx_delay: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OscillatorKind(self.kind))
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if not self.tx_rx_delay >= 0:
            raise ValueError("tx_rx_delay must be >= 0")


@dataclass(frozen=True)
class PhaseStreams:
    """Phase samples entering the sampled SI model.

    ``tx_delayed[b, n]`` is the TX phase at ``n*Ts - b*Ts - delta`` and
    ``rx[n]`` the RX phase at ``n*Ts``.
    """

    tx_delayed: np.ndarray = field(repr=False)
    rx: np.ndarray = field(repr=False)


def sample_wiener_increments(
    beta: float, durations: Sequence[float] | np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    durations = np.asarray(durations, dtype=float)
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if np.any(durations < 0):
        raise ValueError("durations must be >= 0")
    if beta == 0:
        return np.zeros(durations.shape)
    return rng.standard_normal(durations.shape) * np.sqrt(4.0 * np.pi * beta * durations)


def wiener_path(beta: float, durations: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Path values at the grid implied by ``durations``, starting from 0."""
    inc = sample_wiener_increments(beta, durations, rng)
    return np.concatenate(([0.0], np.cumsum(inc)))


def split_delay(delay: float, ts: float) -> tuple[int, float]:
    """Split ``delay`` into whole samples and a remainder in [0, ts)."""
    k = math.floor(delay / ts)
    frac = delay - k * ts
    # floor() can land one sample short when delay is an exact multiple of ts
    if frac >= ts or math.isclose(frac, ts, rel_tol=0.0, abs_tol=1e-12 * ts):
        k += 1
        frac = 0.0
    if math.isclose(frac, 0.0, rel_tol=0.0, abs_tol=1e-12 * ts):
        frac = 0.0
    return k, frac


def build_streams(
    scenario: OscillatorScenario, n: int, p: int, ts: float, rng: np.random.Generator
) -> PhaseStreams:
    """Sample TX/RX phases for ``n`` consecutive samples and tap delays 0..p."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if p < 0:
        raise ValueError("p must be >= 0")
    beta = scenario.beta
    delta = scenario.tx_rx_delay
    # tx_delayed[b, i] = tx_base[i - b + p]
    rows = np.arange(p + 1)[:, None]
    cols = np.arange(n)[None, :]
    tx_index = cols - rows + p

    if scenario.kind is OscillatorKind.INDEPENDENT:
        tx_base = wiener_path(beta, np.full(n + p - 1, ts), rng)
        rx = wiener_path(beta, np.full(n - 1, ts), rng)
        return PhaseStreams(tx_base[tx_index], rx)

    whole, frac = split_delay(delta, ts)
    # Grid index m covers TX instants m*Ts - frac and RX instants m*Ts.
    m0 = -p - whole
    count = n - m0
    if frac == 0.0:
        path = wiener_path(beta, np.full(count - 1, ts), rng)
        tx_base = path[: n + p]
        rx = path[-n:]
    else:
        durations = np.empty(2 * count - 1)
        durations[0::2] = frac
        durations[1::2] = ts - frac
        path = wiener_path(beta, durations, rng)
        a_vals = path[0::2]  # at m*Ts - frac
        b_vals = path[1::2]  # at m*Ts
        tx_base = a_vals[: n + p]
        rx = b_vals[-n:]
    return PhaseStreams(tx_base[tx_index], rx)


def remove_cpe(phases: np.ndarray) -> np.ndarray:
    """Subtract the circular mean angle of ``exp(j*phases)``."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise ValueError("empty phase vector")
    return phases - np.angle(np.mean(np.exp(1j * phases)))


def dump_phase_csv(phases: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_index", "phase_rad"])
        for i, v in enumerate(np.asarray(phases, dtype=float)):
            writer.writerow([i, f"{v:.17g}"])

"""Independent brute-force references used by the test suite.

Nothing here calls the phase-noise or analytic modules: Wiener samples come
from an explicit Brownian covariance ``4 pi beta min(s, t)`` and the DFT is an
explicit matrix product.
"""

from __future__ import annotations

import numpy as np


def brownian_samples(times: np.ndarray, beta: float, paths: int, rng: np.random.Generator) -> np.ndarray:
    """Joint samples of a Wiener phase process (variance rate 4 pi beta) at ``times``.

    Returns an array of shape ``(paths, len(times))``. Coincident instants
    share a value; the earliest instant is pinned at zero phase.
    """
    times = np.asarray(times, dtype=float)
    # merge instants that differ only by float noise
    unique, inverse = np.unique(np.round(times, 25), return_inverse=True)
    rel = unique - unique[0]
    cov = 4.0 * np.pi * beta * np.minimum.outer(rel, rel)
    w, v = np.linalg.eigh(cov)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    z = rng.standard_normal((paths, unique.size)) @ root.T
    return z[:, inverse]


def dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def phase_pair(
    kind: str, n: int, taps: list[int], beta: float, ts: float, delta: float, paths: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """TX phases at ``n Ts - b Ts - delta`` per tap (shape paths x taps x n) and RX phases at ``n Ts``."""
    grid = np.arange(n) * ts
    tx_times = np.concatenate([grid - b * ts - delta for b in taps])
    if kind == "independent":
        tx = brownian_samples(tx_times, beta, paths, rng)
        rx = brownian_samples(grid, beta, paths, rng)
    else:
        both = brownian_samples(np.concatenate([tx_times, grid]), beta, paths, rng)
        tx, rx = both[:, : tx_times.size], both[:, tx_times.size :]
    return tx.reshape(paths, len(taps), n), rx


def kernel_power_oracle(
    kind: str, n: int, b: int, beta: float, ts: float, delta: float, paths: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo ``E|J_k(b, delta)|^2`` and its standard error per bin."""
    tx, rx = phase_pair(kind, n, [b], beta, ts, delta, paths, rng)
    e = np.exp(1j * (tx[:, 0, :] - rx))
    j = e @ dft_matrix(n).T / n
    p = np.abs(j) ** 2
    return p.mean(axis=0), p.std(axis=0, ddof=1) / np.sqrt(paths)


def si_power_oracle(
    kind: str,
    n: int,
    taps: list[int],
    powers: list[float],
    sigma_l2: np.ndarray,
    beta: float,
    ts: float,
    delta: float,
    paths: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo ``E|Y_k|^2`` of the sampled SI model, circular over one body of ``n`` samples.

    Data are complex Gaussian with per-bin variance ``sigma_l2`` and taps are
    Rayleigh with the given powers; only second moments matter.
    """
    f = dft_matrix(n)
    finv = np.conj(f) / n
    scale = np.sqrt(np.asarray(sigma_l2) / 2.0)
    z = scale * (rng.standard_normal((paths, n)) + 1j * rng.standard_normal((paths, n)))
    x = z @ finv.T
    tx, rx = phase_pair(kind, n, taps, beta, ts, delta, paths, rng)
    y = np.zeros((paths, n), dtype=complex)
    for i, (b, p) in enumerate(zip(taps, powers)):
        h = np.sqrt(p / 2.0) * (rng.standard_normal(paths) + 1j * rng.standard_normal(paths))
        y += h[:, None] * np.roll(x, b, axis=1) * np.exp(1j * tx[:, i, :])
    y *= np.exp(-1j * rx)
    power = np.abs(y @ f.T) ** 2
    return power.mean(axis=0), power.std(axis=0, ddof=1) / np.sqrt(paths)

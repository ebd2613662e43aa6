"""Sample-level Monte-Carlo simulation of the full-duplex SI link.

Per trial: OFDM symbol with CP -> TX phase noise -> multipath coupling with
antenna separation -> ALC on the main tap -> RX phase noise -> DLC -> FFT.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytic
from .cancellation import apply_dlc, block_cpe, dlc_error_variance, estimate_effective_channel
from .coupling import (
    AlcErrorMode,
    CouplingProfile,
    InfeasibleAlc,
    derive_alc_factor,
    draw_channel,
    feasibility_bounds,
)
from .ofdm import OfdmConfig, demodulate, generate_symbol
from .phasenoise import OscillatorScenario, build_streams

# Trials per reduction chunk. Fixed so results do not depend on worker count.
CHUNK = 50


@dataclass(frozen=True)
class AlcSetting:
    """Whole-signal ALC suppression ``a`` (linear), or None for ideal ALC."""

    suppression: float | None = None
    error_mode: AlcErrorMode = AlcErrorMode.PURE_AMPLITUDE

    def __post_init__(self) -> None:
        object.__setattr__(self, "error_mode", AlcErrorMode(self.error_mode))
        if self.suppression is not None and not 0 < self.suppression <= 1:
            raise ValueError("ALC suppression must lie in (0, 1]")

    @property
    def is_ideal(self) -> bool:
        return self.suppression is None


@dataclass(frozen=True)
class ScenarioConfig:
    waveform: OfdmConfig
    profile: CouplingProfile
    oscillator: OscillatorScenario
    alc: AlcSetting = AlcSetting()
    dlc: float | None = None  # linear DLC suppression d; None is ideal
    trials: int = 1000
    master_seed: int = 0
    cpe_in_estimate: bool = True

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.dlc is not None and not 0 <= self.dlc <= 1:
            raise ValueError("DLC suppression must lie in [0, 1]")
        if self.profile.max_delay > self.waveform.cp_len:
            raise ValueError("channel longer than the cyclic prefix")
        if self.profile.tap_delays != tuple(range(self.profile.max_delay + 1)):
            raise ValueError("tap delays must be contiguous 0..P")
        # the oscillator delay always follows the main coupling path
        if self.oscillator.tx_rx_delay != self.profile.main_delay:
            object.__setattr__(
                self, "oscillator", replace(self.oscillator, tx_rx_delay=self.profile.main_delay)
            )

    @property
    def n_taps(self) -> int:
        return len(self.profile.tap_delays)

    def alc_main_factor(self) -> float:
        """Residual main-tap factor a' after ALC (0 when ideal)."""
        if self.alc.is_ideal:
            return 0.0
        return derive_alc_factor(self.alc.suppression, self.profile)

    def alc_suppression(self) -> float:
        """Whole-signal ALC suppression a, the best attainable one when ALC is ideal."""
        if self.alc.is_ideal:
            return feasibility_bounds(self.profile)[1]
        return self.alc.suppression

    def post_alc_powers(self) -> tuple[float, ...]:
        powers = self.profile.tap_powers
        return (powers[0] * self.alc_main_factor(), *powers[1:])

    def sigma_ee2(self) -> float:
        """Absolute per-tap DLC estimation-error variance."""
        if self.dlc is None:
            return 0.0
        a = self.alc_suppression()
        if a <= 0:
            raise InfeasibleAlc("no reflections: ALC suppression bound is zero")
        rel = dlc_error_variance(self.dlc, a, self.profile.max_delay)
        return rel * reference_power(self)

    def check_feasible(self) -> None:
        """Raise the coupling-model error if this point cannot be realized."""
        self.alc_main_factor()
        self.sigma_ee2()


@dataclass(frozen=True)
class McResult:
    mean_pre: np.ndarray = field(repr=False)
    mean_post: np.ndarray = field(repr=False)
    stderr_pre: np.ndarray = field(repr=False)
    stderr_post: np.ndarray = field(repr=False)
    inband_pre: np.ndarray = field(repr=False)   # per-trial active-bin means
    inband_post: np.ndarray = field(repr=False)
    trials_run: int
    reference_power: float

    def inband_db(self, post: bool = True) -> float:
        samples = self.inband_post if post else self.inband_pre
        with np.errstate(divide="ignore"):
            return float(10.0 * np.log10(np.mean(samples) / self.reference_power))

    def inband_stderr_db(self, post: bool = True) -> float:
        samples = self.inband_post if post else self.inband_pre
        mean = float(np.mean(samples))
        if samples.size < 2 or mean <= 0:
            return 0.0
        se = float(np.std(samples, ddof=1)) / math.sqrt(samples.size)
        return 10.0 / math.log(10.0) * se / mean

    def spectrum(self, post: bool = True) -> analytic.PowerSpectrum:
        return analytic.PowerSpectrum(self.mean_post if post else self.mean_pre, self.reference_power)


def reference_power(cfg: ScenarioConfig) -> float:
    """Mean active-bin SI power without any cancellation (0 dB reference)."""
    return cfg.profile.total_power * float(np.mean(cfg.waveform.subcarrier_powers()[list(cfg.waveform.active_set)]))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial: SeedSequence(master_seed) spawn key (trial_index,)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial_index,)))


def run_trial(cfg: ScenarioConfig, trial_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Return per-subcarrier ``(|Y_k|^2, |U_k|^2)`` for one trial."""
    rng = trial_rng(cfg.master_seed, trial_index)
    wf = cfg.waveform
    prof = cfg.profile
    ts = wf.sample_interval
    p = prof.max_delay

    _, tx = generate_symbol(wf, rng)
    x = tx.samples
    streams = build_streams(cfg.oscillator, x.shape[0], p, ts, rng)
    channel = draw_channel(
        prof,
        rng,
        post_alc=True,
        a_prime=cfg.alc_main_factor(),
        mode=cfg.alc.error_mode,
        omega_c=wf.omega_c,
    )
    delays = np.asarray(prof.tap_delays)
    rotations = np.exp(-1j * wf.omega_c * (delays * ts + prof.main_delay))
    h_eff = channel.taps * rotations

    rx_rot = np.exp(-1j * streams.rx)
    y = np.zeros(x.shape, dtype=complex)
    for b, h in zip(prof.tap_delays, h_eff):
        if h != 0:
            y += h * np.roll(x, b) * np.exp(1j * streams.tx_delayed[b])
    y *= rx_rot

    cp = wf.cp_len
    cpe = block_cpe(streams.tx_delayed[0, cp:], streams.rx[cp:]) if cfg.cpe_in_estimate else 1.0
    est = estimate_effective_channel(channel, rotations, cpe, cfg.sigma_ee2(), rng)
    u = apply_dlc(y, x, est)

    both = demodulate(np.stack([y, u]), wf).bins
    power = both.real**2 + both.imag**2
    return power[0], power[1]


def _run_chunk(args: tuple[ScenarioConfig, int, int]) -> tuple[np.ndarray, ...]:
    cfg, start, stop = args
    active = np.asarray(cfg.waveform.active_set)
    n = cfg.waveform.n_subcarriers
    s_pre, s_post = np.zeros(n), np.zeros(n)
    q_pre, q_post = np.zeros(n), np.zeros(n)
    ib_pre = np.empty(stop - start)
    ib_post = np.empty(stop - start)
    for i, t in enumerate(range(start, stop)):
        pre, post = run_trial(cfg, t)
        s_pre += pre
        s_post += post
        q_pre += pre * pre
        q_post += post * post
        ib_pre[i] = pre[active].mean()
        ib_post[i] = post[active].mean()
    return s_pre, s_post, q_pre, q_post, ib_pre, ib_post


def _stderr(total: np.ndarray, total_sq: np.ndarray, n: int) -> np.ndarray:
    if n < 2:
        return np.zeros_like(total)
    mean = total / n
    var = np.maximum(total_sq - n * mean * mean, 0.0) / (n - 1)
    return np.sqrt(var / n)


def run_monte_carlo(
    cfg: ScenarioConfig,
    trials: int | None = None,
    master_seed: int | None = None,
    workers: int = 1,
) -> McResult:
    """Average ``trials`` independent trials.

    Trials are reduced in fixed chunks of ``CHUNK`` in index order, so the
    result is bit-identical for any ``workers``.
    """
    if trials is not None or master_seed is not None:
        cfg = replace(
            cfg,
            trials=cfg.trials if trials is None else trials,
            master_seed=cfg.master_seed if master_seed is None else master_seed,
        )
    cfg.check_feasible()
    n_trials = cfg.trials
    jobs = [(cfg, s, min(s + CHUNK, n_trials)) for s in range(0, n_trials, CHUNK)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]

    n = cfg.waveform.n_subcarriers
    sums = [np.zeros(n) for _ in range(4)]
    for part in parts:
        for acc, val in zip(sums, part[:4]):
            acc += val
    s_pre, s_post, q_pre, q_post = sums
    return McResult(
        mean_pre=s_pre / n_trials,
        mean_post=s_post / n_trials,
        stderr_pre=_stderr(s_pre, q_pre, n_trials),
        stderr_post=_stderr(s_post, q_post, n_trials),
        inband_pre=np.concatenate([part[4] for part in parts]),
        inband_post=np.concatenate([part[5] for part in parts]),
        trials_run=n_trials,
        reference_power=reference_power(cfg),
    )


def analytic_spectra(cfg: ScenarioConfig, method: str = "direct") -> tuple[analytic.PowerSpectrum, analytic.PowerSpectrum]:
    """Closed-form ``(E|Y_k|^2, E|U_k|^2)`` for the same scenario."""
    cfg.check_feasible()
    wf = cfg.waveform
    args = (
        wf.n_subcarriers,
        wf.sample_interval,
        cfg.profile.tap_delays,
        cfg.post_alc_powers(),
        cfg.oscillator,
        wf.subcarrier_powers(),
    )
    ref = reference_power(cfg)
    pre = analytic.si_power_pre_dlc(*args, reference_power=ref, method=method)
    post = analytic.si_power_post_dlc(*args, cfg.sigma_ee2(), reference_power=ref, method=method)
    return pre, post


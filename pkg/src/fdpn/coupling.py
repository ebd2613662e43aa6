"""SI coupling channel: tapped-delay-line profile, antenna separation and ALC algebra.

All tap powers are absolute and normalized so that direct lossless coupling
between the antennas has unit power.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 2.998e8

CANONICAL_DELAYS = (0, 1, 2, 3, 4)
CANONICAL_REFLECTED_DB = (-65.0, -70.0, None, -75.0)
CANONICAL_SEPARATION_DB = 30.0
CANONICAL_MAIN_DELAY = 6.6713e-10


class InfeasibleSeparation(ValueError):
    """Requested antenna separation cannot be met with the given reflections."""


class InfeasibleAlc(ValueError):
    """Requested ALC suppression cannot be met by cancelling the main tap alone."""


class AlcErrorMode(str, enum.Enum):
    PURE_AMPLITUDE = "pure_amplitude"
    PURE_PHASE = "pure_phase"
    SPLIT = "split"


def db_to_lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def lin_to_db(lin: float) -> float:
    return 10.0 * math.log10(lin)


@dataclass(frozen=True)
class CouplingProfile:
    tap_delays: tuple[int, ...]
    tap_powers: tuple[float, ...]
    separation: float
    main_delay: float

    def __post_init__(self) -> None:
        delays = tuple(int(d) for d in self.tap_delays)
        powers = tuple(float(p) for p in self.tap_powers)
        if len(delays) != len(powers) or not delays:
            raise ValueError("tap_delays and tap_powers must be nonempty and aligned")
        if delays[0] != 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("tap_delays must start at 0 and be strictly increasing")
        if any(p < 0 for p in powers):
            raise ValueError("tap_powers must be >= 0")
        if not 0 < self.separation <= 1:
            raise ValueError("separation must lie in (0, 1]")
        if not self.main_delay >= 0:
            raise ValueError("main_delay must be >= 0")
        object.__setattr__(self, "tap_delays", delays)
        object.__setattr__(self, "tap_powers", powers)

    @classmethod
    def from_separation(
        cls,
        separation: float,
        reflected_delays: Sequence[int],
        reflected_powers: Sequence[float],
        main_delay: float,
        fill_gaps: bool = True,
    ) -> "CouplingProfile":
        """Build a profile whose main tap realizes whole-signal separation ``separation``.

        Gaps in the reflected delays become zero-power taps when ``fill_gaps``.
        """
        refl = dict(zip((int(d) for d in reflected_delays), (float(p) for p in reflected_powers)))
        if 0 in refl:
            raise ValueError("reflected taps must have delay >= 1")
        main = derive_main_tap_factor(separation, list(refl.values()))
        max_delay = max(refl, default=0)
        delays = range(max_delay + 1) if fill_gaps else [0, *sorted(refl)]
        powers = [main if b == 0 else refl.get(b, 0.0) for b in delays]
        return cls(tuple(delays), tuple(powers), separation, main_delay)

    @classmethod
    def canonical(cls) -> "CouplingProfile":
        delays = [b for b, p in zip(CANONICAL_DELAYS[1:], CANONICAL_REFLECTED_DB) if p is not None]
        powers = [db_to_lin(p) for p in CANONICAL_REFLECTED_DB if p is not None]
        return cls.from_separation(
            db_to_lin(-CANONICAL_SEPARATION_DB), delays, powers, CANONICAL_MAIN_DELAY
        )

    @property
    def max_delay(self) -> int:
        return self.tap_delays[-1]

    @property
    def main_power(self) -> float:
        return self.tap_powers[0]

    @property
    def reflected_power(self) -> float:
        return float(sum(self.tap_powers[1:]))

    @property
    def total_power(self) -> float:
        return float(sum(self.tap_powers))

    def scale_reflections(self, delta_db: float) -> "CouplingProfile":
        """Scale reflected taps by ``delta_db`` and re-derive the main tap from the separation."""
        g = db_to_lin(delta_db)
        refl = [p * g for p in self.tap_powers[1:]]
        main = derive_main_tap_factor(self.separation, refl)
        return replace(self, tap_powers=(main, *refl))

    def with_main_delay(self, main_delay: float) -> "CouplingProfile":
        return replace(self, main_delay=main_delay)


@dataclass(frozen=True)
class AlcRealization:
    mode: AlcErrorMode
    amplitude_error: float
    delay_error: float
    residual: complex


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray = field(repr=False)
    tap_delays: tuple[int, ...]


def derive_main_tap_factor(c: float, reflected_powers: Sequence[float]) -> float:
    """Main-tap power that gives whole-signal separation ``c``."""
    if not 0 < c <= 1:
        raise ValueError("separation c must lie in (0, 1]")
    s = float(sum(reflected_powers))
    c_min = s / (1.0 + s)
    if c <= c_min:
        raise InfeasibleSeparation(f"separation {c!r} not above bound {c_min!r}")
    return c + (c - 1.0) * s


def derive_alc_factor(a: float, profile: CouplingProfile) -> float:
    """Main-tap suppression needed for whole-signal ALC suppression ``a``."""
    if not 0 < a <= 1:
        raise ValueError("ALC suppression a must lie in (0, 1]")
    s = profile.reflected_power
    h0 = profile.main_power
    if h0 <= 0:
        raise InfeasibleAlc("main tap has zero power")
    a_min = s / (h0 + s)
    if a <= a_min:
        raise InfeasibleAlc(f"ALC suppression {a!r} not above bound {a_min!r}")
    return (a * h0 + (a - 1.0) * s) / h0


def feasibility_bounds(profile: CouplingProfile) -> tuple[float, float]:
    """Return ``(c_min, a_min)``: the smallest achievable separation and ALC factors."""
    s = profile.reflected_power
    c_min = s / (1.0 + s)
    denom = profile.main_power + s
    a_min = s / denom if denom > 0 else 0.0
    return c_min, a_min


def max_alc_db(profile: CouplingProfile) -> float:
    _, a_min = feasibility_bounds(profile)
    return math.inf if a_min == 0 else -lin_to_db(a_min)


def realize_alc_residual(
    alpha_pre: float,
    a_prime: float,
    mode: AlcErrorMode | str = AlcErrorMode.PURE_AMPLITUDE,
    omega_c: float = 2 * math.pi * 1.875e9,
) -> AlcRealization:
    """Pick amplitude/delay errors so that ``|alpha_0|^2 = a_prime * alpha_pre^2``.

    ``alpha_0 = alpha - (alpha - alpha_e) * exp(-j omega_c delta_e)`` with real ``alpha``.
    """
    mode = AlcErrorMode(mode)
    if not 0 <= a_prime <= 1:
        raise ValueError("a_prime must lie in [0, 1]")
    alpha = float(alpha_pre)
    # Half-angle form: 1 - cos(x) = 2 sin^2(x/2) keeps tiny a' exact.
    half = 0.0
    if mode is AlcErrorMode.PURE_AMPLITUDE:
        alpha_e = alpha * math.sqrt(a_prime)
    elif mode is AlcErrorMode.PURE_PHASE:
        alpha_e = 0.0
        half = math.asin(math.sqrt(a_prime) / 2.0)
    else:
        # |alpha_0|^2 = alpha_e^2 + 4 alpha (alpha - alpha_e) sin^2(x/2)
        alpha_e = alpha * math.sqrt(a_prime / 2.0)
        if alpha > 0 and a_prime > 0:
            half = math.asin(math.sqrt(a_prime / (8.0 * (1.0 - math.sqrt(a_prime / 2.0)))))
    delay_e = 2.0 * half / omega_c
    x = 2.0 * half
    residual = 2j * alpha * math.sin(half) * complex(math.cos(half), -math.sin(half)) + alpha_e * complex(
        math.cos(x), -math.sin(x)
    )
    return AlcRealization(mode, alpha_e, delay_e, residual)


def complex_normal(shape, power, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Normal draws with ``E|x|^2 = power``."""
    scale = np.sqrt(np.asarray(power, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(
    profile: CouplingProfile,
    rng: np.random.Generator,
    *,
    post_alc: bool = False,
    a_prime: float = 1.0,
    mode: AlcErrorMode | str = AlcErrorMode.PURE_AMPLITUDE,
    omega_c: float = 2 * math.pi * 1.875e9,
) -> ChannelRealization:
    """Draw one WSSUS realization: Rayleigh reflections, random-phase main tap."""
    powers = np.asarray(profile.tap_powers)
    taps = np.empty(powers.size, dtype=complex)
    taps[1:] = complex_normal(powers.size - 1, powers[1:], rng)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    alpha_pre = math.sqrt(powers[0])
    if post_alc:
        main = realize_alc_residual(alpha_pre, a_prime, mode, omega_c).residual
    else:
        main = alpha_pre
    taps[0] = main * np.exp(1j * theta)
    return ChannelRealization(taps, profile.tap_delays)


def distance_scaled_profile(
    profile: CouplingProfile,
    distance: float,
    ref_distance: float,
    sample_interval: float = 1.0 / 15.36e6,
) -> CouplingProfile:
    """Move the antennas from ``ref_distance`` to ``distance`` under free-space loss.

    Tap ``b`` is a path of length ``ref_distance + c0*b*Ts`` at the reference
    geometry; every path grows by ``distance - ref_distance`` and its power
    falls with the squared length ratio. Tap sample delays are unchanged and
    the main delay becomes ``distance / c0``.
    """
    if not (distance >= ref_distance > 0):
        raise ValueError("need distance >= ref_distance > 0")
    extra = distance - ref_distance
    powers = []
    for b, p in zip(profile.tap_delays, profile.tap_powers):
        length = ref_distance + SPEED_OF_LIGHT * b * sample_interval
        ratio = length / (length + extra)
        powers.append(p * ratio * ratio)
    return replace(profile, tap_powers=tuple(powers), main_delay=distance / SPEED_OF_LIGHT)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdpn.coupling import (
    SPEED_OF_LIGHT,
    AlcErrorMode,
    CouplingProfile,
    InfeasibleAlc,
    InfeasibleSeparation,
    db_to_lin,
    derive_alc_factor,
    derive_main_tap_factor,
    distance_scaled_profile,
    draw_channel,
    feasibility_bounds,
    max_alc_db,
    realize_alc_residual,
)

REFLECTED = [10**-6.5, 1e-7, 10**-7.5]
SIGMA = sum(REFLECTED)
OMEGA_C = 2 * math.pi * 1.875e9


@pytest.fixture(scope="module")
def canonical():
    return CouplingProfile.canonical()


def test_reflected_sum():
    assert SIGMA == pytest.approx(4.478505e-7, rel=1e-6)


def test_main_tap_factor():
    c_prime = derive_main_tap_factor(1e-3, REFLECTED)
    assert c_prime == pytest.approx(1e-3 + (1e-3 - 1) * SIGMA, rel=1e-15)
    assert c_prime == pytest.approx(9.99552e-4, rel=1e-6)
    assert derive_main_tap_factor(1e-3, []) == 1e-3
    with pytest.raises(InfeasibleSeparation):
        derive_main_tap_factor(SIGMA / (1 + SIGMA) * 0.99, REFLECTED)


def test_canonical_profile(canonical):
    assert canonical.tap_delays == (0, 1, 2, 3, 4)
    assert canonical.tap_powers[3] == 0.0
    assert canonical.main_power == pytest.approx(9.99552597e-4, rel=1e-8)
    # whole-signal separation is exactly the requested 30 dB
    assert canonical.total_power == pytest.approx(1e-3 * (1 + SIGMA), rel=1e-14)
    assert 10 * math.log10(canonical.total_power) == pytest.approx(-30.0, abs=1e-5)


def test_alc_factor(canonical):
    a_prime = derive_alc_factor(1e-3, canonical)
    h0 = canonical.main_power
    assert a_prime == pytest.approx((1e-3 * h0 + (1e-3 - 1) * SIGMA) / h0, rel=1e-14)
    assert a_prime == pytest.approx(5.52397e-4, rel=1e-5)
    assert -10 * math.log10(a_prime) == pytest.approx(32.58, abs=0.01)
    assert derive_alc_factor(1.0, canonical) == pytest.approx(1.0)
    with pytest.raises(InfeasibleAlc):
        derive_alc_factor(4e-4, canonical)


def test_feasibility_bounds(canonical):
    c_min, a_min = feasibility_bounds(canonical)
    assert c_min == pytest.approx(SIGMA / (1 + SIGMA), rel=1e-14)
    assert c_min == pytest.approx(4.4785e-7, rel=1e-4)
    assert a_min == pytest.approx(SIGMA / (canonical.main_power + SIGMA), rel=1e-14)
    assert a_min == pytest.approx(4.4785e-4, rel=1e-4)
    assert max_alc_db(canonical) == pytest.approx(33.49, abs=0.01)
    single = CouplingProfile((0,), (1e-3,), 1e-3, 0.0)
    assert feasibility_bounds(single) == (0.0, 0.0)
    assert max_alc_db(single) == math.inf


def test_separation_plus_alc_composition(canonical):
    # whole-signal c then a: post-ALC channel power is c*a of direct coupling
    a_prime = derive_alc_factor(1e-3, canonical)
    total = canonical.main_power * a_prime + canonical.reflected_power
    assert 10 * math.log10(total) == pytest.approx(-60.0, abs=0.01)
    assert total == pytest.approx(1e-6 * (1 + SIGMA), rel=1e-12)


def test_scale_reflections(canonical):
    same = canonical.scale_reflections(0.0)
    np.testing.assert_allclose(same.tap_powers, canonical.tap_powers, rtol=1e-15)
    up = canonical.scale_reflections(3.0)
    assert up.reflected_power == pytest.approx(SIGMA * db_to_lin(3.0), rel=1e-14)
    assert up.total_power == pytest.approx(1e-3 * (1 + up.reflected_power), rel=1e-13)
    # the ALC bound tightens past 33 dB once reflections grow by ~3.5 dB
    assert max_alc_db(canonical.scale_reflections(3.4)) > 30.0
    assert max_alc_db(canonical.scale_reflections(3.6)) < 30.0


def test_profile_validation():
    with pytest.raises(ValueError):
        CouplingProfile((1, 2), (1.0, 1.0), 0.5, 0.0)
    with pytest.raises(ValueError):
        CouplingProfile((0, 1), (1.0, -1.0), 0.5, 0.0)
    with pytest.raises(ValueError):
        CouplingProfile.from_separation(1e-3, [0], [1e-7], 0.0)


@pytest.mark.parametrize("mode", list(AlcErrorMode))
def test_residual_zero(mode):
    assert realize_alc_residual(1.0, 0.0, mode).residual == 0


def test_residual_examples():
    amp = realize_alc_residual(1.0, 5.5255e-4, "pure_amplitude")
    assert amp.delay_error == 0.0
    assert abs(amp.residual) == pytest.approx(0.023506, abs=5e-7)
    phase = realize_alc_residual(1.0, 5.5255e-4, "pure_phase", OMEGA_C)
    assert phase.amplitude_error == 0.0
    assert phase.delay_error == pytest.approx(math.acos(1 - 5.5255e-4 / 2) / OMEGA_C, rel=1e-6)
    assert phase.delay_error == pytest.approx(1.995e-12, rel=1e-3)
    assert abs(phase.residual) == pytest.approx(math.sqrt(5.5255e-4), abs=1e-9)


def _alpha0(alpha, rel):
    # direct evaluation of the residual formula
    return alpha - (alpha - rel.amplitude_error) * np.exp(-1j * OMEGA_C * rel.delay_error)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-12, 1.0), st.sampled_from(list(AlcErrorMode)), st.floats(1e-3, 10.0))
def test_residual_power_exact(a_prime, mode, alpha):
    real = realize_alc_residual(alpha, a_prime, mode, OMEGA_C)
    assert abs(real.residual) ** 2 / alpha**2 == pytest.approx(a_prime, rel=1e-12)
    # the unrearranged formula cancels catastrophically for tiny angles
    assert abs(_alpha0(alpha, real)) ** 2 / alpha**2 == pytest.approx(a_prime, rel=1e-6)


def test_residual_power_grid():
    rng = np.random.default_rng(0)
    for a_prime in 10 ** rng.uniform(-8, 0, 10_000):
        for mode in AlcErrorMode:
            r = realize_alc_residual(1.0, a_prime, mode, OMEGA_C)
            assert abs(abs(r.residual) ** 2 - a_prime) <= 1e-12 * a_prime


def test_split_mode_halves_power():
    r = realize_alc_residual(1.0, 1e-3, "split", OMEGA_C)
    assert r.amplitude_error**2 == pytest.approx(5e-4, rel=1e-12)
    assert r.delay_error > 0


def test_draw_channel_powers(canonical):
    rng = np.random.default_rng(0)
    taps = np.array([draw_channel(canonical, rng).taps for _ in range(100_000)])
    power = np.mean(np.abs(taps) ** 2, axis=0)
    ref = np.asarray(canonical.tap_powers)
    np.testing.assert_allclose(power[[0, 1, 2, 4]], ref[[0, 1, 2, 4]], rtol=0.02)
    assert power[3] == 0.0
    # main tap has fixed magnitude and uniform phase
    np.testing.assert_allclose(np.abs(taps[:, 0]), math.sqrt(ref[0]), rtol=1e-12)
    norm = taps[:, [0, 1, 2, 4]] / np.sqrt(ref[[0, 1, 2, 4]])
    corr = np.abs(norm.conj().T @ norm) / len(norm)
    off = corr[~np.eye(4, dtype=bool)]
    assert off.max() < 0.01


def test_draw_channel_post_alc(canonical):
    rng = np.random.default_rng(1)
    ch = draw_channel(canonical, rng, post_alc=True, a_prime=0.0)
    assert ch.taps[0] == 0
    ch = draw_channel(canonical, rng, post_alc=True, a_prime=1e-3)
    assert abs(ch.taps[0]) ** 2 == pytest.approx(canonical.main_power * 1e-3, rel=1e-12)
    single = CouplingProfile((0,), (2e-3,), 1e-3, 0.0)
    assert abs(draw_channel(single, rng).taps[0]) ** 2 == pytest.approx(2e-3)


def test_distance_scaling(canonical):
    same = distance_scaled_profile(canonical, 0.2, 0.2)
    np.testing.assert_allclose(same.tap_powers, canonical.tap_powers, rtol=1e-15)
    ten = distance_scaled_profile(canonical, 2.0, 0.2)
    assert ten.main_power == pytest.approx(canonical.main_power / 100, rel=1e-12)
    far = distance_scaled_profile(canonical, 20.0, 0.2)
    assert 10 * math.log10(far.main_power / canonical.main_power) == pytest.approx(-40.0, abs=1e-9)
    assert far.main_delay == pytest.approx(20.0 / SPEED_OF_LIGHT)
    assert far.main_delay == pytest.approx(66.7e-9, rel=1e-3)
    # longer reflected paths lose less power to the same extra distance
    loss = np.array(far.tap_powers)[[0, 1, 2, 4]] / np.array(canonical.tap_powers)[[0, 1, 2, 4]]
    assert np.all(np.diff(loss) > 0)
    assert far.tap_delays == canonical.tap_delays
    with pytest.raises(ValueError):
        distance_scaled_profile(canonical, 0.1, 0.2)

import numpy as np
import pytest

from fdpn.phasenoise import (
    OscillatorKind,
    OscillatorScenario,
    build_streams,
    dump_phase_csv,
    remove_cpe,
    sample_wiener_increments,
    split_delay,
    wiener_path,
)

TS = 1 / 15.36e6
BETA = 50.0


def test_zero_beta_is_silent():
    out = sample_wiener_increments(0.0, np.full(10, TS), np.random.default_rng(0))
    assert not np.any(out)
    out = sample_wiener_increments(BETA, np.zeros(5), np.random.default_rng(0))
    assert not np.any(out)


@pytest.mark.parametrize("beta, durations", [(-1.0, [TS]), (BETA, [-TS])])
def test_invalid_increment_args(beta, durations):
    with pytest.raises(ValueError):
        sample_wiener_increments(beta, np.asarray(durations), np.random.default_rng(0))


def test_increment_variance():
    draws = sample_wiener_increments(BETA, np.full(1_000_000, TS), np.random.default_rng(1))
    expected = 4 * np.pi * BETA * TS
    assert expected == pytest.approx(4.0906e-5, rel=1e-4)
    assert np.var(draws) == pytest.approx(expected, rel=0.01)


def test_variance_additivity():
    rng = np.random.default_rng(2)
    t1, t2 = 3 * TS, 5 * TS
    pairs = sample_wiener_increments(BETA, np.tile([t1, t2], 1_000_000), rng).reshape(-1, 2)
    merged = pairs.sum(axis=1)
    assert np.var(merged) == pytest.approx(4 * np.pi * BETA * (t1 + t2), rel=0.02)


def test_disjoint_intervals_uncorrelated():
    draws = sample_wiener_increments(BETA, np.full(2_000_000, TS), np.random.default_rng(3)).reshape(-1, 2)
    assert abs(np.corrcoef(draws.T)[0, 1]) < 0.01


@pytest.mark.parametrize("lag", [1, 10, 100])
def test_characteristic_function(lag):
    tau = lag * TS
    d = sample_wiener_increments(BETA, np.full(1_000_000, tau), np.random.default_rng(lag))
    c = np.cos(d)
    se = c.std(ddof=1) / np.sqrt(c.size)
    assert abs(c.mean() - np.exp(-2 * np.pi * BETA * tau)) <= 3 * se + 1e-15


def test_wiener_path_starts_at_zero():
    path = wiener_path(BETA, np.full(9, TS), np.random.default_rng(0))
    assert path.shape == (10,) and path[0] == 0.0


def test_split_delay():
    assert split_delay(0.0, TS) == (0, 0.0)
    whole, frac = split_delay(2.5 * TS, TS)
    assert whole == 2 and frac == pytest.approx(0.5 * TS)
    assert split_delay(3 * TS, TS) == (3, 0.0)


def test_common_zero_delay_identity():
    s = build_streams(OscillatorScenario("common", 1e3, 0.0), 200, 4, TS, np.random.default_rng(0))
    np.testing.assert_array_equal(s.rx, s.tx_delayed[0])


def test_tap_alignment():
    for kind in OscillatorKind:
        s = build_streams(OscillatorScenario(kind, BETA, 0.0), 50, 3, TS, np.random.default_rng(0))
        assert s.tx_delayed.shape == (4, 50)
        # row b is row 0 shifted by b samples
        np.testing.assert_array_equal(s.tx_delayed[2, 2:], s.tx_delayed[0, :-2])


def test_integer_delay_matches_plain_grid():
    n, p = 64, 4
    shifted = build_streams(OscillatorScenario("common", BETA, 3 * TS), n, p, TS, np.random.default_rng(5))
    rng = np.random.default_rng(5)
    path = wiener_path(BETA, np.full(n + p + 3 - 1, TS), rng)
    np.testing.assert_array_equal(shifted.rx, path[-n:])
    np.testing.assert_array_equal(shifted.tx_delayed[0], path[p : p + n])


def test_common_fractional_delay_variance():
    delta = 6.6713e-10
    paths = 1_000_000 // 16
    rng = np.random.default_rng(11)
    diffs = np.concatenate(
        [
            (lambda s: s.tx_delayed[0] - s.rx)(build_streams(OscillatorScenario("common", BETA, delta), 16, 0, TS, rng))
            for _ in range(paths)
        ]
    )
    var = np.mean(diffs**2)
    se = np.std(diffs**2, ddof=1) / np.sqrt(diffs.size)
    assert 4 * np.pi * BETA * delta == pytest.approx(4.19e-7, rel=1e-3)
    assert abs(var - 4 * np.pi * BETA * delta) <= 3 * se


def test_independent_streams_are_separate():
    s = build_streams(OscillatorScenario("independent", BETA, 0.0), 100, 0, TS, np.random.default_rng(0))
    assert not np.array_equal(s.rx, s.tx_delayed[0])
    assert s.rx[0] == 0.0


def test_remove_cpe():
    np.testing.assert_allclose(remove_cpe(np.full(8, 0.7)), 0.0, atol=1e-15)
    ramp = np.linspace(-1e-3, 3e-3, 101)
    out = remove_cpe(ramp)
    assert abs(np.angle(np.mean(np.exp(1j * out)))) < 1e-12
    np.testing.assert_allclose(out, ramp - ramp.mean(), atol=1e-9)
    with pytest.raises(ValueError):
        remove_cpe(np.array([]))


def test_scenario_validation():
    with pytest.raises(ValueError):
        OscillatorScenario("common", -1.0)
    with pytest.raises(ValueError):
        OscillatorScenario("common", 1.0, -1e-9)
    with pytest.raises(ValueError):
        OscillatorScenario("shared", 1.0)


def test_dump_phase_csv(tmp_path):
    path = tmp_path / "phase.csv"
    phases = np.array([0.0, 1 / 3, -2.5e-7])
    dump_phase_csv(phases, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "sample_index,phase_rad"
    assert [float(line.split(",")[1]) for line in lines[1:]] == phases.tolist()

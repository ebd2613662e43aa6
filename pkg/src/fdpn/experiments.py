"""Scenario presets, parameter sweeps, JSON scenario files and CSV output."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import analytic
from .coupling import (
    AlcErrorMode,
    CouplingProfile,
    InfeasibleAlc,
    InfeasibleSeparation,
    db_to_lin,
    distance_scaled_profile,
)
from .ofdm import OfdmConfig
from .phasenoise import OscillatorKind, OscillatorScenario
from .simulator import AlcSetting, McResult, ScenarioConfig, analytic_spectra, reference_power, run_monte_carlo

REF_DISTANCE = 0.2
FIG_BETA = 50.0

SWEEP_HEADER = (
    "axis_name",
    "axis_value",
    "preset",
    "oscillator",
    "analytic_inband_db",
    "sim_inband_db",
    "sim_stderr_db",
    "trials",
    "feasible",
)
SPECTRUM_HEADER = ("subcarrier_index", "analytic_db", "sim_mean_db", "sim_stderr_db")


class Axis(str, enum.Enum):
    BETA = "beta"
    CHANNEL_DELTA_DB = "channel_delta_db"
    DLC_DB = "dlc_db"
    ALC_DB = "alc_db"
    TX_RX_DELAY = "tx_rx_delay"
    DISTANCE = "distance"


class Preset(str, enum.Enum):
    PRACTICAL = "practical"
    IDEAL = "ideal"


Variant = tuple[Preset, OscillatorKind]

ALL_VARIANTS: tuple[Variant, ...] = tuple(
    (p, k) for p in Preset for k in (OscillatorKind.COMMON, OscillatorKind.INDEPENDENT)
)


def base_config(
    preset: Preset | str,
    kind: OscillatorKind | str,
    beta: float = FIG_BETA,
    trials: int = 1000,
    seed: int = 0,
) -> ScenarioConfig:
    """Canonical waveform and channel with the Practical or Ideal cancellation setting."""
    preset = Preset(preset)
    profile = CouplingProfile.canonical()
    if preset is Preset.PRACTICAL:
        alc, dlc = AlcSetting(db_to_lin(-30.0)), db_to_lin(-50.0)
    else:
        alc, dlc = AlcSetting(None), None
    return ScenarioConfig(
        waveform=OfdmConfig.lte_like(),
        profile=profile,
        oscillator=OscillatorScenario(kind, beta, profile.main_delay),
        alc=alc,
        dlc=dlc,
        trials=trials,
        master_seed=seed,
    )


@dataclass(frozen=True)
class SweepSpec:
    name: str
    axis: Axis
    points: tuple[float, ...]
    variants: tuple[Variant, ...]
    beta: float = FIG_BETA
    spectra: bool = False

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("sweep needs at least one point")
        diffs = np.diff(self.points)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep points must be strictly monotone")

    def config(self, value: float, variant: Variant, trials: int = 1000, seed: int = 0) -> ScenarioConfig:
        """Scenario for one (point, variant); may raise InfeasibleAlc/InfeasibleSeparation."""
        preset, kind = variant
        cfg = base_config(preset, kind, self.beta, max(trials, 1), seed)
        return apply_axis(cfg, self.axis, value)


def apply_axis(cfg: ScenarioConfig, axis: Axis, value: float) -> ScenarioConfig:
    axis = Axis(axis)
    if axis is Axis.BETA:
        return replace(cfg, oscillator=replace(cfg.oscillator, beta=value))
    if axis is Axis.CHANNEL_DELTA_DB:
        return replace(cfg, profile=cfg.profile.scale_reflections(value))
    if axis is Axis.DLC_DB:
        return replace(cfg, dlc=db_to_lin(-value))
    if axis is Axis.ALC_DB:
        return replace(cfg, alc=replace(cfg.alc, suppression=db_to_lin(-value)))
    if axis is Axis.TX_RX_DELAY:
        return replace(cfg, profile=cfg.profile.with_main_delay(value))
    if axis is Axis.DISTANCE:
        profile = distance_scaled_profile(cfg.profile, value, REF_DISTANCE, cfg.waveform.sample_interval)
        return replace(cfg, profile=profile)
    raise ValueError(f"unknown axis {axis!r}")


def _fig5_grid() -> tuple[float, ...]:
    return (0.0, *np.logspace(-1.0, 3.0, 41).tolist())


PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10")


def preset(name: str) -> SweepSpec:
    """Sweep definition for one of the figure presets."""
    both = (OscillatorKind.COMMON, OscillatorKind.INDEPENDENT)
    practical = tuple((Preset.PRACTICAL, k) for k in both)
    ideal = tuple((Preset.IDEAL, k) for k in both)
    ts = OfdmConfig.lte_like().sample_interval
    if name == "fig3":
        return SweepSpec(name, Axis.BETA, (FIG_BETA,), practical, spectra=True)
    if name == "fig4":
        return SweepSpec(name, Axis.BETA, (FIG_BETA,), ideal, spectra=True)
    if name == "fig5":
        return SweepSpec(name, Axis.BETA, _fig5_grid(), ALL_VARIANTS)
    if name == "fig6":
        points = tuple(float(v) for v in np.arange(-10.0, 5.0 + 1e-9, 0.5))
        return SweepSpec(name, Axis.CHANNEL_DELTA_DB, points, ALL_VARIANTS)
    if name == "fig7":
        points = tuple(float(v) for v in np.arange(0.0, 80.0 + 1e-9, 5.0))
        return SweepSpec(name, Axis.DLC_DB, points, ALL_VARIANTS)
    if name == "fig8":
        points = tuple(float(v) for v in np.arange(0.0, 33.0 + 1e-9, 1.0))
        return SweepSpec(name, Axis.ALC_DB, points, ALL_VARIANTS)
    if name == "fig9":
        points = tuple(np.geomspace(6.6713e-10, ts, 21).tolist())
        return SweepSpec(name, Axis.TX_RX_DELAY, points, ALL_VARIANTS)
    if name == "fig10":
        points = tuple(np.geomspace(REF_DISTANCE, 20.0, 21).tolist())
        return SweepSpec(name, Axis.DISTANCE, points, ideal)
    raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")


@dataclass
class SweepRow:
    axis_name: str
    axis_value: float
    preset: str
    oscillator: str
    analytic_inband_db: float | None
    sim_inband_db: float | None
    sim_stderr_db: float | None
    trials: int
    feasible: bool
    reference_power: float | None = None

    def total_suppression_db(self) -> float | None:
        """Inband suppression plus the isolation of the coupling channel itself."""
        if self.analytic_inband_db is None or self.reference_power is None:
            return None
        return -self.analytic_inband_db - 10.0 * math.log10(self.reference_power)


@dataclass
class SpectrumResult:
    analytic: analytic.PowerSpectrum
    sim: McResult | None
    n_subcarriers: int


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow] = field(default_factory=list)
    spectra: dict[tuple[float, str, str], SpectrumResult] = field(default_factory=dict)

    def select(self, preset: str | None = None, oscillator: str | None = None) -> list[SweepRow]:
        return [
            r
            for r in self.rows
            if (preset is None or r.preset == preset) and (oscillator is None or r.oscillator == oscillator)
        ]

    @property
    def has_sim(self) -> bool:
        return any(r.sim_inband_db is not None for r in self.rows)


def run_sweep(spec: SweepSpec, trials: int = 0, master_seed: int = 0, workers: int = 1) -> SweepResult:
    """Evaluate every (point, variant); Monte-Carlo runs only when ``trials > 0``."""
    result = SweepResult(spec.axis.value)
    for value in spec.points:
        for variant in spec.variants:
            preset_, kind = variant
            try:
                cfg = spec.config(value, variant, trials, master_seed)
                cfg.check_feasible()
            except (InfeasibleAlc, InfeasibleSeparation):
                result.rows.append(
                    SweepRow(spec.axis.value, value, preset_.value, kind.value, None, None, None, 0, False)
                )
                continue
            _, post = analytic_spectra(cfg)
            active = cfg.waveform.active_set
            row = SweepRow(
                spec.axis.value,
                value,
                preset_.value,
                kind.value,
                analytic.inband_average(post, active),
                None,
                None,
                0,
                True,
                reference_power(cfg),
            )
            mc = None
            if trials > 0:
                mc = run_monte_carlo(cfg, trials, master_seed, workers)
                row.sim_inband_db = mc.inband_db()
                row.sim_stderr_db = mc.inband_stderr_db()
                row.trials = mc.trials_run
            result.rows.append(row)
            if spec.spectra:
                result.spectra[(value, preset_.value, kind.value)] = SpectrumResult(
                    post, mc, cfg.waveform.n_subcarriers
                )
    return result


def _db(value: float) -> float:
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(value))


def spectrum_deltas(spec: SpectrumResult, active_set: Iterable[int]) -> np.ndarray:
    """Per-bin ``|analytic - sim|`` in dB over ``active_set``."""
    if spec.sim is None:
        raise ValueError("no simulation columns")
    idx = np.asarray(list(active_set))
    a = analytic.PowerSpectrum(spec.analytic.values, 1.0).db[idx]
    s = analytic.PowerSpectrum(spec.sim.mean_post, 1.0).db[idx]
    return np.abs(a - s)


FLAG_DB = 0.5


def compare_report(result: SweepResult, active_set: Iterable[int] | None = None) -> str:
    """Analytic-vs-simulation summary per variant, flagging rows off by more than 0.5 dB."""
    if not result.has_sim:
        raise ValueError("no simulation columns")
    lines = [f"axis: {result.axis}"]
    flagged = []
    variants = sorted({(r.preset, r.oscillator) for r in result.rows})
    for preset_, osc in variants:
        deltas = []
        for r in result.select(preset_, osc):
            if not r.feasible or r.sim_inband_db is None:
                continue
            a, s = r.analytic_inband_db, r.sim_inband_db
            d = 0.0 if a == s else abs(a - s)
            deltas.append(d)
            if d > FLAG_DB:
                flagged.append(r)
        if deltas:
            lines.append(
                f"{preset_}/{osc}: max |delta| = {max(deltas):.3f} dB, mean |delta| = {float(np.mean(deltas)):.3f} dB"
                f" over {len(deltas)} points"
            )
        else:
            lines.append(f"{preset_}/{osc}: no comparable points")
    if result.spectra and active_set is not None:
        active = list(active_set)
        for (value, preset_, osc), spec in sorted(result.spectra.items()):
            if spec.sim is None:
                continue
            d = spectrum_deltas(spec, active)
            lines.append(f"{preset_}/{osc} @ {value:g}: per-subcarrier max |delta| = {float(np.max(d)):.3f} dB")
    for r in flagged:
        lines.append(
            f"FLAG {r.preset}/{r.oscillator} {r.axis_name}={r.axis_value:.17g}: "
            f"analytic {r.analytic_inband_db:.3f} dB vs sim {r.sim_inband_db:.3f} dB"
        )
    lines.append(f"flagged rows (> {FLAG_DB} dB): {len(flagged)}")
    return "\n".join(lines)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


def sweep_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in result.rows:
        writer.writerow(
            [
                r.axis_name,
                _fmt(r.axis_value),
                r.preset,
                r.oscillator,
                _fmt(r.analytic_inband_db),
                _fmt(r.sim_inband_db),
                _fmt(r.sim_stderr_db),
                r.trials,
                "true" if r.feasible else "false",
            ]
        )
    return buf.getvalue()


def spectrum_csv_text(spec: SpectrumResult) -> str:
    n = spec.n_subcarriers
    ref = spec.analytic.reference_power
    analytic_db = spec.analytic.db
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPECTRUM_HEADER)
    for centered in range(-n // 2, n // 2):
        k = centered % n
        if spec.sim is not None:
            mean = float(spec.sim.mean_post[k])
            sim_db = _db(mean / ref)
            se = float(spec.sim.stderr_post[k])
            se_db = 10.0 / math.log(10.0) * se / mean if mean > 0 else 0.0
        else:
            sim_db = se_db = None
        writer.writerow([centered, _fmt(float(analytic_db[k])), _fmt(sim_db), _fmt(se_db)])
    return buf.getvalue()


def emit_csv(result: SweepResult | SpectrumResult, path: str | Path) -> Path:
    """Write a sweep or spectrum CSV (UTF-8, LF, 17 significant digits)."""
    text = spectrum_csv_text(result) if isinstance(result, SpectrumResult) else sweep_csv_text(result)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _parse_opt(text: str) -> float | None:
    return None if text == "" else float(text)


def read_sweep_csv(path: str | Path) -> SweepResult:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
            raise ValueError(f"{path}: not a sweep CSV")
        rows = [
            SweepRow(
                r["axis_name"],
                float(r["axis_value"]),
                r["preset"],
                r["oscillator"],
                _parse_opt(r["analytic_inband_db"]),
                _parse_opt(r["sim_inband_db"]),
                _parse_opt(r["sim_stderr_db"]),
                int(r["trials"]),
                r["feasible"] == "true",
            )
            for r in reader
        ]
    axis = rows[0].axis_name if rows else ""
    return SweepResult(axis, rows)


def read_spectrum_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SPECTRUM_HEADER:
            raise ValueError(f"{path}: not a spectrum CSV")
        cols: dict[str, list[float]] = {h: [] for h in SPECTRUM_HEADER}
        for r in reader:
            for h in SPECTRUM_HEADER:
                cols[h].append(math.nan if r[h] == "" else float(r[h]))
    return {h: np.asarray(v) for h, v in cols.items()}


def compare_spectrum_csv(path: str | Path, active_per_side: int) -> str:
    cols = read_spectrum_csv(path)
    idx = cols["subcarrier_index"]
    inband = (np.abs(idx) >= 1) & (np.abs(idx) <= active_per_side)
    a, s = cols["analytic_db"][inband], cols["sim_mean_db"][inband]
    if np.all(np.isnan(s)):
        raise ValueError("no simulation columns")
    d = np.abs(a - s)
    return (
        f"per-subcarrier max |delta| = {float(np.nanmax(d)):.3f} dB, "
        f"mean |delta| = {float(np.nanmean(d)):.3f} dB over {int(inband.sum())} active bins; "
        f"bins above {FLAG_DB} dB: {int(np.sum(d > FLAG_DB))}"
    )


# --- JSON scenario files ---------------------------------------------------

_TOP_KEYS = {"waveform", "channel", "oscillator", "alc", "dlc", "sim"}
_WAVEFORM_KEYS = {"n_subcarriers", "active_per_side", "cp_len", "sample_rate_hz", "carrier_hz"}
_CHANNEL_KEYS = {"delays_samples", "powers_db", "separation_db", "main_delay_s"}
_OSC_KEYS = {"kind", "beta_hz"}
_ALC_KEYS = {"db", "error_mode"}
_DLC_KEYS = {"db"}
_SIM_KEYS = {"trials", "seed"}


def _check_keys(obj: Any, allowed: set[str], where: str, required: set[str] | None = None) -> dict:
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")
    missing = (required or set()) - set(obj)
    if missing:
        raise ValueError(f"{where}: missing keys {sorted(missing)}")
    return obj


def _alc_from_json(obj: Any) -> AlcSetting:
    if obj == "ideal":
        return AlcSetting(None)
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return AlcSetting(db_to_lin(-float(obj)))
    obj = _check_keys(obj, _ALC_KEYS, "alc", {"db"})
    mode = obj.get("error_mode", AlcErrorMode.PURE_AMPLITUDE.value)
    if obj["db"] == "ideal":
        return AlcSetting(None, mode)
    return AlcSetting(db_to_lin(-float(obj["db"])), mode)


def _dlc_from_json(obj: Any) -> float | None:
    if obj == "ideal":
        return None
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return db_to_lin(-float(obj))
    obj = _check_keys(obj, _DLC_KEYS, "dlc", {"db"})
    return None if obj["db"] == "ideal" else db_to_lin(-float(obj["db"]))


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a scenario from the JSON layout; unknown keys are errors.

    ``channel.powers_db[0]`` is the nominal main-tap power and must equal
    ``-separation_db``; the stored main tap is re-derived so that the whole
    signal sees exactly ``separation_db`` of isolation.
    """
    _check_keys(data, _TOP_KEYS, "config", {"waveform", "channel", "oscillator"})
    wf = _check_keys(data["waveform"], _WAVEFORM_KEYS, "waveform", _WAVEFORM_KEYS)
    ch = _check_keys(data["channel"], _CHANNEL_KEYS, "channel", _CHANNEL_KEYS)
    osc = _check_keys(data["oscillator"], _OSC_KEYS, "oscillator", _OSC_KEYS)
    sim = _check_keys(data.get("sim", {}), _SIM_KEYS, "sim")

    waveform = OfdmConfig.lte_like(
        n_subcarriers=int(wf["n_subcarriers"]),
        active_per_side=int(wf["active_per_side"]),
        cp_len=int(wf["cp_len"]),
        sample_rate=float(wf["sample_rate_hz"]),
        carrier_freq=float(wf["carrier_hz"]),
    )
    delays = [int(d) for d in ch["delays_samples"]]
    powers_db = [float(p) for p in ch["powers_db"]]
    if len(delays) != len(powers_db) or not delays or delays[0] != 0:
        raise ValueError("channel: delays_samples must start at 0 and align with powers_db")
    sep_db = float(ch["separation_db"])
    if abs(powers_db[0] + sep_db) > 1e-9:
        raise ValueError("channel: powers_db[0] must equal -separation_db")
    profile = CouplingProfile.from_separation(
        db_to_lin(-sep_db), delays[1:], [db_to_lin(p) for p in powers_db[1:]], float(ch["main_delay_s"])
    )
    oscillator = OscillatorScenario(osc["kind"], float(osc["beta_hz"]), profile.main_delay)
    return ScenarioConfig(
        waveform=waveform,
        profile=profile,
        oscillator=oscillator,
        alc=_alc_from_json(data.get("alc", "ideal")),
        dlc=_dlc_from_json(data.get("dlc", "ideal")),
        trials=int(sim.get("trials", 1000)),
        master_seed=int(sim.get("seed", 0)),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def canonical_config_dict(preset_: Preset | str = Preset.PRACTICAL, kind: str = "common", beta: float = FIG_BETA) -> dict:
    """JSON-ready canonical scenario (Practical or Ideal)."""
    practical = Preset(preset_) is Preset.PRACTICAL
    return {
        "waveform": {
            "n_subcarriers": 1024,
            "active_per_side": 300,
            "cp_len": 63,
            "sample_rate_hz": 15.36e6,
            "carrier_hz": 1.875e9,
        },
        "channel": {
            "delays_samples": [0, 1, 2, 4],
            "powers_db": [-30.0, -65.0, -70.0, -75.0],
            "separation_db": 30.0,
            "main_delay_s": 6.6713e-10,
        },
        "oscillator": {"kind": kind, "beta_hz": beta},
        "alc": {"db": 30.0, "error_mode": "pure_amplitude"} if practical else "ideal",
        "dlc": {"db": 50.0} if practical else "ideal",
        "sim": {"trials": 1000, "seed": 0},
    }


def preset_parameters(name: str) -> dict:
    """Serializable description of a figure preset, for golden-file checks."""
    spec = preset(name)
    variants = []
    for p, k in spec.variants:
        cfg = base_config(p, k, spec.beta)
        variants.append(
            {
                "preset": p.value,
                "oscillator": k.value,
                "alc_db": None if cfg.alc.is_ideal else round(-10 * math.log10(cfg.alc.suppression), 12),
                "dlc_db": None if cfg.dlc is None else round(-10 * math.log10(cfg.dlc), 12),
            }
        )
    wf = OfdmConfig.lte_like()
    prof = CouplingProfile.canonical()
    return {
        "name": spec.name,
        "axis": spec.axis.value,
        "n_points": len(spec.points),
        "first_point": spec.points[0],
        "last_point": spec.points[-1],
        "beta_hz": spec.beta,
        "spectra": spec.spectra,
        "variants": variants,
        "waveform": {
            "n_subcarriers": wf.n_subcarriers,
            "n_active": len(wf.active_set),
            "cp_len": wf.cp_len,
            "sample_rate_hz": wf.sample_rate,
            "subcarrier_spacing_hz": wf.subcarrier_spacing,
            "carrier_hz": wf.carrier_freq,
            "modulation": wf.modulation,
        },
        "channel": {
            "delays_samples": list(prof.tap_delays),
            "reflected_powers_db": [None if p == 0 else round(10 * math.log10(p), 9) for p in prof.tap_powers[1:]],
            "separation_db": round(-10 * math.log10(prof.separation), 12),
            "main_delay_s": prof.main_delay,
        },
    }

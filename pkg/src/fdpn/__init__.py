"""Phase-noise-limited self-interference cancellation in full-duplex OFDM radios."""

from .analytic import PowerSpectrum, inband_average, si_power_post_dlc, si_power_pre_dlc, tap_spectrum
from .coupling import AlcErrorMode, CouplingProfile, InfeasibleAlc, InfeasibleSeparation
from .ofdm import OfdmConfig
from .phasenoise import OscillatorKind, OscillatorScenario
from .simulator import AlcSetting, McResult, ScenarioConfig, analytic_spectra, run_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "AlcErrorMode",
    "AlcSetting",
    "CouplingProfile",
    "InfeasibleAlc",
    "InfeasibleSeparation",
    "McResult",
    "OfdmConfig",
    "OscillatorKind",
    "OscillatorScenario",
    "PowerSpectrum",
    "ScenarioConfig",
    "analytic_spectra",
    "inband_average",
    "run_monte_carlo",
    "si_power_post_dlc",
    "si_power_pre_dlc",
    "tap_spectrum",
]

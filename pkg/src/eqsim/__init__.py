"""Baseband channel equalization toolkit.

Signal generation, an FIR+AWGN channel, linear adaptive equalizers (LMS, CMA,
FSE-CMA), a neural-network equalizer, scoring metrics, and a reproducible
experiment harness with a CLI.
"""

from .channel import ChannelSpec, apply_awgn, default_channel, fir_convolve, transmit, upsample
from .config import EqualizerConfig, ExperimentConfig, parse_config, serialize_config
from .errors import ConfigurationError, EqsimError, ParseError
from .harness import (
    EqualizerResult,
    ResultBundle,
    compare_preset,
    default_compare_config,
    derive_seed,
    emit_outputs,
    emit_sweep,
    run_experiment,
    sweep_experiment,
)
from .linear_eq import EqMode, EqStepTrace, LinearEqualizer, dispersion_constant
from .metrics import EqReport, evm_rms, residual_isi_db, scatter_export, symbol_error_rate
from .mlp_eq import (
    MlpEqualizer,
    MlpNet,
    TrainRecord,
    backprop_step,
    build_training_set,
    equalize,
    mlp_forward,
    refine_decision_directed,
    train,
)
from .signal import ModScheme, SymbolFrame, generate_bits, make_frame, nearest_symbols, qam_demodulate, qam_modulate

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "ConfigurationError",
    "EqMode",
    "EqReport",
    "EqStepTrace",
    "EqsimError",
    "EqualizerConfig",
    "EqualizerResult",
    "ExperimentConfig",
    "LinearEqualizer",
    "MlpEqualizer",
    "MlpNet",
    "ModScheme",
    "ParseError",
    "ResultBundle",
    "SymbolFrame",
    "TrainRecord",
    "apply_awgn",
    "backprop_step",
    "build_training_set",
    "compare_preset",
    "default_channel",
    "default_compare_config",
    "derive_seed",
    "dispersion_constant",
    "emit_outputs",
    "emit_sweep",
    "equalize",
    "evm_rms",
    "fir_convolve",
    "generate_bits",
    "make_frame",
    "mlp_forward",
    "nearest_symbols",
    "parse_config",
    "qam_demodulate",
    "qam_modulate",
    "refine_decision_directed",
    "residual_isi_db",
    "run_experiment",
    "scatter_export",
    "serialize_config",
    "symbol_error_rate",
    "sweep_experiment",
    "train",
    "transmit",
    "upsample",
]

"""Quantitative scoring of equalizer outputs: SER/BER, EVM, residual ISI."""

import math
from dataclasses import dataclass

import numpy as np

from .signal import ModScheme

RESIDUAL_ISI_FLOOR_DB = -100.0


@dataclass
class EqReport:
    """Scores for one equalizer run."""

    ser: float
    ber: float
    evm_rms: float
    mse_vs_tx: float
    residual_isi_db: float | None
    scatter: np.ndarray


def symbol_error_rate(decided_bits: np.ndarray, true_bits: np.ndarray, scheme: ModScheme) -> tuple[float, float]:
    """Fraction of symbols with any wrong bit, and the plain bit error rate."""
    decided_bits = np.asarray(decided_bits, dtype=np.uint8)
    true_bits = np.asarray(true_bits, dtype=np.uint8)
    if decided_bits.size != true_bits.size:
        raise ValueError("bit sequences differ in length")
    k = scheme.bits_per_symbol
    if decided_bits.size % k:
        raise ValueError(f"bit count {decided_bits.size} not divisible by {k} bits per symbol")
    diff = (decided_bits != true_bits).reshape(-1, k)
    ser = float(np.mean(diff.any(axis=1)))
    ber = float(np.mean(diff))
    return ser, ber


def evm_rms(outputs: np.ndarray, reference: np.ndarray) -> float:
    """RMS error vector magnitude normalized by the reference power."""
    outputs = np.asarray(outputs, dtype=np.complex128)
    reference = np.asarray(reference, dtype=np.complex128)
    if reference.size == 0 or outputs.size != reference.size:
        raise ValueError("outputs and reference must be nonempty and equal length")
    return float(np.sqrt(np.mean(np.abs(outputs - reference) ** 2) / np.mean(np.abs(reference) ** 2)))


def residual_isi_db(channel_taps: np.ndarray, eq_weights: np.ndarray, oversample_l: int = 1) -> float:
    """Residual ISI of the combined channel-equalizer response, in dB.

    The combined response is conv(channel, equalizer impulse response)
    decimated to symbol rate (only every L-th coefficient reaches a symbol
    decision); the figure is the energy outside the dominant tap relative to
    it, floored at -100 dB.
    """
    channel_taps = np.asarray(channel_taps, dtype=np.complex128)
    eq_weights = np.asarray(eq_weights, dtype=np.complex128)
    if channel_taps.size == 0 or eq_weights.size == 0:
        raise ValueError("taps and weights must be nonempty")
    combined = np.convolve(channel_taps, eq_weights)[::oversample_l]
    power = np.abs(combined) ** 2
    peak = float(power.max())
    if peak == 0.0:
        raise ValueError("combined channel-equalizer response is all zero")
    ratio = (float(power.sum()) - peak) / peak
    if ratio <= 10.0 ** (RESIDUAL_ISI_FLOOR_DB / 10.0):
        return RESIDUAL_ISI_FLOOR_DB
    return 10.0 * math.log10(ratio)


def scatter_export(outputs: np.ndarray, skip_transient: int) -> np.ndarray:
    """Post-transient output samples for constellation plotting."""
    outputs = np.asarray(outputs, dtype=np.complex128)
    if not 0 <= skip_transient < outputs.size:
        raise ValueError("skip_transient must be < len(outputs)")
    return outputs[skip_transient:]

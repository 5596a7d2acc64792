"""Discrete-time FIR multipath channel with AWGN, optionally fractionally spaced."""

import math
from dataclasses import dataclass

import numpy as np

from .signal import SymbolFrame

# Default test channels: mild minimum-phase ISI, normalized to unit energy so
# the channel output power equals the input power. The half-symbol-spaced
# variant's even taps are exactly the symbol-spaced taps, so one oversampled
# stream can feed both symbol-spaced and fractionally spaced equalizers.
DEFAULT_TAPS = np.array([1.0, 0.5, 0.2]) / math.sqrt(1.0 + 0.25 + 0.04)
DEFAULT_TAPS_T2 = np.array([1.0, 0.6, 0.5, 0.25, 0.2, 0.1]) / math.sqrt(
    1.0 + 0.36 + 0.25 + 0.0625 + 0.04 + 0.01
)


@dataclass(frozen=True)
class ChannelSpec:
    """FIR impulse response at spacing T/L, oversampling factor L and SNR in dB."""

    taps: np.ndarray
    oversample_l: int = 1
    snr_db: float = math.inf

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        object.__setattr__(self, "taps", taps)
        if taps.size == 0 or not np.any(np.abs(taps) > 0):
            raise ValueError("channel taps must contain at least one nonzero tap")
        if self.oversample_l not in (1, 2):
            raise ValueError("oversample factor must be 1 or 2")


def default_channel(oversample_l: int = 1, snr_db: float = math.inf) -> ChannelSpec:
    taps = DEFAULT_TAPS if oversample_l == 1 else DEFAULT_TAPS_T2
    return ChannelSpec(taps=taps, oversample_l=oversample_l, snr_db=snr_db)


def upsample(symbols: np.ndarray, l: int) -> np.ndarray:
    """Insert l-1 zeros after each symbol; l=1 is the identity."""
    if l < 1:
        raise ValueError("upsampling factor must be >= 1")
    symbols = np.asarray(symbols, dtype=np.complex128)
    if l == 1:
        return symbols.copy()
    out = np.zeros(l * symbols.size, dtype=np.complex128)
    out[::l] = symbols
    return out


def fir_convolve(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Linear convolution with zero initial state, truncated to len(x)."""
    x = np.asarray(x, dtype=np.complex128)
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.size == 0:
        raise ValueError("taps must be nonempty")
    return np.convolve(x, taps)[: x.size]


def apply_awgn(x: np.ndarray, snr_db: float, signal_power: float, seed: int) -> np.ndarray:
    """Add circularly symmetric complex Gaussian noise at the given SNR.

    Total noise variance is signal_power * 10**(-snr_db/10), split equally
    between the real and imaginary parts. snr_db = +inf returns x unchanged.
    """
    if signal_power <= 0:
        raise ValueError("signal power must be positive")
    x = np.asarray(x, dtype=np.complex128)
    if math.isinf(snr_db) and snr_db > 0:
        return x.copy()
    sigma2 = signal_power * 10.0 ** (-snr_db / 10.0)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(sigma2 / 2.0)
    noise = scale * rng.standard_normal(x.size) + 1j * scale * rng.standard_normal(x.size)
    return x + noise


def transmit(frame: SymbolFrame, spec: ChannelSpec, seed: int) -> np.ndarray:
    """Push a frame through the channel: upsample, FIR filter, then AWGN.

    The SNR is defined against the post-channel signal power, so the reported
    SNR is what the equalizer actually sees.
    """
    shaped = fir_convolve(upsample(frame.symbols, spec.oversample_l), spec.taps)
    power = float(np.mean(np.abs(shaped) ** 2))
    return apply_awgn(shaped, spec.snr_db, power, seed)

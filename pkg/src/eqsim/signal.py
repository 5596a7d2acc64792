"""Random bit streams and square M-QAM mapping with unit average symbol energy.

Mapping convention: Gray coding independently on each axis, the first half of
a symbol's bit tuple selects the I level and the second half the Q level, and
a leading 0 on an axis selects the positive half-axis.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_SUPPORTED_ORDERS = (4, 16)


def _inverse_gray(g: int) -> int:
    """Position of Gray code ``g`` in the reflected Gray sequence."""
    p = 0
    while g:
        p ^= g
        g >>= 1
    return p


@lru_cache(maxsize=None)
def _axis_levels(bits_per_axis: int) -> np.ndarray:
    """Unnormalized PAM level for each axis bit pattern (pattern as integer).

    Levels are the odd integers ±1, ±3, ... ordered so that walking the Gray
    sequence walks the levels from most positive to most negative.
    """
    n = 1 << bits_per_axis
    levels = np.empty(n, dtype=np.float64)
    for g in range(n):
        levels[g] = (n - 1) - 2 * _inverse_gray(g)
    return levels


@dataclass(frozen=True)
class ModScheme:
    """Square QAM constellation of order ``m`` (4 or 16)."""

    m: int

    def __post_init__(self):
        if self.m not in _SUPPORTED_ORDERS:
            raise ValueError(f"unsupported constellation order {self.m}; use one of {_SUPPORTED_ORDERS}")

    @property
    def bits_per_symbol(self) -> int:
        return self.m.bit_length() - 1

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def alphabet(self) -> np.ndarray:
        """Constellation points indexed by the symbol's bit tuple read as an integer."""
        return _alphabet(self.m)


@lru_cache(maxsize=None)
def _alphabet(m: int) -> np.ndarray:
    scheme = ModScheme(m)
    half = scheme.bits_per_axis
    levels = _axis_levels(half)
    mask = (1 << half) - 1
    idx = np.arange(m)
    points = levels[idx >> half] + 1j * levels[idx & mask]
    # scale so the alphabet has unit average energy
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    points.setflags(write=False)
    return points


@lru_cache(maxsize=None)
def _sorted_levels(m: int) -> np.ndarray:
    """Normalized axis levels in descending order (ties in slicing go positive)."""
    levels = np.unique(_alphabet(m).real)[::-1].copy()
    levels.setflags(write=False)
    return levels


def _nearest_level_index(values: np.ndarray, levels: np.ndarray) -> np.ndarray:
    # argmin over descending levels: on an exact midpoint the first (more
    # positive) level wins, which is the tie rule used everywhere here
    return np.abs(values[:, None] - levels[None, :]).argmin(axis=1)


def nearest_symbols(points: np.ndarray, scheme: ModScheme) -> np.ndarray:
    """Slice complex points to the nearest constellation point (per axis)."""
    points = np.asarray(points, dtype=np.complex128)
    levels = _sorted_levels(scheme.m)
    i = levels[_nearest_level_index(points.real.ravel(), levels)]
    q = levels[_nearest_level_index(points.imag.ravel(), levels)]
    return (i + 1j * q).reshape(points.shape)


def generate_bits(n: int, seed: int) -> np.ndarray:
    """n uniform random bits (uint8) from a seeded PCG64 generator."""
    if n < 0:
        raise ValueError("bit count must be nonnegative")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def qam_modulate(bits: np.ndarray, scheme: ModScheme) -> np.ndarray:
    """Map a bit sequence to unit-energy Gray-coded QAM symbols."""
    bits = np.asarray(bits, dtype=np.uint8)
    k = scheme.bits_per_symbol
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} not divisible by {k} bits per symbol")
    groups = bits.reshape(-1, k)
    weights = 1 << np.arange(k)[::-1]  # MSB first
    idx = groups @ weights
    return scheme.alphabet[idx]


def qam_demodulate(symbols: np.ndarray, scheme: ModScheme) -> np.ndarray:
    """Hard-decide symbols to the nearest alphabet point and invert the Gray map."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    levels = _sorted_levels(scheme.m)
    half = scheme.bits_per_axis
    # position in the level order equals the position in the Gray sequence
    p_i = _nearest_level_index(symbols.real, levels)
    p_q = _nearest_level_index(symbols.imag, levels)
    g_i = p_i ^ (p_i >> 1)
    g_q = p_q ^ (p_q >> 1)
    out = np.empty((symbols.size, 2 * half), dtype=np.uint8)
    for b in range(half):
        shift = half - 1 - b
        out[:, b] = (g_i >> shift) & 1
        out[:, half + b] = (g_q >> shift) & 1
    return out.ravel()


@dataclass(frozen=True)
class SymbolFrame:
    """One trial's transmitted bits and symbols plus the seed that made them."""

    scheme: ModScheme
    bits: np.ndarray
    symbols: np.ndarray
    seed: int

    def __post_init__(self):
        if self.bits.size != self.symbols.size * self.scheme.bits_per_symbol:
            raise ValueError("bit count does not match symbol count for this scheme")


def make_frame(n_symbols: int, scheme: ModScheme, seed: int) -> SymbolFrame:
    """Generate a reproducible frame of ``n_symbols`` random QAM symbols."""
    bits = generate_bits(n_symbols * scheme.bits_per_symbol, seed)
    return SymbolFrame(scheme=scheme, bits=bits, symbols=qam_modulate(bits, scheme), seed=seed)

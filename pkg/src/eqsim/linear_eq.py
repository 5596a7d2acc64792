"""Linear transversal equalizers with LMS, CMA and FSE-CMA tap adaptation.

Conventions, fixed once for the whole package: the filter output is the
conjugate-weight inner product y = sum(conj(w)*x); LMS updates
w += mu*conj(e)*x against e = desired - y; CMA updates
w -= mu*(|y|^2 - r2)*conj(y)*x with dispersion constant r2 = E|a|^4 / E|a|^2
of the configured constellation. Weights start as a center spike, the
standard cure for CMA's local minima.
"""

import cmath
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .signal import ModScheme

DEFAULT_N_TAPS = 11
DEFAULT_MU = {"lms": 0.01, "cma": 0.001, "fse_cma": 0.001}


class EqMode(str, Enum):
    LMS = "lms"
    CMA = "cma"
    FSE_CMA = "fse_cma"


@dataclass
class EqStepTrace:
    """One adaptation step: output, error term, and the weights after update."""

    output_y: complex
    error_e: complex | float
    post_update_weights: np.ndarray | None


def dispersion_constant(alphabet: np.ndarray) -> float:
    """Godard dispersion constant E|a|^4 / E|a|^2 of a constellation."""
    mags2 = np.abs(np.asarray(alphabet)) ** 2
    return float(np.mean(mags2**2) / np.mean(mags2))


class LinearEqualizer:
    """Complex tap-delay-line equalizer; mode picks the adaptation rule.

    FSE-CMA taps are spaced at T/2 and consume two received samples per
    emitted symbol; the other modes are symbol spaced.
    """

    def __init__(
        self,
        mode: EqMode | str,
        scheme: ModScheme,
        n_taps: int | None = None,
        mu: float | None = None,
        decision_delay: int | None = None,
        decision_directed: bool = False,
    ):
        self.mode = EqMode(mode)
        self.scheme = scheme
        self.oversample_l = 2 if self.mode is EqMode.FSE_CMA else 1
        self.n_taps = int(n_taps) if n_taps is not None else DEFAULT_N_TAPS * self.oversample_l
        if self.n_taps < 1:
            raise ValueError("equalizer needs at least one tap")
        self.mu = float(mu) if mu is not None else DEFAULT_MU[self.mode.value]
        if self.mu <= 0:
            raise ValueError("step size must be positive")
        if decision_delay is None:
            decision_delay = (self.n_taps // 2) // self.oversample_l
        if decision_delay < 0:
            raise ValueError("decision delay must be nonnegative")
        self.decision_delay = int(decision_delay)
        self.decision_directed = bool(decision_directed)
        self.r2 = dispersion_constant(scheme.alphabet)
        levels = np.unique(scheme.alphabet.real)[::-1]  # descending
        self._levels = [float(v) for v in levels]
        self._thresholds = [float(v) for v in (levels[:-1] + levels[1:]) / 2.0]
        self.reset()

    def reset(self) -> None:
        """Center-spike initialization: unit tap at index n_taps//2."""
        self.weights = np.zeros(self.n_taps, dtype=np.complex128)
        self.weights[self.n_taps // 2] = 1.0

    @property
    def impulse_response(self) -> np.ndarray:
        """The filter the weights implement, y = conv(x, conj(w)) decimated."""
        return np.conj(self.weights)

    def _slice_axis(self, v: float) -> float:
        for lvl, thresh in zip(self._levels, self._thresholds):
            if v >= thresh:  # >= sends exact midpoints to the positive side
                return lvl
        return self._levels[-1]

    def slice(self, y: complex) -> complex:
        """Nearest constellation point; exact midpoints go to the positive side."""
        return complex(self._slice_axis(y.real), self._slice_axis(y.imag))

    def regressor(self, received: np.ndarray, n: int) -> np.ndarray:
        """Tap-delay-line contents for symbol index n, newest sample first.

        The window ends at sample index n*oversample_l; indices before the
        stream head read as zero.
        """
        received = np.asarray(received, dtype=np.complex128)
        end = n * self.oversample_l
        out = np.zeros(self.n_taps, dtype=np.complex128)
        for i in range(self.n_taps):
            j = end - i
            if 0 <= j < received.size:
                out[i] = received[j]
        return out

    def _check_finite_vec(self, x_vec: np.ndarray) -> None:
        if not np.isfinite(x_vec).all():
            raise ValueError("non-finite sample in equalizer input")

    def lms_step(self, x_vec: np.ndarray, desired: complex, record_weights: bool = True) -> EqStepTrace:
        """One LMS step: output and error first, then the tap adjustment."""
        if self.mode is not EqMode.LMS:
            raise ConfigurationError("lms_step requires LMS mode")
        if x_vec.size != self.n_taps:
            raise ValueError("regressor length does not match tap count")
        self._check_finite_vec(x_vec)
        if not cmath.isfinite(desired):
            raise ValueError("non-finite desired symbol")
        y = complex(np.vdot(self.weights, x_vec))
        e = desired - y
        self.weights += self.mu * e.conjugate() * x_vec
        return EqStepTrace(y, e, self.weights.copy() if record_weights else None)

    def cma_step(self, x_vec: np.ndarray, record_weights: bool = True) -> EqStepTrace:
        """One blind CMA step; no desired symbol is consumed."""
        if self.mode is EqMode.LMS:
            raise ConfigurationError("cma_step requires CMA or FSE-CMA mode")
        if x_vec.size != self.n_taps:
            raise ValueError("regressor length does not match tap count")
        self._check_finite_vec(x_vec)
        y = complex(np.vdot(self.weights, x_vec))
        d = abs(y) ** 2 - self.r2
        self.weights -= self.mu * d * y.conjugate() * x_vec
        return EqStepTrace(y, d, self.weights.copy() if record_weights else None)

    def run(
        self,
        received: np.ndarray,
        training: np.ndarray | None = None,
        record_weights: bool = False,
    ) -> tuple[np.ndarray, list[EqStepTrace]]:
        """Adapt over a received stream, emitting one output per symbol index.

        LMS uses training[n - decision_delay] as the desired symbol while
        available, then sliced decisions if decision_directed is set, else it
        stops adapting (trace error 0 on non-adapting steps). CMA and FSE-CMA
        ignore training entirely.
        """
        received = np.asarray(received, dtype=np.complex128)
        if self.mode is EqMode.LMS and training is None and not self.decision_directed:
            raise ConfigurationError("LMS needs a training sequence or decision_directed=True")
        l = self.oversample_l
        n_out = received.size // l
        pad = self.n_taps - 1
        padded = np.concatenate([np.zeros(pad, dtype=np.complex128), received])
        outputs = np.empty(n_out, dtype=np.complex128)
        traces: list[EqStepTrace] = []
        n_train = 0 if training is None else len(training)
        blind = self.mode is not EqMode.LMS
        for n in range(n_out):
            hi = n * l + pad + 1
            x_vec = padded[hi - self.n_taps : hi][::-1]
            if blind:
                trace = self.cma_step(x_vec, record_weights=record_weights)
            else:
                idx = n - self.decision_delay
                if 0 <= idx < n_train:
                    trace = self.lms_step(x_vec, complex(training[idx]), record_weights=record_weights)
                elif idx >= 0 and self.decision_directed:
                    y = complex(np.vdot(self.weights, x_vec))
                    trace = self.lms_step(x_vec, self.slice(y), record_weights=record_weights)
                else:
                    y = complex(np.vdot(self.weights, x_vec))
                    trace = EqStepTrace(y, 0j, self.weights.copy() if record_weights else None)
            outputs[n] = trace.output_y
            traces.append(trace)
        return outputs, traces

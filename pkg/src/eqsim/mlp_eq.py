"""Feed-forward neural equalizer: two real-valued single-hidden-layer networks,
one per rail, trained sample by sample with the delta rule.

Each network has tanh hidden units and one linear output. The I and Q rails
get independent networks, but both rails of the input window feed both
networks so channels that mix rails stay learnable. Training is plain online
gradient descent (no momentum, no adaptive rates), sample order fixed, so a
run is fully determined by (data, seed).
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError
from .signal import ModScheme, nearest_symbols

DEFAULT_HIDDEN = 8
DEFAULT_WINDOW_K = 5
DEFAULT_DECISION_DELAY = 2
DEFAULT_ETA = 0.05
DEFAULT_GOAL_MSE = 1e-4
DEFAULT_MAX_EPOCHS = 5000
INIT_HALF_RANGE = 0.5  # weights start uniform in [-0.5, 0.5]


@dataclass
class MlpNet:
    """One rail's network: hidden weights (H, D), biases, linear output layer."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def __post_init__(self):
        h = self.w1.shape[0]
        if self.b1.shape != (h,) or self.w2.shape != (h,):
            raise ValueError("inconsistent network parameter shapes")

    @property
    def hidden_size(self) -> int:
        return self.w1.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def random(cls, hidden: int, input_dim: int, rng: np.random.Generator) -> "MlpNet":
        r = INIT_HALF_RANGE
        return cls(
            w1=rng.uniform(-r, r, size=(hidden, input_dim)),
            b1=rng.uniform(-r, r, size=hidden),
            w2=rng.uniform(-r, r, size=hidden),
            b2=float(rng.uniform(-r, r)),
        )

    def copy(self) -> "MlpNet":
        return MlpNet(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2)


def mlp_forward(net: MlpNet, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Forward pass; returns the output and the hidden activations for reuse."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.input_dim,):
        raise ValueError(f"input has shape {x.shape}, network expects ({net.input_dim},)")
    hidden = np.tanh(net.w1 @ x + net.b1)
    return float(net.w2 @ hidden + net.b2), hidden


def backprop_step(net: MlpNet, x: np.ndarray, target: float, eta: float) -> float:
    """One online delta-rule update; returns the pre-update squared error.

    The sample loss is eps = (target - output)^2 / 2, so every parameter
    moves by -eta * d(eps)/d(param) with no stray factor of 2; the returned
    value is the plain squared error (target - output)^2.
    """
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    x = np.asarray(x, dtype=np.float64)
    if not (np.isfinite(x).all() and math.isfinite(target)):
        raise ValueError("non-finite training sample")
    y, hidden = mlp_forward(net, x)
    e = target - y
    # all gradients are evaluated at the pre-update parameters
    delta_hidden = e * net.w2 * (1.0 - hidden**2)
    net.w2 += eta * e * hidden
    net.b2 += eta * e
    net.w1 += eta * np.outer(delta_hidden, x)
    net.b1 += eta * delta_hidden
    return e * e


@njit(cache=True)
def _epoch_pass(w1, b1, w2, b2_box, x_mat, targets, eta):
    """In-place online pass over all samples; returns the sum of squared errors.

    Same arithmetic as backprop_step, written out as loops so the epoch loop
    compiles to machine code.
    """
    n, d = x_mat.shape
    h = w1.shape[0]
    hidden = np.empty(h)
    sq_sum = 0.0
    for s in range(n):
        y = b2_box[0]
        for j in range(h):
            z = b1[j]
            for i in range(d):
                z += w1[j, i] * x_mat[s, i]
            hidden[j] = math.tanh(z)
            y += w2[j] * hidden[j]
        e = targets[s] - y
        sq_sum += e * e
        for j in range(h):
            g = e * w2[j] * (1.0 - hidden[j] * hidden[j])
            w2[j] += eta * e * hidden[j]
            b1[j] += eta * g
            for i in range(d):
                w1[j, i] += eta * g * x_mat[s, i]
        b2_box[0] += eta * e
    return sq_sum


@dataclass
class TrainRecord:
    """Epoch-by-epoch training MSE and whether the goal was met."""

    epoch_mse: np.ndarray
    epochs_to_goal: int | None
    reached_goal: bool


class MlpEqualizer:
    """Pair of rail networks plus the windowing and training hyperparameters."""

    def __init__(
        self,
        window_k: int = DEFAULT_WINDOW_K,
        decision_delay: int = DEFAULT_DECISION_DELAY,
        hidden: int = DEFAULT_HIDDEN,
        eta: float = DEFAULT_ETA,
        goal_mse: float = DEFAULT_GOAL_MSE,
        max_epochs: int = DEFAULT_MAX_EPOCHS,
    ):
        if window_k < 1 or hidden < 1 or max_epochs < 1:
            raise ValueError("window_k, hidden and max_epochs must be >= 1")
        if eta <= 0 or goal_mse <= 0:
            raise ValueError("eta and goal_mse must be positive")
        if decision_delay < 0:
            raise ValueError("decision delay must be nonnegative")
        self.window_k = window_k
        self.decision_delay = decision_delay
        self.hidden = hidden
        self.eta = eta
        self.goal_mse = goal_mse
        self.max_epochs = max_epochs
        self.net_i: MlpNet | None = None
        self.net_q: MlpNet | None = None

    @property
    def input_dim(self) -> int:
        return 2 * self.window_k

    def initialize(self, seed: int) -> None:
        """Seeded uniform [-0.5, 0.5] init; each rail gets its own substream."""
        child_i, child_q = np.random.SeedSequence(seed).spawn(2)
        self.net_i = MlpNet.random(self.hidden, self.input_dim, np.random.default_rng(child_i))
        self.net_q = MlpNet.random(self.hidden, self.input_dim, np.random.default_rng(child_q))


def input_windows(received: np.ndarray, window_k: int) -> np.ndarray:
    """Row n holds [re(r[n]), im(r[n]), re(r[n-1]), im(r[n-1]), ...], zero padded."""
    received = np.asarray(received, dtype=np.complex128)
    padded = np.concatenate([np.zeros(window_k - 1, dtype=np.complex128), received])
    win = np.lib.stride_tricks.sliding_window_view(padded, window_k)[:, ::-1]  # newest first
    x = np.empty((received.size, 2 * window_k), dtype=np.float64)
    x[:, 0::2] = win.real
    x[:, 1::2] = win.imag
    return x


def build_training_set(
    received: np.ndarray,
    transmitted: np.ndarray,
    window_k: int,
    delay: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Windowed inputs with per-rail targets transmitted[n - delay].

    Only indices with an available target are emitted, so the first `delay`
    windows are dropped.
    """
    transmitted = np.asarray(transmitted, dtype=np.complex128)
    if delay >= transmitted.size:
        raise ValueError("decision delay must be smaller than the training sequence")
    x = input_windows(received, window_k)
    n = min(x.shape[0], transmitted.size + delay)
    x = x[delay:n]
    targets = transmitted[: n - delay]
    return x, targets.real.copy(), targets.imag.copy()


def train(
    eq: MlpEqualizer,
    inputs: np.ndarray,
    targets_i: np.ndarray,
    targets_q: np.ndarray,
    seed: int,
    reinit: bool = True,
) -> TrainRecord:
    """Online backprop per rail until the epoch MSE goal or the epoch cap.

    The epoch MSE is the mean over samples and both rails of the pre-update
    squared errors recorded during that epoch (online updates, so this is not
    the post-epoch batch MSE).
    """
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    if inputs.size == 0:
        raise ConfigurationError("training set is empty")
    targets_i = np.ascontiguousarray(targets_i, dtype=np.float64)
    targets_q = np.ascontiguousarray(targets_q, dtype=np.float64)
    if not (inputs.shape[0] == targets_i.size == targets_q.size):
        raise ValueError("inputs and targets differ in length")
    if reinit or eq.net_i is None or eq.net_q is None:
        eq.initialize(seed)
    n = inputs.shape[0]
    curve = []
    reached = False
    for _ in range(eq.max_epochs):
        sq = 0.0
        for net, targets in ((eq.net_i, targets_i), (eq.net_q, targets_q)):
            b2_box = np.array([net.b2])
            sq += _epoch_pass(net.w1, net.b1, net.w2, b2_box, inputs, targets, eq.eta)
            net.b2 = float(b2_box[0])
        curve.append(sq / (2 * n))
        if curve[-1] <= eq.goal_mse:
            reached = True
            break
    return TrainRecord(
        epoch_mse=np.asarray(curve),
        epochs_to_goal=len(curve) if reached else None,
        reached_goal=reached,
    )


def _forward_batch(net: MlpNet, x: np.ndarray) -> np.ndarray:
    return np.tanh(x @ net.w1.T + net.b1) @ net.w2 + net.b2


def equalize(eq: MlpEqualizer, received: np.ndarray) -> np.ndarray:
    """Network outputs for every received sample, recombined into complex."""
    if eq.net_i is None or eq.net_q is None:
        raise ConfigurationError("equalizer has no networks; train or initialize first")
    x = input_windows(received, eq.window_k)
    return _forward_batch(eq.net_i, x) + 1j * _forward_batch(eq.net_q, x)


def refine_decision_directed(
    eq: MlpEqualizer,
    received: np.ndarray,
    scheme: ModScheme,
    n_epochs: int = 1,
) -> TrainRecord:
    """Blind refinement: retrain against sliced current outputs for n_epochs."""
    outputs = equalize(eq, received)
    decisions = nearest_symbols(outputs, scheme)
    x = input_windows(received, eq.window_k)
    saved_max = eq.max_epochs
    eq.max_epochs = n_epochs
    try:
        record = train(eq, x, decisions.real.copy(), decisions.imag.copy(), seed=0, reinit=False)
    finally:
        eq.max_epochs = saved_max
    return record

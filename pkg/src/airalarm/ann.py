"""The feedforward classifier: init, forward pass, SGD training, prediction.

Default topology is 8 inputs, one hidden layer of 5, and 3 outputs, with the
logistic sigmoid at every non-input layer. Training is online stochastic
gradient descent on the per-example loss E = 1/2 * sum_k (o_k - t_k)^2 with
one-hot targets; the data order is reshuffled every epoch with the seeded
generator. A finite-difference gradient check guards the backpropagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DivergenceError
from .kernels import sigmoid
from .preprocess import LabeledExample, RiskLabel

N_CLASSES = len(RiskLabel)


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple[int, ...] = (8, 5, 3)
    activation: str = "sigmoid"
    learning_rate: float = 0.1
    epochs: int = 100
    seed: int = 42

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if any(s <= 0 for s in sizes):
            raise ValueError(f"layer sizes must be positive, got {sizes}")
        if self.activation != "sigmoid":
            raise ValueError(f"unsupported activation {self.activation!r}")
        # eta = 0 is a legal fixpoint (parameters must come back unchanged)
        if self.learning_rate < 0.0:
            raise ValueError("learning rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class Network:
    """Weights[l][j, i] connects node i of layer l to node j of layer l+1."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "sigmoid"
    config: NetworkConfig | None = None

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    def validate(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("weights and biases must be non-empty parallel lists")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {l}: weight/bias shapes disagree")
            if l > 0 and w.shape[1] != self.weights[l - 1].shape[0]:
                raise ValueError(f"layer {l}: input width does not match previous layer")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {l}: non-finite parameters")


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)
    epochs_run: int = 0
    final_train_accuracy: float = 0.0


def init_network(config: NetworkConfig) -> Network:
    """Draw every weight and bias uniformly on [-1, 1] from the seeded PRNG.

    Draw order is fixed: per layer, the weight matrix (row-major) then the
    bias vector, so a seed pins the parameters bit-for-bit.
    """
    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    weights = []
    biases = []
    for l in range(len(sizes) - 1):
        weights.append(rng.uniform(-1.0, 1.0, size=(sizes[l + 1], sizes[l])))
        biases.append(rng.uniform(-1.0, 1.0, size=sizes[l + 1]))
    return Network(weights, biases, config.activation, config)


def forward(net: Network, x: np.ndarray) -> list[np.ndarray]:
    """All layer activations, input first; output components are in (0,1)."""
    a = np.asarray(x, dtype=np.float64)
    if a.shape != (net.layer_sizes[0],):
        raise ValueError(f"input has shape {a.shape}, expected ({net.layer_sizes[0]},)")
    acts = [a]
    for w, b in zip(net.weights, net.biases):
        acts.append(sigmoid(w @ acts[-1] + b))
    return acts


def forward_batch(net: Network, X: np.ndarray) -> np.ndarray:
    """Vectorized outputs for a batch of inputs, shape (n, output size)."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] != net.layer_sizes[0]:
        raise ValueError(f"batch has shape {A.shape}, expected (n, {net.layer_sizes[0]})")
    for w, b in zip(net.weights, net.biases):
        A = sigmoid(A @ w.T + b)
    return A


def pick_class(scores: np.ndarray) -> RiskLabel:
    """Class of the maximum score; ties go to the lowest class index."""
    return RiskLabel(int(np.argmax(scores)))


def predict(net: Network, x: np.ndarray) -> tuple[np.ndarray, RiskLabel]:
    """Output activations and the argmax class."""
    scores = forward(net, x)[-1]
    if scores.shape != (N_CLASSES,):
        raise ValueError(f"network has {scores.shape[0]} outputs, expected {N_CLASSES}")
    return scores, pick_class(scores)


def one_hot(label: RiskLabel) -> np.ndarray:
    t = np.zeros(N_CLASSES)
    t[int(label)] = 1.0
    return t


def _as_arrays(data: Sequence[LabeledExample], n_inputs: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.ascontiguousarray([ex.features for ex in data], dtype=np.float64)
    if X.shape != (len(data), n_inputs):
        raise ValueError(f"examples have shape {X.shape}, expected (n, {n_inputs})")
    T = np.zeros((len(data), N_CLASSES))
    for row, ex in enumerate(data):
        T[row, int(ex.label)] = 1.0
    return X, T


def train(
    net: Network,
    data: Sequence[LabeledExample],
    config: NetworkConfig,
    on_epoch=None,
) -> tuple[Network, TrainReport]:
    """Online SGD over shuffled epochs; returns a new network, input untouched.

    Every epoch reshuffles the data with the seeded generator, then walks it
    example by example: forward pass, exact backpropagated gradients of the
    squared-error loss, and an immediate w -= lr * grad update. The recorded
    epoch loss is the squared output error averaged over every example and
    output component. Non-finite parameters abort with a DivergenceError
    naming the epoch.
    """
    if len(data) == 0:
        raise ValueError("training data is empty")
    X, T = _as_arrays(data, net.layer_sizes[0])
    sizes = np.asarray(net.layer_sizes, dtype=np.int64)
    theta = kernels.pack_params(net.weights, net.biases)
    if not np.isfinite(theta).all():
        raise DivergenceError("non-finite parameters before epoch 1")

    rng = np.random.default_rng(config.seed)
    losses: list[float] = []
    denom = float(len(data) * sizes[-1])
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(data)).astype(np.int64)
        sse = kernels.sgd_epoch(theta, sizes, X, T, order, config.learning_rate)
        if not (np.isfinite(sse) and np.isfinite(theta).all()):
            raise DivergenceError(f"non-finite parameters at epoch {epoch}")
        losses.append(float(sse) / denom)
        if on_epoch is not None:
            on_epoch(epoch, losses[-1])

    weights, biases = kernels.unpack_params(theta, net.layer_sizes)
    trained = Network(weights, biases, net.activation, config)
    outputs = forward_batch(trained, X)
    hits = np.argmax(outputs, axis=1) == np.argmax(T, axis=1)
    report = TrainReport(losses, len(losses), float(np.mean(hits)))
    return trained, report


def example_loss(net: Network, x: np.ndarray, target: np.ndarray) -> float:
    """E = 1/2 * sum_k (o_k - t_k)^2 for one example."""
    out = forward(net, x)[-1]
    diff = out - target
    return 0.5 * float(diff @ diff)


def backprop_single(
    net: Network, x: np.ndarray, target: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradients of the single-example loss w.r.t. every parameter."""
    acts = forward(net, x)
    out = acts[-1]
    delta = (out - target) * out * (1.0 - out)
    grad_w: list[np.ndarray] = []
    grad_b: list[np.ndarray] = []
    for l in range(len(net.weights) - 1, -1, -1):
        grad_w.insert(0, np.outer(delta, acts[l]))
        grad_b.insert(0, delta.copy())
        if l > 0:
            a = acts[l]
            delta = (net.weights[l].T @ delta) * a * (1.0 - a)
    return grad_w, grad_b


def gradient_check(net: Network, example: LabeledExample, epsilon: float = 1e-5) -> float:
    """Max relative disagreement between analytic and central-difference grads.

    For every parameter theta the comparison is
    |analytic - numeric| / max(1e-12, |analytic| + |numeric|) with
    numeric = (E(theta+eps) - E(theta-eps)) / (2 eps).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(example.features, dtype=np.float64)
    target = one_hot(example.label)
    grad_w, grad_b = backprop_single(net, x, target)

    probe = Network([w.copy() for w in net.weights], [b.copy() for b in net.biases],
                    net.activation, net.config)
    worst = 0.0
    for params, grads in ((probe.weights, grad_w), (probe.biases, grad_b)):
        for arr, grad in zip(params, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                saved = flat[i]
                flat[i] = saved + epsilon
                e_plus = example_loss(probe, x, target)
                flat[i] = saved - epsilon
                e_minus = example_loss(probe, x, target)
                flat[i] = saved
                numeric = (e_plus - e_minus) / (2.0 * epsilon)
                rel = abs(gflat[i] - numeric) / max(1e-12, abs(gflat[i]) + abs(numeric))
                if rel > worst:
                    worst = rel
    return worst

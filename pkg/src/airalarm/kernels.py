"""Numeric core: sigmoid, parameter packing, and the SGD epoch kernel.

The per-example update loop is the only hot path in the package: one
training run walks every example once per epoch and mutates the weights
after each example, so it cannot be vectorized across examples. Two
interchangeable implementations exist:

* ``sgd_epoch_numba`` - an ``@njit`` kernel over a flat parameter vector
* ``sgd_epoch_numpy`` - a pure-numpy fallback with identical semantics

``AIRALARM_BACKEND`` selects the active one: ``auto`` (default, numba when
importable), ``numba``, or ``numpy``. ``benchmarks/bench_sgd.py`` times the
two side by side.

Parameters are packed into one flat float64 vector: for each layer l, the
weight matrix (row-major, shape out x in, entry [j, i] = weight from node i
to node j) followed by the bias vector. Both kernels mutate the vector in
place and return the summed squared output error over the epoch.
"""

from __future__ import annotations

import math
import os
import warnings
from typing import Sequence

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic sigmoid, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def layout(sizes: Sequence[int]) -> tuple[np.ndarray, np.ndarray, int]:
    """Offsets of each layer's weights and biases inside the flat vector."""
    w_off = []
    b_off = []
    offset = 0
    for l in range(len(sizes) - 1):
        w_off.append(offset)
        offset += sizes[l + 1] * sizes[l]
        b_off.append(offset)
        offset += sizes[l + 1]
    return np.asarray(w_off, dtype=np.int64), np.asarray(b_off, dtype=np.int64), offset


def pack_params(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]) -> np.ndarray:
    parts = []
    for w, b in zip(weights, biases):
        parts.append(np.asarray(w, dtype=np.float64).ravel())
        parts.append(np.asarray(b, dtype=np.float64).ravel())
    return np.concatenate(parts)


def unpack_params(theta: np.ndarray, sizes: Sequence[int]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    w_off, b_off, total = layout(sizes)
    if theta.shape != (total,):
        raise ValueError(f"parameter vector has length {theta.shape[0]}, expected {total}")
    weights = []
    biases = []
    for l in range(len(sizes) - 1):
        n_out, n_in = sizes[l + 1], sizes[l]
        weights.append(theta[w_off[l]:w_off[l] + n_out * n_in].reshape(n_out, n_in).copy())
        biases.append(theta[b_off[l]:b_off[l] + n_out].copy())
    return weights, biases


def _param_views(theta: np.ndarray, sizes: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    # Views share theta's memory so in-place updates write through.
    w_off, b_off, _ = layout(sizes)
    weights = []
    biases = []
    for l in range(len(sizes) - 1):
        n_out, n_in = int(sizes[l + 1]), int(sizes[l])
        weights.append(theta[w_off[l]:w_off[l] + n_out * n_in].reshape(n_out, n_in))
        biases.append(theta[b_off[l]:b_off[l] + n_out])
    return weights, biases


def sgd_epoch_numpy(
    theta: np.ndarray,
    sizes: np.ndarray,
    X: np.ndarray,
    T: np.ndarray,
    order: np.ndarray,
    lr: float,
) -> float:
    """One epoch of per-example SGD, pure numpy. Mutates theta in place."""
    weights, biases = _param_views(theta, sizes)
    n_layers = len(sizes)
    sse = 0.0
    for idx in order:
        acts = [X[idx]]
        for w, b in zip(weights, biases):
            acts.append(sigmoid(w @ acts[-1] + b))
        out = acts[-1]
        err = out - T[idx]
        sse += float(err @ err)
        # All deltas come from the pre-update parameters; updates follow.
        deltas = [err * out * (1.0 - out)]
        for l in range(n_layers - 2, 0, -1):
            a = acts[l]
            deltas.insert(0, (weights[l].T @ deltas[0]) * a * (1.0 - a))
        for l in range(n_layers - 1):
            weights[l] -= lr * np.outer(deltas[l], acts[l])
            biases[l] -= lr * deltas[l]
    return sse


def _sgd_epoch_python(theta, sizes, X, T, order, lr):
    """Loop-level epoch kernel; compiled by numba when available."""
    n_layers = sizes.shape[0]
    width = 0
    for l in range(n_layers):
        if sizes[l] > width:
            width = sizes[l]
    # Recompute the per-layer offsets locally (no helper calls in nopython mode).
    w_off = np.zeros(n_layers - 1, dtype=np.int64)
    b_off = np.zeros(n_layers - 1, dtype=np.int64)
    offset = 0
    for l in range(n_layers - 1):
        w_off[l] = offset
        offset += sizes[l + 1] * sizes[l]
        b_off[l] = offset
        offset += sizes[l + 1]

    acts = np.zeros((n_layers, width))
    deltas = np.zeros((n_layers, width))
    n_out = sizes[n_layers - 1]
    sse = 0.0
    for n in range(order.shape[0]):
        idx = order[n]
        for i in range(sizes[0]):
            acts[0, i] = X[idx, i]
        # forward
        for l in range(n_layers - 1):
            for j in range(sizes[l + 1]):
                z = theta[b_off[l] + j]
                base = w_off[l] + j * sizes[l]
                for i in range(sizes[l]):
                    z += theta[base + i] * acts[l, i]
                if z >= 0.0:
                    acts[l + 1, j] = 1.0 / (1.0 + math.exp(-z))
                else:
                    ez = math.exp(z)
                    acts[l + 1, j] = ez / (1.0 + ez)
        # output delta for loss E = 1/2 * sum (o - t)^2
        for k in range(n_out):
            o = acts[n_layers - 1, k]
            diff = o - T[idx, k]
            sse += diff * diff
            deltas[n_layers - 1, k] = diff * o * (1.0 - o)
        # hidden deltas, all from pre-update weights
        for l in range(n_layers - 2, 0, -1):
            for i in range(sizes[l]):
                s = 0.0
                for j in range(sizes[l + 1]):
                    s += theta[w_off[l] + j * sizes[l] + i] * deltas[l + 1, j]
                a = acts[l, i]
                deltas[l, i] = s * a * (1.0 - a)
        # update
        for l in range(n_layers - 1):
            for j in range(sizes[l + 1]):
                d = deltas[l + 1, j]
                base = w_off[l] + j * sizes[l]
                for i in range(sizes[l]):
                    theta[base + i] -= lr * d * acts[l, i]
                theta[b_off[l] + j] -= lr * d
    return sse


if njit is not None:
    sgd_epoch_numba = njit(cache=True)(_sgd_epoch_python)
else:  # pragma: no cover
    sgd_epoch_numba = None


def _select_backend() -> str:
    choice = os.environ.get("AIRALARM_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        warnings.warn(f"unknown AIRALARM_BACKEND={choice!r}, using auto")
        choice = "auto"
    if choice == "numba" and sgd_epoch_numba is None:
        raise RuntimeError("AIRALARM_BACKEND=numba but numba is not importable")
    if choice == "numpy":
        return "numpy"
    return "numba" if sgd_epoch_numba is not None else "numpy"


BACKEND = _select_backend()
sgd_epoch = sgd_epoch_numba if BACKEND == "numba" else sgd_epoch_numpy


def backend_name() -> str:
    """Name of the active epoch-kernel implementation."""
    return BACKEND

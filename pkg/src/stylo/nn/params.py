"""Parameter containers for the recurrent language models.

Each scan direction keeps its four gates stacked in one (4H, H+V) matrix so
the per-timestep work is a single matrix-vector product. Row blocks are
ordered forget, input, output, cell; columns [0:H] multiply the previous
hidden state and columns [H:H+V] multiply the one-hot input, matching the
concatenation order [h_prev, x].
"""
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError

GATE_ORDER = ("forget", "input", "output", "cell")

ARCHITECTURES = ("bilstm", "lstm_uni", "rnn")


@dataclass
class GateParams:
    """One gate's weight matrix (H, H+V) and bias (H,).

    Views into the direction's stacked storage: mutating them mutates the
    direction, and shapes are fixed by the parent.
    """

    W: np.ndarray
    b: np.ndarray


class DirectionParams:
    """Stacked gate parameters for one scan direction."""

    def __init__(self, W: np.ndarray, b: np.ndarray):
        if W.ndim != 2 or W.shape[0] % 4 != 0:
            raise DataError(f"direction weight matrix must be (4H, H+V), got {W.shape}")
        hidden = W.shape[0] // 4
        if W.shape[1] <= hidden:
            raise DataError(f"direction weight matrix too narrow for hidden={hidden}: {W.shape}")
        if b.shape != (4 * hidden,):
            raise DataError(f"direction bias must be (4H,), got {b.shape}")
        self.W = W
        self.b = b
        self.hidden = hidden
        self.vocab_size = W.shape[1] - hidden

    def gate(self, name: str) -> GateParams:
        i = GATE_ORDER.index(name)
        h = self.hidden
        return GateParams(W=self.W[i * h : (i + 1) * h], b=self.b[i * h : (i + 1) * h])

    @property
    def forget(self) -> GateParams:
        return self.gate("forget")

    @property
    def input(self) -> GateParams:
        return self.gate("input")

    @property
    def output(self) -> GateParams:
        return self.gate("output")

    @property
    def cell(self) -> GateParams:
        return self.gate("cell")


class ModelParams:
    """All trainable tensors of one model, keyed for optimizers/checkpoints.

    arch selects the layout: "bilstm" has two gate directions, "lstm_uni"
    one, "rnn" a single plain tanh recurrence. The projection maps the final
    hidden feature vector (length 2H for bilstm, else H) onto vocabulary
    logits.
    """

    def __init__(self, arch: str, hidden: int, vocab_size: int, tensors: dict):
        if arch not in ARCHITECTURES:
            raise DataError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")
        self.arch = arch
        self.hidden = hidden
        self.vocab_size = vocab_size
        self._tensors = dict(tensors)
        for name, arr in self._tensors.items():
            expected = self._expected_shape(name)
            if arr.shape != expected:
                raise DataError(f"tensor {name} has shape {arr.shape}, expected {expected}")
            if arr.dtype != np.float64:
                raise DataError(f"tensor {name} must be float64")
        if set(self._tensors) != set(self.tensor_names(arch)):
            raise DataError(
                f"tensor set {sorted(self._tensors)} does not match architecture {arch}"
            )

    @staticmethod
    def tensor_names(arch: str):
        if arch == "bilstm":
            return ("fwd.W", "fwd.b", "bwd.W", "bwd.b", "proj.W", "proj.b")
        if arch == "lstm_uni":
            return ("fwd.W", "fwd.b", "proj.W", "proj.b")
        return ("rnn.W", "rnn.b", "proj.W", "proj.b")

    def _expected_shape(self, name: str):
        h, v = self.hidden, self.vocab_size
        if name in ("fwd.W", "bwd.W"):
            return (4 * h, h + v)
        if name in ("fwd.b", "bwd.b"):
            return (4 * h,)
        if name == "rnn.W":
            return (h, h + v)
        if name == "rnn.b":
            return (h,)
        if name == "proj.W":
            return (v, self.feature_size)
        if name == "proj.b":
            return (v,)
        raise DataError(f"unknown tensor name {name!r}")

    @property
    def feature_size(self) -> int:
        """Length of the hidden feature vector feeding the projection."""
        return 2 * self.hidden if self.arch == "bilstm" else self.hidden

    def tensors(self):
        """(name, array) pairs in the fixed architecture order."""
        return [(name, self._tensors[name]) for name in self.tensor_names(self.arch)]

    def tensor(self, name: str) -> np.ndarray:
        return self._tensors[name]

    @property
    def fwd(self) -> DirectionParams:
        return DirectionParams(self._tensors["fwd.W"], self._tensors["fwd.b"])

    @property
    def bwd(self) -> DirectionParams:
        return DirectionParams(self._tensors["bwd.W"], self._tensors["bwd.b"])

    @property
    def proj_W(self) -> np.ndarray:
        return self._tensors["proj.W"]

    @property
    def proj_b(self) -> np.ndarray:
        return self._tensors["proj.b"]

    def check_finite(self):
        for name, arr in self.tensors():
            if not np.all(np.isfinite(arr)):
                raise DataError(f"tensor {name} contains non-finite values")

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.arch,
            self.hidden,
            self.vocab_size,
            {name: arr.copy() for name, arr in self.tensors()},
        )


def zero_params(arch: str, hidden: int, vocab_size: int) -> ModelParams:
    """All-zero model: predicts the uniform distribution regardless of input."""
    shapes = _shapes(arch, hidden, vocab_size)
    return ModelParams(arch, hidden, vocab_size, {n: np.zeros(s) for n, s in shapes})


def init_params(arch: str, hidden: int, vocab_size: int, seed: int) -> ModelParams:
    """Seeded init: recurrent weights uniform(-k, k) with k = 1/sqrt(hidden + V),
    biases zero except the forget-gate block, which starts at 1.0 so early
    training retains cell state. The projection starts at zero, so an
    untrained model predicts exactly the uniform distribution (loss ln V,
    perplexity V). Tensors are drawn in their fixed order, so a seed pins
    every value."""
    rng = np.random.default_rng(seed)
    k = 1.0 / math.sqrt(hidden + vocab_size)
    tensors = {}
    for name, shape in _shapes(arch, hidden, vocab_size):
        if name.endswith(".b") or name.startswith("proj."):
            arr = np.zeros(shape)
            if name in ("fwd.b", "bwd.b"):
                arr[:hidden] = 1.0
        else:
            arr = rng.uniform(-k, k, size=shape)
        tensors[name] = arr
    return ModelParams(arch, hidden, vocab_size, tensors)


def _shapes(arch: str, hidden: int, vocab_size: int):
    if arch not in ARCHITECTURES:
        raise DataError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")
    h, v = hidden, vocab_size
    d = 2 * h if arch == "bilstm" else h
    shapes = []
    if arch in ("bilstm", "lstm_uni"):
        shapes += [("fwd.W", (4 * h, h + v)), ("fwd.b", (4 * h,))]
    if arch == "bilstm":
        shapes += [("bwd.W", (4 * h, h + v)), ("bwd.b", (4 * h,))]
    if arch == "rnn":
        shapes += [("rnn.W", (h, h + v)), ("rnn.b", (h,))]
    shapes += [("proj.W", (v, d)), ("proj.b", (v,))]
    return shapes

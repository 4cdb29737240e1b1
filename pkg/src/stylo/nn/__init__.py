"""Recurrent language-model core: gates, sequence encoders, loss, BPTT.

The model predicts the character after a fixed-length window. Both LSTM
directions (and the RNN baseline) read the window, their final hidden states
are concatenated and projected onto vocabulary logits, and softmax gives the
next-character distribution. Per-sequence loops run on the selected kernel
backend; everything else is numpy.
"""
import numpy as np

from ..errors import DataError
from .backend import active_backend, kernels
from .params import (
    ARCHITECTURES,
    GATE_ORDER,
    DirectionParams,
    GateParams,
    ModelParams,
    init_params,
    zero_params,
)

# Floor inside log() so a zero probability yields a large finite loss instead
# of -inf. Pinned: loss values are reproducible bit-for-bit at this epsilon.
LOG_EPS = 1e-12


def sigmoid(v):
    """Componentwise logistic function 1/(1 + e^-x), stable for large |x|."""
    from . import pure

    return pure.sigmoid(np.asarray(v, dtype=np.float64))


def softmax(z):
    """Probability vector proportional to e^z; strictly positive, sums to 1."""
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def cross_entropy(pred, target_id: int) -> float:
    """Negative log probability of the true class: -log(pred[target] + eps),
    clamped so a perfect prediction scores exactly 0."""
    pred = np.asarray(pred)
    if not 0 <= target_id < pred.shape[0]:
        raise DataError(f"target id {target_id} out of range for {pred.shape[0]} classes")
    return float(-np.log(min(pred[target_id] + LOG_EPS, 1.0)))


class CellState:
    """LSTM recurrent state: hidden vector h and cell accumulator c."""

    def __init__(self, h, c):
        self.h = np.asarray(h, dtype=np.float64)
        self.c = np.asarray(c, dtype=np.float64)

    @classmethod
    def zeros(cls, hidden: int) -> "CellState":
        return cls(np.zeros(hidden), np.zeros(hidden))


class GateRecord:
    """Gate activations of one LSTM step (forget, input, output, candidate)."""

    def __init__(self, f, i, o, g):
        self.f = f
        self.i = i
        self.o = o
        self.g = g


def lstm_cell_forward(x_t, prev: CellState, p: DirectionParams):
    """One LSTM step on a single input vector.

    Gates are sigmoid affine maps of the concatenation [h_prev, x]; the
    candidate uses tanh; the new cell state is f*c_prev + i*candidate and the
    hidden state is o*tanh(c). Reference path: the sequence kernels compute
    exactly this, step by step.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    h = p.hidden
    if x_t.shape != (p.vocab_size,):
        raise DataError(f"input vector has shape {x_t.shape}, expected ({p.vocab_size},)")
    if prev.h.shape != (h,) or prev.c.shape != (h,):
        raise DataError(f"previous state shape mismatch for hidden={h}")
    a = p.W @ np.concatenate([prev.h, x_t]) + p.b
    f = sigmoid(a[0:h])
    i = sigmoid(a[h : 2 * h])
    o = sigmoid(a[2 * h : 3 * h])
    g = np.tanh(a[3 * h : 4 * h])
    c = f * prev.c + i * g
    h_t = o * np.tanh(c)
    return CellState(h_t, c), GateRecord(f, i, o, g)


def rnn_cell_forward(x_t, h_prev, p: DirectionParams = None, W=None, b=None):
    """One plain tanh recurrence step: h = tanh(W [h_prev, x] + b)."""
    if W is None:
        W, b = p.W, p.b
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    if x_t.shape[0] + h_prev.shape[0] != W.shape[1]:
        raise DataError(
            f"concatenated input length {h_prev.shape[0] + x_t.shape[0]} "
            f"does not match weight columns {W.shape[1]}"
        )
    return np.tanh(W @ np.concatenate([h_prev, x_t]) + b)


class DirectionTrace:
    """Per-timestep activations of one scan direction, kept for backprop.

    scan_ids is the id sequence in the order this direction consumed it (the
    backward direction of a bilstm scans the window reversed).
    """

    def __init__(self, scan_ids, hidden):
        T = scan_ids.shape[0]
        self.scan_ids = scan_ids
        self.H_arr = np.zeros((T + 1, hidden))
        self.C_arr = np.zeros((T + 1, hidden))
        self.F = np.empty((T, hidden))
        self.I = np.empty((T, hidden))
        self.O = np.empty((T, hidden))
        self.G = np.empty((T, hidden))

    @property
    def final_h(self):
        return self.H_arr[-1]


class ForwardTrace:
    """Everything a forward pass produced: per-direction activations, the
    concatenated feature vector, logits and the predictive distribution."""

    def __init__(self, arch, window, directions, feats, logits, probs):
        self.arch = arch
        self.window = window
        self.directions = directions  # dict: "fwd"/"bwd"/"rnn" -> DirectionTrace
        self.feats = feats
        self.logits = logits
        self.probs = probs


def forward(params: ModelParams, window) -> ForwardTrace:
    """Encode a window of character ids and predict the next character."""
    ids = np.ascontiguousarray(window, dtype=np.int64)
    if ids.ndim != 1 or ids.shape[0] < 1:
        raise DataError(f"window must be a non-empty 1-d id sequence, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= params.vocab_size:
        raise DataError("window contains ids outside the vocabulary")
    h = params.hidden
    directions = {}
    if params.arch == "rnn":
        tr = DirectionTrace(ids, h)
        kernels.rnn_seq_forward(ids, params.tensor("rnn.W"), params.tensor("rnn.b"), tr.H_arr)
        directions["rnn"] = tr
        feats = tr.final_h.copy()
    else:
        tr = DirectionTrace(ids, h)
        kernels.lstm_seq_forward(
            ids, params.tensor("fwd.W"), params.tensor("fwd.b"),
            tr.H_arr, tr.C_arr, tr.F, tr.I, tr.O, tr.G,
        )
        directions["fwd"] = tr
        if params.arch == "bilstm":
            rev = np.ascontiguousarray(ids[::-1])
            tb = DirectionTrace(rev, h)
            kernels.lstm_seq_forward(
                rev, params.tensor("bwd.W"), params.tensor("bwd.b"),
                tb.H_arr, tb.C_arr, tb.F, tb.I, tb.O, tb.G,
            )
            directions["bwd"] = tb
            feats = np.concatenate([tr.final_h, tb.final_h])
        else:
            feats = tr.final_h.copy()
    logits = params.proj_W @ feats + params.proj_b
    probs = softmax(logits)
    return ForwardTrace(params.arch, ids, directions, feats, logits, probs)


def bilstm_forward(window, params: ModelParams) -> ForwardTrace:
    if params.arch != "bilstm":
        raise DataError(f"expected bilstm parameters, got {params.arch}")
    return forward(params, window)


def uni_lstm_forward(window, params: ModelParams) -> ForwardTrace:
    if params.arch != "lstm_uni":
        raise DataError(f"expected lstm_uni parameters, got {params.arch}")
    return forward(params, window)


def rnn_forward(window, params: ModelParams) -> ForwardTrace:
    if params.arch != "rnn":
        raise DataError(f"expected rnn parameters, got {params.arch}")
    return forward(params, window)


def bptt_backward(trace: ForwardTrace, target_id: int, params: ModelParams):
    """Exact gradients of the cross-entropy loss w.r.t. every parameter.

    Softmax + cross-entropy collapse to (p - onehot) at the logits; the head
    gradient flows into each direction's final hidden state and the kernels
    unroll it back through every timestep. Returns a dict keyed like
    params.tensors().
    """
    if not 0 <= target_id < params.vocab_size:
        raise DataError(f"target id {target_id} out of range")
    grads = {name: np.zeros_like(arr) for name, arr in params.tensors()}
    dz = trace.probs.copy()
    dz[target_id] -= 1.0
    grads["proj.W"] += np.outer(dz, trace.feats)
    grads["proj.b"] += dz
    dfeats = params.proj_W.T @ dz
    h = params.hidden
    if params.arch == "rnn":
        tr = trace.directions["rnn"]
        kernels.rnn_seq_backward(
            tr.scan_ids, params.tensor("rnn.W"), tr.H_arr, dfeats,
            grads["rnn.W"], grads["rnn.b"],
        )
    else:
        tr = trace.directions["fwd"]
        kernels.lstm_seq_backward(
            tr.scan_ids, params.tensor("fwd.W"), tr.F, tr.I, tr.O, tr.G,
            tr.H_arr, tr.C_arr, dfeats[:h], grads["fwd.W"], grads["fwd.b"],
        )
        if params.arch == "bilstm":
            tb = trace.directions["bwd"]
            kernels.lstm_seq_backward(
                tb.scan_ids, params.tensor("bwd.W"), tb.F, tb.I, tb.O, tb.G,
                tb.H_arr, tb.C_arr, dfeats[h:], grads["bwd.W"], grads["bwd.b"],
            )
    return grads


def loss_on_window(params: ModelParams, window, target_id: int) -> float:
    """Convenience: forward pass + cross-entropy, no trace kept."""
    return cross_entropy(forward(params, window).probs, target_id)

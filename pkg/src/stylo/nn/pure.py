"""Pure numpy sequence kernels: the fallback backend.

Same call signatures as the compiled extension (stylo._ckernels); the hot
per-timestep loop stays in Python but every step is one BLAS matvec plus
vectorized elementwise work. The one-hot input never materializes: column
H + id of the stacked weight matrix is the input contribution.

All arrays are float64, C-contiguous, caller-allocated. Forward kernels fill
the trace arrays; backward kernels accumulate into the gradient arrays.
"""
import numpy as np

NAME = "pure"


def sigmoid(x):
    """Numerically stable logistic function."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_seq_forward(ids, W, b, H_arr, C_arr, F, I, O, G):
    """Run one LSTM direction over the id sequence.

    ids: (T,) int64. W: (4H, H+V) stacked forget/input/output/cell. b: (4H,).
    H_arr, C_arr: (T+1, H), row 0 is the (zero) initial state. F, I, O, G:
    (T, H) gate activations and candidate, saved for backprop.
    """
    T = ids.shape[0]
    H = H_arr.shape[1]
    Wh = W[:, :H]
    Wx = W[:, H:]
    H_arr[0] = 0.0
    C_arr[0] = 0.0
    for t in range(T):
        a = Wh @ H_arr[t] + Wx[:, ids[t]] + b
        F[t] = sigmoid(a[0:H])
        I[t] = sigmoid(a[H : 2 * H])
        O[t] = sigmoid(a[2 * H : 3 * H])
        G[t] = np.tanh(a[3 * H : 4 * H])
        C_arr[t + 1] = F[t] * C_arr[t] + I[t] * G[t]
        H_arr[t + 1] = O[t] * np.tanh(C_arr[t + 1])


def lstm_seq_backward(ids, W, F, I, O, G, H_arr, C_arr, dh_final, dW, db):
    """Backpropagate through one LSTM direction.

    dh_final (H,) is the loss gradient at the direction's final hidden state
    (only the final state feeds the head). Accumulates into dW (4H, H+V) and
    db (4H,).
    """
    T = ids.shape[0]
    H = H_arr.shape[1]
    Wh = W[:, :H]
    DA = np.empty((T, 4 * H))
    dh = dh_final.copy()
    dc = np.zeros(H)
    for t in range(T - 1, -1, -1):
        tc = np.tanh(C_arr[t + 1])
        do = dh * tc
        dc += dh * O[t] * (1.0 - tc * tc)
        df = dc * C_arr[t]
        di = dc * G[t]
        dg = dc * I[t]
        da = DA[t]
        da[0:H] = df * F[t] * (1.0 - F[t])
        da[H : 2 * H] = di * I[t] * (1.0 - I[t])
        da[2 * H : 3 * H] = do * O[t] * (1.0 - O[t])
        da[3 * H : 4 * H] = dg * (1.0 - G[t] * G[t])
        dh = Wh.T @ da
        dc = dc * F[t]
    dW[:, :H] += DA.T @ H_arr[:T]
    np.add.at(dW[:, H:].T, ids, DA)
    db += DA.sum(axis=0)


def rnn_seq_forward(ids, W, b, H_arr):
    """Plain tanh recurrence: h_t = tanh(W [h_prev, x] + b)."""
    T = ids.shape[0]
    H = H_arr.shape[1]
    Wh = W[:, :H]
    Wx = W[:, H:]
    H_arr[0] = 0.0
    for t in range(T):
        H_arr[t + 1] = np.tanh(Wh @ H_arr[t] + Wx[:, ids[t]] + b)


def rnn_seq_backward(ids, W, H_arr, dh_final, dW, db):
    """Backpropagate through the tanh recurrence; accumulates dW, db."""
    T = ids.shape[0]
    H = H_arr.shape[1]
    Wh = W[:, :H]
    DA = np.empty((T, H))
    dh = dh_final.copy()
    for t in range(T - 1, -1, -1):
        da = dh * (1.0 - H_arr[t + 1] * H_arr[t + 1])
        DA[t] = da
        dh = Wh.T @ da
    dW[:, :H] += DA.T @ H_arr[:T]
    np.add.at(dW[:, H:].T, ids, DA)
    db += DA.sum(axis=0)

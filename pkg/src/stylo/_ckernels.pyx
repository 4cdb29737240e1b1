# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sequence kernels: the fast backend.

Call-compatible with stylo.nn.pure; selected at import by stylo.nn.backend.
Matrix work goes through BLAS (dgemv/dger on the stacked gate matrices, via
scipy's Cython bindings); gate nonlinearities and the recurrence run as C
loops, so a whole sequence costs no per-timestep Python overhead.

Memory note: a row-major (M, N) matrix is the column-major transpose with
lda = N, which is how the W blocks are handed to Fortran BLAS below.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport daxpy, dger, dgemv

NAME = "c"


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def lstm_seq_forward(const cnp.int64_t[::1] ids, const double[:, ::1] W, const double[::1] b,
                     double[:, ::1] H_arr, double[:, ::1] C_arr,
                     double[:, ::1] F, double[:, ::1] I, double[:, ::1] O, double[:, ::1] G):
    cdef int T = <int> ids.shape[0]
    cdef int H = <int> H_arr.shape[1]
    cdef int R = 4 * H
    cdef int cols = <int> W.shape[1]
    cdef int one = 1
    cdef double d_one = 1.0, d_zero = 0.0
    cdef Py_ssize_t t, j, xcol
    cdef double[::1] a = np.empty(R)
    cdef double* wp = <double*> &W[0, 0]
    cdef double* ap = &a[0]
    cdef double* bp = <double*> &b[0]
    for j in range(H):
        H_arr[0, j] = 0.0
        C_arr[0, j] = 0.0
    with nogil:
        for t in range(T):
            xcol = H + ids[t]
            # a = b + W[:, xcol] + W[:, :H] @ h_prev
            for j in range(R):
                ap[j] = bp[j] + wp[j * cols + xcol]
            dgemv("T", &H, &R, &d_one, wp, &cols, &H_arr[t, 0], &one, &d_one, ap, &one)
            for j in range(H):
                F[t, j] = _sigmoid(ap[j])
                I[t, j] = _sigmoid(ap[H + j])
                O[t, j] = _sigmoid(ap[2 * H + j])
                G[t, j] = tanh(ap[3 * H + j])
                C_arr[t + 1, j] = F[t, j] * C_arr[t, j] + I[t, j] * G[t, j]
                H_arr[t + 1, j] = O[t, j] * tanh(C_arr[t + 1, j])


def lstm_seq_backward(const cnp.int64_t[::1] ids, const double[:, ::1] W,
                      const double[:, ::1] F, const double[:, ::1] I,
                      const double[:, ::1] O, const double[:, ::1] G,
                      const double[:, ::1] H_arr, const double[:, ::1] C_arr,
                      const double[::1] dh_final,
                      double[:, ::1] dW, double[::1] db):
    cdef int T = <int> ids.shape[0]
    cdef int H = <int> H_arr.shape[1]
    cdef int R = 4 * H
    cdef int cols = <int> W.shape[1]
    cdef int one = 1
    cdef double d_one = 1.0, d_zero = 0.0
    cdef Py_ssize_t t, j, xcol
    cdef double tc, do, dcj
    cdef double[::1] dh = np.empty(H)
    cdef double[::1] dc = np.zeros(H)
    cdef double[::1] da = np.empty(R)
    cdef double* wp = <double*> &W[0, 0]
    cdef double* dwp = &dW[0, 0]
    cdef double* dap = &da[0]
    for j in range(H):
        dh[j] = dh_final[j]
    with nogil:
        for t in range(T - 1, -1, -1):
            for j in range(H):
                tc = tanh(C_arr[t + 1, j])
                do = dh[j] * tc
                dcj = dc[j] + dh[j] * O[t, j] * (1.0 - tc * tc)
                dap[j] = dcj * C_arr[t, j] * F[t, j] * (1.0 - F[t, j])
                dap[H + j] = dcj * G[t, j] * I[t, j] * (1.0 - I[t, j])
                dap[2 * H + j] = do * O[t, j] * (1.0 - O[t, j])
                dap[3 * H + j] = dcj * I[t, j] * (1.0 - G[t, j] * G[t, j])
                dc[j] = dcj * F[t, j]
            xcol = H + ids[t]
            # db += da; dW[:, xcol] += da; dW[:, :H] += outer(da, h_prev)
            daxpy(&R, &d_one, dap, &one, &db[0], &one)
            daxpy(&R, &d_one, dap, &one, dwp + xcol, &cols)
            dger(&H, &R, &d_one, <double*> &H_arr[t, 0], &one, dap, &one, dwp, &cols)
            # dh = W[:, :H].T @ da
            dgemv("N", &H, &R, &d_one, wp, &cols, dap, &one, &d_zero, &dh[0], &one)


def rnn_seq_forward(const cnp.int64_t[::1] ids, const double[:, ::1] W, const double[::1] b,
                    double[:, ::1] H_arr):
    cdef int T = <int> ids.shape[0]
    cdef int H = <int> H_arr.shape[1]
    cdef int cols = <int> W.shape[1]
    cdef int one = 1
    cdef double d_one = 1.0
    cdef Py_ssize_t t, j, xcol
    cdef double[::1] a = np.empty(H)
    cdef double* wp = <double*> &W[0, 0]
    cdef double* ap = &a[0]
    cdef double* bp = <double*> &b[0]
    for j in range(H):
        H_arr[0, j] = 0.0
    with nogil:
        for t in range(T):
            xcol = H + ids[t]
            for j in range(H):
                ap[j] = bp[j] + wp[j * cols + xcol]
            dgemv("T", &H, &H, &d_one, wp, &cols, &H_arr[t, 0], &one, &d_one, ap, &one)
            for j in range(H):
                H_arr[t + 1, j] = tanh(ap[j])


def rnn_seq_backward(const cnp.int64_t[::1] ids, const double[:, ::1] W,
                     const double[:, ::1] H_arr, const double[::1] dh_final,
                     double[:, ::1] dW, double[::1] db):
    cdef int T = <int> ids.shape[0]
    cdef int H = <int> H_arr.shape[1]
    cdef int cols = <int> W.shape[1]
    cdef int one = 1
    cdef double d_one = 1.0, d_zero = 0.0
    cdef Py_ssize_t t, j, xcol
    cdef double[::1] dh = np.empty(H)
    cdef double[::1] da = np.empty(H)
    cdef double* wp = <double*> &W[0, 0]
    cdef double* dwp = &dW[0, 0]
    cdef double* dap = &da[0]
    for j in range(H):
        dh[j] = dh_final[j]
    with nogil:
        for t in range(T - 1, -1, -1):
            for j in range(H):
                dap[j] = dh[j] * (1.0 - H_arr[t + 1, j] * H_arr[t + 1, j])
            xcol = H + ids[t]
            daxpy(&H, &d_one, dap, &one, &db[0], &one)
            daxpy(&H, &d_one, dap, &one, dwp + xcol, &cols)
            dger(&H, &H, &d_one, <double*> &H_arr[t, 0], &one, dap, &one, dwp, &cols)
            dgemv("N", &H, &H, &d_one, wp, &cols, dap, &one, &d_zero, &dh[0], &one)

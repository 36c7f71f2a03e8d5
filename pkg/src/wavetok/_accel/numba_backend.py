"""Numba-jitted kernel implementations.

Single-threaded on purpose: training determinism is defined per fixed
thread count, and the desk-scale shapes here don't amortize threading
overhead. fastmath stays off so gradient checks see IEEE semantics.
"""

import numpy as np
from numba import njit

NAME = "numba"


def conv1d_out_len(length: int, kernel: int, stride: int, pad: int) -> int:
    return (length + 2 * pad - kernel) // stride + 1


@njit(cache=True)
def _conv1d_fwd(x, w, y, stride, pad):
    B, Ci, L = x.shape
    Co, _, K = w.shape
    Lo = y.shape[2]
    for b in range(B):
        for o in range(Co):
            for t in range(Lo):
                base = t * stride - pad
                acc = 0.0
                for c in range(Ci):
                    for j in range(K):
                        l = base + j
                        if 0 <= l < L:
                            acc += x[b, c, l] * w[o, c, j]
                y[b, o, t] = acc


@njit(cache=True)
def _conv1d_bwd_x(gy, w, gx, stride, pad):
    B, Co, Lo = gy.shape
    _, Ci, K = w.shape
    L = gx.shape[2]
    for b in range(B):
        for o in range(Co):
            for t in range(Lo):
                base = t * stride - pad
                g = gy[b, o, t]
                for c in range(Ci):
                    for j in range(K):
                        l = base + j
                        if 0 <= l < L:
                            gx[b, c, l] += g * w[o, c, j]


@njit(cache=True)
def _conv1d_bwd_w(x, gy, gw, stride, pad):
    B, Ci, L = x.shape
    Co, _, K = gw.shape
    Lo = gy.shape[2]
    for b in range(B):
        for o in range(Co):
            for t in range(Lo):
                base = t * stride - pad
                g = gy[b, o, t]
                for c in range(Ci):
                    for j in range(K):
                        l = base + j
                        if 0 <= l < L:
                            gw[o, c, j] += g * x[b, c, l]


@njit(cache=True)
def _nearest_code(z, codebook, idx):
    M, D = z.shape
    K = codebook.shape[0]
    for m in range(M):
        best = 0
        best_d = np.inf
        for k in range(K):
            d = 0.0
            for j in range(D):
                diff = z[m, j] - codebook[k, j]
                d += diff * diff
            if d < best_d:  # strict: ties keep the lower index
                best_d = d
                best = k
        idx[m] = best


def conv1d_fwd(x, w, bias, stride, pad):
    B = x.shape[0]
    Co, _, K = w.shape
    Lo = conv1d_out_len(x.shape[2], K, stride, pad)
    y = np.empty((B, Co, Lo))
    _conv1d_fwd(x, w, y, stride, pad)
    if bias is not None:
        y += bias[None, :, None]
    return y


def conv1d_bwd_x(gy, w, stride, pad, length):
    gx = np.zeros((gy.shape[0], w.shape[1], length))
    _conv1d_bwd_x(gy, w, gx, stride, pad)
    return gx


def conv1d_bwd_w(x, gy, stride, pad, kernel):
    gw = np.zeros((gy.shape[1], x.shape[1], kernel))
    _conv1d_bwd_w(x, gy, gw, stride, pad)
    return gw


def nearest_code(z, codebook):
    idx = np.empty(z.shape[0], dtype=np.int64)
    _nearest_code(z, codebook, idx)
    return idx

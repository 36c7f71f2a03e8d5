"""Pure-numpy kernel implementations.

Convolutions are expressed as a short loop over kernel taps, each tap a
BLAS-backed contraction. Arrays are float64 and C-contiguous (callers
guarantee this).
"""

import numpy as np

NAME = "numpy"

# Chunk rows of the distance matrix so the [chunk, K, D] temporary stays small.
_NEAREST_CHUNK = 512


def conv1d_out_len(length: int, kernel: int, stride: int, pad: int) -> int:
    return (length + 2 * pad - kernel) // stride + 1


def conv1d_fwd(x, w, bias, stride, pad):
    """Cross-correlation of x[B,Ci,L] with w[Co,Ci,K] -> y[B,Co,Lo]."""
    B, Ci, L = x.shape
    Co, _, K = w.shape
    Lo = conv1d_out_len(L, K, stride, pad)
    xp = np.zeros((B, Ci, L + 2 * pad)) if pad else x
    if pad:
        xp[:, :, pad:pad + L] = x
    y = np.zeros((B, Co, Lo))
    for j in range(K):
        xj = xp[:, :, j:j + (Lo - 1) * stride + 1:stride]
        # y[b,o,t] += sum_c xj[b,c,t] * w[o,c,j]
        y += np.einsum("bct,oc->bot", xj, w[:, :, j], optimize=True)
    if bias is not None:
        y += bias[None, :, None]
    return y


def conv1d_bwd_x(gy, w, stride, pad, length):
    """Gradient of conv1d_fwd w.r.t. x, given gy[B,Co,Lo]."""
    B, Co, Lo = gy.shape
    _, Ci, K = w.shape
    gxp = np.zeros((B, Ci, length + 2 * pad))
    for j in range(K):
        contrib = np.einsum("bot,oc->bct", gy, w[:, :, j], optimize=True)
        gxp[:, :, j:j + (Lo - 1) * stride + 1:stride] += contrib
    return gxp[:, :, pad:pad + length] if pad else gxp


def conv1d_bwd_w(x, gy, stride, pad, kernel):
    """Gradient of conv1d_fwd w.r.t. w, given x[B,Ci,L] and gy[B,Co,Lo]."""
    B, Ci, L = x.shape
    _, Co, Lo = gy.shape[0], gy.shape[1], gy.shape[2]
    xp = np.zeros((B, Ci, L + 2 * pad)) if pad else x
    if pad:
        xp[:, :, pad:pad + L] = x
    gw = np.zeros((Co, Ci, kernel))
    for j in range(kernel):
        xj = xp[:, :, j:j + (Lo - 1) * stride + 1:stride]
        gw[:, :, j] = np.einsum("bot,bct->oc", gy, xj, optimize=True)
    return gw


def nearest_code(z, codebook):
    """Index of the nearest codebook row per row of z (squared Euclidean).

    Ties resolve to the lowest index. Distances are computed directly as
    sum((z - c)^2), not via the expanded quadratic, so exact ties stay
    exact.
    """
    M = z.shape[0]
    idx = np.empty(M, dtype=np.int64)
    for lo in range(0, M, _NEAREST_CHUNK):
        hi = min(lo + _NEAREST_CHUNK, M)
        d = ((z[lo:hi, None, :] - codebook[None, :, :]) ** 2).sum(axis=2)
        idx[lo:hi] = d.argmin(axis=1)
    return idx

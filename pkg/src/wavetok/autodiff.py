"""Minimal reverse-mode autodiff over float64 numpy arrays.

A Tensor wraps an ndarray and remembers how it was produced; backward()
walks the tape in reverse topological order and accumulates gradients
into leaves with requires_grad set. Only the ops this package needs are
implemented. Everything stays float64 so finite-difference checks are
meaningful.
"""

from __future__ import annotations

import numpy as np

from . import _accel


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False, _parents=(), _vjp=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._vjp = _vjp if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    # -- graph walk ----------------------------------------------------

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed needs a scalar output")
            grad = np.ones_like(self.data)
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        grads = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._vjp is None:
                if node.requires_grad:
                    node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # -- operators -----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, expo):
        return pow_const(self, expo)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean_(self, axis, keepdims)

    def reshape(self, *shape):
        return reshape(self, shape)

    def transpose(self, *axes):
        return transpose(self, axes)


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g, shape):
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# -- elementwise ------------------------------------------------------


def add(a, b):
    a, b = _wrap(a), _wrap(b)
    return Tensor(
        a.data + b.data,
        _parents=(a, b),
        _vjp=lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
    )


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    return Tensor(
        a.data - b.data,
        _parents=(a, b),
        _vjp=lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)),
    )


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    return Tensor(
        a.data * b.data,
        _parents=(a, b),
        _vjp=lambda g: (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        ),
    )


def div(a, b):
    a, b = _wrap(a), _wrap(b)
    return Tensor(
        a.data / b.data,
        _parents=(a, b),
        _vjp=lambda g: (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        ),
    )


def pow_const(a, expo):
    a = _wrap(a)
    out = a.data ** expo
    return Tensor(
        out,
        _parents=(a,),
        _vjp=lambda g: (g * expo * a.data ** (expo - 1),),
    )


def exp(a):
    a = _wrap(a)
    out = np.exp(a.data)
    return Tensor(out, _parents=(a,), _vjp=lambda g: (g * out,))


def log(a):
    a = _wrap(a)
    return Tensor(np.log(a.data), _parents=(a,), _vjp=lambda g: (g / a.data,))


def sqrt(a):
    a = _wrap(a)
    out = np.sqrt(a.data)
    return Tensor(out, _parents=(a,), _vjp=lambda g: (g * 0.5 / out,))


def relu(a):
    a = _wrap(a)
    mask = a.data > 0
    return Tensor(a.data * mask, _parents=(a,), _vjp=lambda g: (g * mask,))


def abs_(a):
    a = _wrap(a)
    sign = np.sign(a.data)
    return Tensor(np.abs(a.data), _parents=(a,), _vjp=lambda g: (g * sign,))


def softplus(a):
    """log(1 + exp(a)), computed stably."""
    a = _wrap(a)
    out = np.logaddexp(0.0, a.data)
    sig = 1.0 / (1.0 + np.exp(-a.data))
    return Tensor(out, _parents=(a,), _vjp=lambda g: (g * sig,))


def where_const(cond, a, b):
    """Select by a constant boolean mask; gradient routes accordingly."""
    a, b = _wrap(a), _wrap(b)
    cond = np.asarray(cond, dtype=bool)
    return Tensor(
        np.where(cond, a.data, b.data),
        _parents=(a, b),
        _vjp=lambda g: (
            _unbroadcast(g * cond, a.data.shape),
            _unbroadcast(g * ~cond, b.data.shape),
        ),
    )


# -- reductions / shape -----------------------------------------------


def sum_(a, axis=None, keepdims=False):
    a = _wrap(a)

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2, a.data.shape).copy(),)

    return Tensor(a.data.sum(axis=axis, keepdims=keepdims), _parents=(a,), _vjp=vjp)


def mean_(a, axis=None, keepdims=False):
    a = _wrap(a)
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = 1
        for ax in axes:
            count *= a.data.shape[ax]

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g / count, a.data.shape).copy(),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2 / count, a.data.shape).copy(),)

    return Tensor(a.data.mean(axis=axis, keepdims=keepdims), _parents=(a,), _vjp=vjp)


def reshape(a, shape):
    a = _wrap(a)
    return Tensor(
        a.data.reshape(shape),
        _parents=(a,),
        _vjp=lambda g: (g.reshape(a.data.shape),),
    )


def transpose(a, axes):
    a = _wrap(a)
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    return Tensor(
        a.data.transpose(axes),
        _parents=(a,),
        _vjp=lambda g: (g.transpose(inv),),
    )


def matmul(a, b):
    """Batched matrix product with numpy broadcasting over batch dims."""
    a, b = _wrap(a), _wrap(b)

    def vjp(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    return Tensor(a.data @ b.data, _parents=(a, b), _vjp=vjp)


def take_rows(table, idx):
    """Row gather table[idx]; backward scatter-adds into the table."""
    table = _wrap(table)
    idx = np.asarray(idx)

    def vjp(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return (gt,)

    return Tensor(table.data[idx], _parents=(table,), _vjp=vjp)


# -- composites -------------------------------------------------------


def softmax(a, axis=-1):
    shift = sub(a, Tensor(a.data.max(axis=axis, keepdims=True)))
    e = exp(shift)
    return div(e, sum_(e, axis=axis, keepdims=True))


def smooth_l1(pred, target, delta=1.0):
    """Mean smooth-L1: 0.5 u^2 below delta, delta*(|u| - 0.5 delta) above."""
    u = sub(pred, _wrap(target))
    au = abs_(u)
    quad = mul(pow_const(u, 2), 0.5)
    lin = mul(sub(au, 0.5 * delta), delta)
    return mean_(where_const(au.data < delta, quad, lin))


# -- convolution primitives -------------------------------------------


def conv1d(x, w, bias, stride, pad):
    """x[B,Ci,L] * w[Co,Ci,K] -> [B,Co,Lo]; kernels live in _accel."""
    x, w = _wrap(x), _wrap(w)
    bias = _wrap(bias) if bias is not None else None
    xd = np.ascontiguousarray(x.data)
    wd = np.ascontiguousarray(w.data)
    y = _accel.conv1d_fwd(xd, wd, bias.data if bias is not None else None, stride, pad)

    def vjp(g):
        g = np.ascontiguousarray(g)
        gx = _accel.conv1d_bwd_x(g, wd, stride, pad, xd.shape[2])
        gw = _accel.conv1d_bwd_w(xd, g, stride, pad, wd.shape[2])
        gb = g.sum(axis=(0, 2)) if bias is not None else None
        return (gx, gw, gb)

    parents = (x, w, bias) if bias is not None else (x, w)
    if bias is None:
        return Tensor(y, _parents=parents, _vjp=lambda g: vjp(g)[:2])
    return Tensor(y, _parents=parents, _vjp=vjp)


def conv_transpose1d(x, w, bias, stride, pad):
    """Transposed conv: x[B,Ci,L] * w[Ci,Co,K] -> [B,Co,(L-1)*stride-2*pad+K].

    Forward is the data-gradient of conv1d, so the two share kernels.
    """
    x, w = _wrap(x), _wrap(w)
    bias = _wrap(bias) if bias is not None else None
    xd = np.ascontiguousarray(x.data)
    wd = np.ascontiguousarray(w.data)
    out_len = (xd.shape[2] - 1) * stride - 2 * pad + wd.shape[2]
    y = _accel.conv1d_bwd_x(xd, wd, stride, pad, out_len)
    if bias is not None:
        y = y + bias.data[None, :, None]

    def vjp(g):
        g = np.ascontiguousarray(g)
        gx = _accel.conv1d_fwd(g, wd, None, stride, pad)
        gw = _accel.conv1d_bwd_w(g, xd, stride, pad, wd.shape[2])
        gb = g.sum(axis=(0, 2)) if bias is not None else None
        return (gx, gw, gb)

    parents = (x, w, bias) if bias is not None else (x, w)
    if bias is None:
        return Tensor(y, _parents=parents, _vjp=lambda g: vjp(g)[:2])
    return Tensor(y, _parents=parents, _vjp=vjp)

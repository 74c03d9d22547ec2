"""
Differentiable Layers
Operaciones con gradiente: conv, resize bilineal, LN, softmax, MLP, atención por vecindario
Todas las operaciones espaciales usan layout channels-last (N, H, W, C)
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erf

from src.modules.errors import ArgumentError
from .tensor import Tensor

LN_EPS = 1e-6
SQRT_2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _require_rank(x: Tensor, rank: int, op: str):
    if x.ndim != rank:
        raise ArgumentError(f"{op} expects a rank-{rank} input, got shape {x.shape}")


# ==================== CONVOLUCIONES ====================

def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, stride: int = 1, padding: int = 0) -> Tensor:
    """
    Convolución 2D (correlación) channels-last

    Args:
        x: (N, H, W, Cin)
        weight: (kh, kw, Cin, Cout)
        bias: (Cout,) opcional
        stride, padding: enteros (padding con ceros simétrico)

    Returns:
        (N, Ho, Wo, Cout)
    """
    _require_rank(x, 4, 'conv2d')
    kh, kw, cin, cout = weight.shape
    if x.shape[3] != cin:
        raise ArgumentError(f"conv2d channel mismatch: input {x.shape[3]} vs weight {cin}")

    n, h, w, _ = x.shape
    xp = np.pad(x.data, ((0, 0), (padding, padding), (padding, padding), (0, 0)))
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (w + 2 * padding - kw) // stride + 1
    if ho < 1 or wo < 1:
        raise ArgumentError(f"conv2d kernel {kh}x{kw} larger than padded input {h}x{w}")

    def window(i, j):
        return (slice(None), slice(i, i + stride * (ho - 1) + 1, stride), slice(j, j + stride * (wo - 1) + 1, stride))

    wd = weight.data
    out = np.zeros((n, ho, wo, cout), dtype=np.result_type(x.data, wd))
    for i in range(kh):
        for j in range(kw):
            out += xp[window(i, j)] @ wd[i, j]

    def backward(g):
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(wd)
        g2 = g.reshape(-1, cout)
        for i in range(kh):
            for j in range(kw):
                gxp[window(i, j)] += g @ wd[i, j].T
                gw[i, j] = xp[window(i, j)].reshape(-1, cin).T @ g2
        return gxp[:, padding:padding + h, padding:padding + w, :], gw

    result = Tensor.make(out, (x, weight), backward, 'conv2d')
    return result if bias is None else result + bias


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x @ W (+ b) sobre el último eje"""
    if x.shape[-1] != weight.shape[0]:
        raise ArgumentError(f"linear shape mismatch: {x.shape} @ {weight.shape}")
    out = x @ weight
    return out if bias is None else out + bias


def conv1x1(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Convolución 1x1 = mezcla lineal de canales; weight (Cin, Cout)"""
    return linear(x, weight, bias)


# ==================== RESIZE ====================

def _interp_matrix(src: int, dst: int, dtype) -> np.ndarray:
    """Matriz (dst, src) de interpolación lineal con centros de píxel (half-pixel)"""
    pos = np.clip((np.arange(dst) + 0.5) * src / dst - 0.5, 0.0, src - 1.0)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    t = pos - lo
    mat = np.zeros((dst, src), dtype=dtype)
    rows = np.arange(dst)
    np.add.at(mat, (rows, lo), 1.0 - t)
    np.add.at(mat, (rows, hi), t)
    return mat


def bilinear_resize(x: Tensor, out_h: int, out_w: int) -> Tensor:
    """
    Resize bilineal separable de (N, H, W, C) a (N, out_h, out_w, C)
    Mismo tamaño -> identidad
    """
    _require_rank(x, 4, 'bilinear_resize')
    n, h, w, c = x.shape
    if (h, w) == (out_h, out_w):
        return x
    ry = _interp_matrix(h, out_h, x.dtype)
    rx = _interp_matrix(w, out_w, x.dtype)
    out = np.einsum('ph,nhwc->npwc', ry, x.data)
    out = np.einsum('qw,npwc->npqc', rx, out)

    def backward(g):
        gx = np.einsum('qw,npqc->npwc', rx, g)
        return (np.einsum('ph,npwc->nhwc', ry, gx),)

    return Tensor.make(out, (x,), backward, 'bilinear_resize')


# ==================== NORMALIZACIÓN / ACTIVACIONES ====================

def layer_norm(x: Tensor, gamma: Optional[Tensor] = None, beta: Optional[Tensor] = None, eps: float = LN_EPS) -> Tensor:
    """LayerNorm sobre el último eje (media 0, varianza 1) con afín opcional"""
    a = x.data
    mu = a.mean(axis=-1, keepdims=True)
    centered = a - mu
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std

    def backward(g):
        mg = g.mean(axis=-1, keepdims=True)
        mgx = (g * xhat).mean(axis=-1, keepdims=True)
        return (inv_std * (g - mg - xhat * mgx),)

    out = Tensor.make(xhat, (x,), backward, 'layer_norm')
    if gamma is not None:
        out = out * gamma
    if beta is not None:
        out = out + beta
    return out


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    a = x.data
    e = np.exp(a - a.max(axis=axis, keepdims=True))
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return Tensor.make(s, (x,), backward, 'softmax')


def gelu(x: Tensor) -> Tensor:
    """GELU exacta: 0.5·x·(1 + erf(x/√2))"""
    a = x.data
    cdf = 0.5 * (1.0 + erf(a / SQRT_2))
    pdf = INV_SQRT_2PI * np.exp(-0.5 * a * a)
    return Tensor.make(a * cdf, (x,), lambda g: (g * (cdf + a * pdf),), 'gelu')


ACTIVATIONS = {
    'gelu': gelu,
    'identity': lambda t: t,
}


def mlp(x: Tensor, w1: Tensor, b1: Optional[Tensor], w2: Tensor, b2: Optional[Tensor], activation: str = 'gelu') -> Tensor:
    """Dos capas lineales con activación intermedia"""
    if activation not in ACTIVATIONS:
        raise ArgumentError(f"unknown activation '{activation}'")
    return linear(ACTIVATIONS[activation](linear(x, w1, b1)), w2, b2)


def global_avg_pool(x: Tensor) -> Tensor:
    """(N, H, W, C) -> (N, C)"""
    _require_rank(x, 4, 'global_avg_pool')
    return x.mean(axis=(1, 2))


# ==================== ESTRUCTURA ====================

def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        return tuple(np.take(g, np.arange(bounds[k], bounds[k + 1]), axis=axis) for k in range(len(tensors)))

    return Tensor.make(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward, 'concat')


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    def backward(g):
        return tuple(np.take(g, k, axis=axis) for k in range(len(tensors)))

    return Tensor.make(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), backward, 'stack')


def take(x: Tensor, indices: np.ndarray, axis: int) -> Tensor:
    """Gather a lo largo de un eje (índices enteros de cualquier forma)"""
    indices = np.asarray(indices, dtype=np.int64)
    axis = axis % x.ndim
    shape = x.shape

    def backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        moved = np.moveaxis(full, axis, 0)
        g_moved = np.moveaxis(g, list(range(axis, axis + indices.ndim)), list(range(indices.ndim)))
        np.add.at(moved, indices, g_moved)
        return (full,)

    return Tensor.make(np.take(x.data, indices, axis=axis), (x,), backward, 'take')


def sorted_sum(x: Tensor, axis: int = 0) -> Tensor:
    """Suma independiente del orden: se ordenan los valores antes de reducir"""
    shape = x.shape
    out = np.sort(x.data, axis=axis).sum(axis=axis)

    def backward(g):
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return Tensor.make(out, (x,), backward, 'sorted_sum')


def einsum(subscripts: str, a: Tensor, b: Tensor) -> Tensor:
    """
    Einsum de dos operandos; cada índice de un operando debe aparecer en el otro
    o en la salida (sin índices repetidos dentro de un operando)
    """
    inputs, out_sub = subscripts.replace(' ', '').split('->')
    a_sub, b_sub = inputs.split(',')

    def backward(g):
        ga = np.einsum(f"{out_sub},{b_sub}->{a_sub}", g, b.data)
        gb = np.einsum(f"{out_sub},{a_sub}->{b_sub}", g, a.data)
        return ga, gb

    return Tensor.make(np.einsum(subscripts, a.data, b.data), (a, b), backward, 'einsum')


# ==================== ATENCIÓN ====================

def _axis_windows(length: int, kernel: int) -> np.ndarray:
    """Ventanas (length, k') desplazadas hacia dentro en los bordes, k' = min(k, length)"""
    k = min(kernel, length)
    starts = np.clip(np.arange(length) - k // 2, 0, length - k)
    return starts[:, None] + np.arange(k)[None, :]


def neighborhood_index(h: int, w: int, kernel: int) -> np.ndarray:
    """Índices aplanados (h·w, kh·kw) de la vecindad de cada query, en orden raster"""
    ny = _axis_windows(h, kernel)
    nx = _axis_windows(w, kernel)
    idx = ny[:, None, :, None] * w + nx[None, :, None, :]
    return idx.reshape(h * w, -1)


def full_index(h: int, w: int) -> np.ndarray:
    return np.broadcast_to(np.arange(h * w), (h * w, h * w))


def _attention(x: Tensor, w_qkv: Tensor, b_qkv: Optional[Tensor], w_proj: Tensor, b_proj: Optional[Tensor],
               heads: int, index: np.ndarray) -> Tensor:
    _require_rank(x, 4, 'attention')
    n, h, w, c = x.shape
    if w_qkv.shape != (c, 3 * c):
        raise ArgumentError(f"qkv weights must be ({c}, {3 * c}), got {w_qkv.shape}")
    if w_proj.shape != (c, c):
        raise ArgumentError(f"projection weights must be ({c}, {c}), got {w_proj.shape}")
    if heads < 1 or c % heads:
        raise ArgumentError(f"channels {c} not divisible by heads {heads}")

    d = c // heads
    qkv = linear(x, w_qkv, b_qkv).reshape(n, h * w, 3, heads, d)
    q, k, v = qkv[:, :, 0], qkv[:, :, 1], qkv[:, :, 2]

    keys = take(k, index, axis=1)       # (n, hw, K, heads, d)
    values = take(v, index, axis=1)
    scores = einsum('nqhd,nqkhd->nqkh', q, keys) * (1.0 / math.sqrt(d))
    attn = softmax(scores, axis=2)
    out = einsum('nqkh,nqkhd->nqhd', attn, values).reshape(n, h, w, c)
    return linear(out, w_proj, b_proj)


def neighborhood_attention(x: Tensor, w_qkv: Tensor, b_qkv: Optional[Tensor], w_proj: Tensor,
                           b_proj: Optional[Tensor], kernel: int, heads: int) -> Tensor:
    """
    Atención por vecindario k x k (estilo NAT): cada query atiende a exactamente
    k'² claves, con ventanas desplazadas hacia dentro en los bordes

    Args:
        x: (N, H, W, C)
        w_qkv, b_qkv: proyección a q, k, v (C, 3C)
        w_proj, b_proj: proyección de salida (C, C)
        kernel: tamaño impar de la vecindad (se recorta a H, W)
        heads: número de cabezas (C divisible por heads)
    """
    if kernel < 1 or kernel % 2 == 0:
        raise ArgumentError(f"attention kernel must be odd, got {kernel}")
    _require_rank(x, 4, 'neighborhood_attention')
    index = neighborhood_index(x.shape[1], x.shape[2], kernel)
    return _attention(x, w_qkv, b_qkv, w_proj, b_proj, heads, index)


def full_attention(x: Tensor, w_qkv: Tensor, b_qkv: Optional[Tensor], w_proj: Tensor,
                   b_proj: Optional[Tensor], heads: int) -> Tensor:
    """Self-attention global con el mismo código de gather"""
    _require_rank(x, 4, 'full_attention')
    index = full_index(x.shape[1], x.shape[2])
    return _attention(x, w_qkv, b_qkv, w_proj, b_proj, heads, index)

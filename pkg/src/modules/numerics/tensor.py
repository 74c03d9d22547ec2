"""
Reverse-Mode Tensor
Array diferenciable sobre numpy con grafo dinámico y retropropagación
"""

import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from src.modules.errors import ArgumentError

logger = logging.getLogger(__name__)

ArrayLike = Union["Tensor", np.ndarray, float, int]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Reducir un gradiente con broadcasting a la forma original del operando"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """
    Nodo del grafo de cómputo

    Las hojas con requires_grad acumulan su gradiente en .grad entre llamadas
    a backward (el llamante los pone a cero con ParamStore.zero_grad).
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, parents: Tuple["Tensor", ...] = (),
                 backward_fn: Optional[BackwardFn] = None, op: str = "", name: Optional[str] = None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data)
        if arr.dtype.kind != 'f':
            arr = arr.astype(np.float64)
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.parents = parents
        self.backward_fn = backward_fn
        self.op = op
        self.name = name

    # ==================== INFO ====================

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self):
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, op={self.op or 'leaf'})"

    # ==================== CONSTRUCCIÓN ====================

    def lift(self, other: ArrayLike) -> "Tensor":
        """Convertir constantes al dtype de este tensor"""
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.dtype))

    @staticmethod
    def make(data: np.ndarray, parents: Sequence["Tensor"], backward_fn: BackwardFn, op: str) -> "Tensor":
        """Crear un nodo; sólo guarda el grafo si algún padre necesita gradiente"""
        if any(p.requires_grad for p in parents):
            return Tensor(data, requires_grad=True, parents=tuple(parents), backward_fn=backward_fn, op=op)
        return Tensor(data, op=op)

    # ==================== ARITMÉTICA ====================

    def __add__(self, other):
        other = self.lift(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor.make(self.data + other.data, (self, other),
                           lambda g: (unbroadcast(g, a_shape), unbroadcast(g, b_shape)), 'add')

    __radd__ = __add__

    def __sub__(self, other):
        other = self.lift(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor.make(self.data - other.data, (self, other),
                           lambda g: (unbroadcast(g, a_shape), unbroadcast(-g, b_shape)), 'sub')

    def __rsub__(self, other):
        return self.lift(other) - self

    def __mul__(self, other):
        other = self.lift(other)
        a, b = self.data, other.data
        return Tensor.make(a * b, (self, other),
                           lambda g: (unbroadcast(g * b, a.shape), unbroadcast(g * a, b.shape)), 'mul')

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self.lift(other)
        a, b = self.data, other.data
        return Tensor.make(a / b, (self, other),
                           lambda g: (unbroadcast(g / b, a.shape), unbroadcast(-g * a / (b * b), b.shape)), 'div')

    def __rtruediv__(self, other):
        return self.lift(other) / self

    def __neg__(self):
        return Tensor.make(-self.data, (self,), lambda g: (-g,), 'neg')

    def __pow__(self, exponent: float):
        if isinstance(exponent, Tensor):
            raise ArgumentError("only constant exponents are supported")
        a = self.data
        return Tensor.make(a ** exponent, (self,), lambda g: (g * exponent * a ** (exponent - 1),), 'pow')

    def __matmul__(self, other):
        other = self.lift(other)
        a, b = self.data, other.data
        if b.ndim != 2:
            raise ArgumentError(f"matmul expects a 2-D right operand, got {b.shape}")

        def backward(g):
            ga = g @ b.T
            gb = a.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            return ga, gb

        return Tensor.make(a @ b, (self, other), backward, 'matmul')

    # ==================== REDUCCIONES / FORMA ====================

    def sum(self, axis=None, keepdims: bool = False):
        shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor.make(self.data.sum(axis=axis, keepdims=keepdims), (self,), backward, 'sum')

    def mean(self, axis=None, keepdims: bool = False):
        count = self.data.size if axis is None else int(np.prod([self.shape[a] for a in np.atleast_1d(axis)]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        return Tensor.make(self.data.reshape(shape), (self,), lambda g: (g.reshape(original),), 'reshape')

    def transpose(self, *axes):
        axes = tuple(axes[0]) if len(axes) == 1 and isinstance(axes[0], (tuple, list)) else axes
        inverse = tuple(np.argsort(axes))
        return Tensor.make(self.data.transpose(axes), (self,), lambda g: (g.transpose(inverse),), 'transpose')

    def __getitem__(self, index):
        shape = self.shape

        def backward(g):
            full = np.zeros(shape, dtype=g.dtype)
            np.add.at(full, index, g)
            return (full,)

        return Tensor.make(self.data[index], (self,), backward, 'getitem')

    # ==================== ELEMENTALES ====================

    def exp(self):
        out = np.exp(self.data)
        return Tensor.make(out, (self,), lambda g: (g * out,), 'exp')

    def log(self):
        a = self.data
        return Tensor.make(np.log(a), (self,), lambda g: (g / a,), 'log')

    def sqrt(self):
        out = np.sqrt(self.data)
        return Tensor.make(out, (self,), lambda g: (g * 0.5 / out,), 'sqrt')

    def abs(self):
        a = self.data
        return Tensor.make(np.abs(a), (self,), lambda g: (g * np.sign(a),), 'abs')

    def clip(self, low: float, high: float):
        a = self.data
        inside = (a >= low) & (a <= high)
        return Tensor.make(np.clip(a, low, high), (self,), lambda g: (g * inside,), 'clip')

    # ==================== BACKWARD ====================

    def backward(self):
        """Retropropagar desde un escalar; ver backward()"""
        backward(self)


def _topological_order(root: Tensor):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, store=None):
    """
    Retropropagación en modo inverso desde un escalar

    Args:
        loss: Tensor escalar producido por operaciones documentadas
        store: ParamStore opcional; los parámetros no alcanzables quedan con gradiente cero

    Las hojas acumulan (.grad += ...) si ya tenían gradiente de una llamada anterior.
    """
    if loss.data.size != 1:
        raise ArgumentError(f"backward needs a scalar loss, got shape {loss.shape}")

    if loss.requires_grad:
        grads = {id(loss): np.ones_like(loss.data)}
        for node in reversed(_topological_order(loss)):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                pg = np.asarray(pg, dtype=parent.dtype)
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg
    else:
        logger.warning("⚠️ backward called on a loss that does not depend on any parameter")

    if store is not None:
        store.ensure_grads()

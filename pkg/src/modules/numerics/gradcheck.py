"""
Gradient Checks
Comparación de gradientes analíticos con diferencias finitas centrales
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.modules.errors import ArgumentError
from . import functional as F
from .tensor import Tensor, backward

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-6


@dataclass
class GradCheckResult:
    name: str
    max_rel_error: float
    passed: bool
    n_checked: int
    errors: Dict[str, float] = field(default_factory=dict)

    def to_dict(self):
        return {
            "op": self.name,
            "passed": self.passed,
            "max_rel_error": self.max_rel_error,
            "n_checked": self.n_checked,
            "errors": self.errors,
        }


def entry_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """
    Peor error por entrada: max |a − n| / max(|a|, |n|, 1)

    Con gradientes pequeños se comporta como error absoluto, así un
    gradiente verdadero ~0 no se juzga contra ruido de redondeo.
    """
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    numeric = np.asarray(numeric, dtype=np.float64).reshape(-1)
    if analytic.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return float(np.max(np.abs(analytic - numeric) / scale))


def grad_check(name: str, fn: Callable[[Dict[str, Tensor]], Tensor], inputs: Dict[str, np.ndarray],
               tolerance: float = 1e-6, eps: float = DEFAULT_EPS, max_entries: Optional[int] = 32,
               seed: int = 0) -> GradCheckResult:
    """
    Verificar el gradiente de fn respecto de cada entrada

    Args:
        name: Nombre de la operación
        fn: Función dict de tensores -> escalar
        inputs: Valores (se convierten a float64)
        tolerance: Peor error por entrada admitido (ver entry_error)
        eps: Paso de diferencias finitas
        max_entries: Entradas muestreadas por tensor (None = todas)

    Returns:
        GradCheckResult con el peor error sobre todas las entradas
    """
    values = {k: np.array(v, dtype=np.float64) for k, v in inputs.items()}
    tensors = {k: Tensor(v, requires_grad=True, name=k) for k, v in values.items()}
    loss = fn(tensors)
    if loss.data.size != 1:
        raise ArgumentError(f"{name}: grad_check needs a scalar function")
    backward(loss)

    rng = np.random.default_rng(seed)
    errors, checked = {}, 0
    for key, value in values.items():
        analytic = tensors[key].grad
        if analytic is None:
            analytic = np.zeros_like(value)
        flat = value.reshape(-1)
        positions = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            positions = np.sort(rng.choice(flat.size, size=max_entries, replace=False))

        numeric = np.empty(positions.size)
        for slot, pos in enumerate(positions):
            original = flat[pos]
            flat[pos] = original + eps
            plus = fn({k: Tensor(v) for k, v in values.items()}).item()
            flat[pos] = original - eps
            minus = fn({k: Tensor(v) for k, v in values.items()}).item()
            flat[pos] = original
            numeric[slot] = (plus - minus) / (2.0 * eps)

        errors[key] = entry_error(analytic.reshape(-1)[positions], numeric)
        checked += positions.size

    worst = max(errors.values()) if errors else 0.0
    result = GradCheckResult(name, worst, worst <= tolerance, checked, errors)
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, f"{'✅' if result.passed else '❌'} gradcheck {name}: max rel error {worst:.2e}")
    return result


def _projection(rng, shape):
    """Proyección aleatoria fija para reducir una salida a escalar"""
    return Tensor(rng.normal(size=shape))


def op_suite(seed: int) -> Dict[str, tuple]:
    """
    Casos de prueba (fn, inputs) para cada operación diferenciable
    Cada salida se reduce con una proyección aleatoria para evitar simetrías
    """
    rng = np.random.default_rng(seed)
    cases = {}

    def reduce(out):
        return (out * _projection(np.random.default_rng(seed + 1), out.shape)).sum()

    cases['conv2d'] = (
        lambda t: reduce(F.conv2d(t['x'], t['w'], t['b'], stride=2, padding=1)),
        {'x': rng.normal(size=(1, 6, 6, 3)), 'w': rng.normal(size=(3, 3, 3, 4)), 'b': rng.normal(size=4)},
    )
    cases['conv1x1'] = (
        lambda t: reduce(F.conv1x1(t['x'], t['w'], t['b'])),
        {'x': rng.normal(size=(2, 3, 3, 4)), 'w': rng.normal(size=(4, 5)), 'b': rng.normal(size=5)},
    )
    cases['bilinear_resize'] = (
        lambda t: reduce(F.bilinear_resize(t['x'], 5, 7)),
        {'x': rng.normal(size=(1, 3, 4, 2))},
    )
    cases['layer_norm'] = (
        lambda t: reduce(F.layer_norm(t['x'], t['g'], t['b'])),
        {'x': rng.normal(size=(2, 3, 3, 5)), 'g': rng.normal(size=5), 'b': rng.normal(size=5)},
    )
    cases['softmax'] = (
        lambda t: reduce(F.softmax(t['x'], axis=1)),
        {'x': rng.normal(size=(3, 4))},
    )
    cases['mlp'] = (
        lambda t: reduce(F.mlp(t['x'], t['w1'], t['b1'], t['w2'], t['b2'])),
        {'x': rng.normal(size=(3, 4)), 'w1': rng.normal(size=(4, 6)), 'b1': rng.normal(size=6),
         'w2': rng.normal(size=(6, 2)), 'b2': rng.normal(size=2)},
    )
    cases['global_avg_pool'] = (
        lambda t: reduce(F.global_avg_pool(t['x'])),
        {'x': rng.normal(size=(2, 3, 4, 3))},
    )
    cases['neighborhood_attention'] = (
        lambda t: reduce(F.neighborhood_attention(t['x'], t['wqkv'], t['bqkv'], t['wp'], t['bp'], kernel=3, heads=2)),
        {'x': rng.normal(size=(1, 6, 6, 8)), 'wqkv': 0.3 * rng.normal(size=(8, 24)), 'bqkv': 0.1 * rng.normal(size=24),
         'wp': 0.3 * rng.normal(size=(8, 8)), 'bp': 0.1 * rng.normal(size=8)},
    )
    cases['sorted_sum'] = (
        lambda t: reduce(F.sorted_sum(t['x'], axis=0)),
        {'x': rng.normal(size=(5, 3))},
    )
    cases['concat_take'] = (
        lambda t: reduce(F.take(F.concat([t['a'], t['b']], axis=1), np.array([[0, 2], [3, 3]]), axis=1)),
        {'a': rng.normal(size=(2, 2)), 'b': rng.normal(size=(2, 3))},
    )
    return cases


def run_op_suite(tolerance: float = 1e-6, seeds: int = 20, max_entries: Optional[int] = 32) -> List[GradCheckResult]:
    """
    Ejecutar el suite de operaciones sobre varios seeds

    Returns:
        Un GradCheckResult por operación (peor caso sobre los seeds)
    """
    worst: Dict[str, GradCheckResult] = {}
    for seed in range(seeds):
        for name, (fn, inputs) in op_suite(seed).items():
            result = grad_check(name, fn, inputs, tolerance, max_entries=max_entries, seed=seed)
            previous = worst.get(name)
            if previous is None or result.max_rel_error > previous.max_rel_error:
                result.n_checked += previous.n_checked if previous else 0
                worst[name] = result
            else:
                previous.n_checked += result.n_checked
    return list(worst.values())


def check_store_gradients(name: str, loss_fn: Callable[[], Tensor], store, tolerance: float = 1e-6,
                          eps: float = DEFAULT_EPS, entries_per_tensor: Optional[int] = 2,
                          seed: int = 0) -> GradCheckResult:
    """
    Gradient check de todos los parámetros de un ParamStore (modelo completo)

    Args:
        loss_fn: Recalcula la pérdida escalar con los valores actuales del store
        store: ParamStore en float64
        entries_per_tensor: Entradas muestreadas por parámetro (None = todas)

    Returns:
        GradCheckResult; pasa sólo si todos los parámetros están dentro de la tolerancia
    """
    if store.dtype != np.float64:
        raise ArgumentError("store gradient checks must run in double precision")

    store.zero_grad()
    backward(loss_fn(), store)

    rng = np.random.default_rng(seed)
    checked, errors = 0, {}
    for pname, param in store.items():
        flat = param.data.reshape(-1)
        positions = np.arange(flat.size)
        if entries_per_tensor is not None and flat.size > entries_per_tensor:
            positions = rng.choice(flat.size, size=entries_per_tensor, replace=False)
        grad = param.grad.reshape(-1)
        local_a, local_n = [], []
        for pos in positions:
            original = flat[pos]
            flat[pos] = original + eps
            plus = loss_fn().item()
            flat[pos] = original - eps
            minus = loss_fn().item()
            flat[pos] = original
            local_a.append(grad[pos])
            local_n.append((plus - minus) / (2.0 * eps))
        errors[pname] = entry_error(np.array(local_a), np.array(local_n))
        checked += len(local_a)

    worst_name = max(errors, key=errors.get) if errors else None
    worst = errors[worst_name] if worst_name else 0.0
    result = GradCheckResult(name, worst, worst <= tolerance, checked, errors)
    if result.passed:
        logger.info(f"✅ gradcheck {name}: max error {worst:.2e} over {checked} entries")
    else:
        failing = [p for p, e in errors.items() if e > tolerance]
        logger.warning(f"❌ gradcheck {name}: max error {worst:.2e} at '{worst_name}' ({len(failing)} parameters over tolerance)")
    return result

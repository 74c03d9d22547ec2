"""
Numerics Package
Núcleo diferenciable mínimo: tensores, capas y verificación de gradientes
"""

from .tensor import Tensor, backward, unbroadcast
from .params import ParamStore, glorot
from .functional import (
    conv2d,
    conv1x1,
    linear,
    bilinear_resize,
    layer_norm,
    softmax,
    gelu,
    mlp,
    global_avg_pool,
    concat,
    stack,
    take,
    sorted_sum,
    einsum,
    neighborhood_attention,
    full_attention,
    neighborhood_index,
)
from .gradcheck import GradCheckResult, grad_check, run_op_suite, entry_error, check_store_gradients

__all__ = [
    'Tensor',
    'backward',
    'unbroadcast',
    'ParamStore',
    'glorot',
    'conv2d',
    'conv1x1',
    'linear',
    'bilinear_resize',
    'layer_norm',
    'softmax',
    'gelu',
    'mlp',
    'global_avg_pool',
    'concat',
    'stack',
    'take',
    'sorted_sum',
    'einsum',
    'neighborhood_attention',
    'full_attention',
    'neighborhood_index',
    'GradCheckResult',
    'grad_check',
    'run_op_suite',
    'entry_error',
    'check_store_gradients',
]

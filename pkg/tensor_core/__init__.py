"""
텐서 코어 모듈

numpy 기반 밀집 텐서와 역전파 자동 미분을 제공합니다.
"""

from .errors import ContractError, DimensionError, NonFiniteError
from .tensor import (
    ComputeGraph,
    Tensor,
    backward,
    current_graph,
    is_grad_enabled,
    make_op,
    no_grad,
    reset_graph,
    resolve_dtype,
    zero_grad,
)
from . import ops
from .ops import (
    add,
    cross_entropy,
    dropout,
    embedding,
    gelu,
    layer_norm,
    log_softmax,
    matmul,
    mul,
    relu,
    reshape,
    scale,
    softmax,
    softmax_cross_entropy,
    sub,
    transpose,
)
from .gradcheck import GradCheckReport, grad_check, relative_error

__all__ = [
    "ContractError",
    "DimensionError",
    "NonFiniteError",
    "ComputeGraph",
    "Tensor",
    "backward",
    "current_graph",
    "is_grad_enabled",
    "make_op",
    "no_grad",
    "reset_graph",
    "resolve_dtype",
    "zero_grad",
    "ops",
    "add",
    "cross_entropy",
    "dropout",
    "embedding",
    "gelu",
    "layer_norm",
    "log_softmax",
    "matmul",
    "mul",
    "relu",
    "reshape",
    "scale",
    "softmax",
    "softmax_cross_entropy",
    "sub",
    "transpose",
    "GradCheckReport",
    "grad_check",
    "relative_error",
]

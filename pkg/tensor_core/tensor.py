"""
역전파 자동 미분 텐서

numpy 배열 위에 얇은 계산 그래프(tape)를 얹은 최소 구현입니다.
- 순전파 연산은 실행 순서대로 ComputeGraph에 기록됩니다.
- backward()는 기록된 노드를 정확히 역순으로 방문합니다.
- no_grad() 안에서는 아무것도 기록하지 않습니다.

그래프는 스레드마다 하나씩 존재하므로, 서로 다른 스레드의 학습 스텝이
상태를 공유하지 않습니다.
"""

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import ContractError, DimensionError, NonFiniteError


DTYPES = {
    "float32": np.float32,
    "float64": np.float64,
}


def resolve_dtype(dtype) -> np.dtype:
    """'float32' / 'float64' 문자열 또는 numpy dtype을 numpy dtype으로 변환"""
    if isinstance(dtype, str):
        if dtype not in DTYPES:
            raise ContractError(f"지원하지 않는 정밀도입니다: {dtype} (지원: {', '.join(DTYPES)})")
        return np.dtype(DTYPES[dtype])
    return np.dtype(dtype)


class Tensor:
    """
    자동 미분을 지원하는 밀집 텐서

    순전파 결과(data)는 생성 후 변경하지 않습니다. 변경 가능한 것은
    leaf 텐서의 grad 버퍼뿐입니다.
    """

    __slots__ = ("data", "requires_grad", "grad", "name", "_node", "_from_op")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        dtype=None,
        name: Optional[str] = None,
    ):
        """
        Tensor 초기화

        Args:
            data: 배열로 변환 가능한 값
            requires_grad: 기울기 계산 참여 여부 (True이면 leaf 파라미터)
            dtype: 'float32' / 'float64' (기본값: 입력 dtype, 정수면 float64)
            name: 디버깅용 이름
        """
        array = np.asarray(data)
        if dtype is not None:
            array = array.astype(resolve_dtype(dtype), copy=False)
        elif not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.data: np.ndarray = array
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._node: Optional["Node"] = None
        self._from_op = False

    # ----- 기본 속성 -----
    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return not self._from_op

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item()은 원소가 하나인 텐서에서만 가능합니다: shape={self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"

    # ----- 연산자 (구현은 ops 모듈) -----
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from . import ops
        return ops.scale(self, -1.0)

    def __truediv__(self, other):
        from . import ops
        if isinstance(other, Tensor):
            raise ContractError("텐서끼리의 나눗셈은 지원하지 않습니다")
        return ops.scale(self, 1.0 / float(other))

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def reshape(self, *shape):
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes):
        from . import ops
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes)

    def sum(self):
        from . import ops
        return ops.sum(self)

    def mean(self):
        from . import ops
        return ops.mean(self)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class Node:
    """실행된 원시 연산 하나의 기록"""
    op: str
    output: Tensor
    inputs: tuple
    backward: BackwardFn


@dataclass
class ComputeGraph:
    """실행 순서대로 기록된 노드 목록"""
    nodes: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.nodes)

    def clear(self) -> None:
        for node in self.nodes:
            node.output._node = None
        self.nodes.clear()


class _GraphState(threading.local):
    def __init__(self):
        self.graph = ComputeGraph()
        self.grad_enabled = True


_state = _GraphState()


def current_graph() -> ComputeGraph:
    """현재 스레드의 계산 그래프"""
    return _state.graph


def reset_graph() -> None:
    """기록된 노드를 모두 버립니다 (학습 스텝 시작 시 호출)"""
    _state.graph.clear()


def is_grad_enabled() -> bool:
    return _state.grad_enabled


@contextmanager
def no_grad() -> Iterator[None]:
    """그래프 기록 없이 순전파만 수행하는 컨텍스트"""
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def check_finite(op: str, data: np.ndarray) -> None:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} 연산 결과에 NaN/Inf가 포함되어 있습니다")


def make_op(
    op: str,
    data: np.ndarray,
    inputs: Sequence[Tensor],
    backward: BackwardFn,
) -> Tensor:
    """
    순전파 결과를 텐서로 감싸고, 필요하면 그래프에 기록합니다.

    새로운 원시 연산은 모두 이 함수를 거칩니다. backward는 출력 기울기를 받아
    inputs와 같은 순서의 입력 기울기(불필요하면 None)를 돌려줘야 합니다.

    Args:
        op: 연산 이름
        data: 순전파 결과 배열
        inputs: 입력 텐서들
        backward: 역전파 함수

    Returns:
        출력 텐서
    """
    check_finite(op, data)
    out = Tensor(data)
    out._from_op = True
    if _state.grad_enabled and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        node = Node(op=op, output=out, inputs=tuple(inputs), backward=backward)
        out._node = node
        _state.graph.nodes.append(node)
    return out


def _accumulate(store: dict, key: int, grad: np.ndarray) -> None:
    if key in store:
        store[key] = store[key] + grad
    else:
        store[key] = grad


def backward(loss: Tensor) -> None:
    """
    스칼라 loss에서 역전파를 수행하고 leaf 텐서의 grad에 누적합니다.

    grad는 호출 간에 누적되며, 초기화는 zero_grad()로 명시적으로 합니다.
    역전파가 끝나면 현재 그래프는 비워집니다.

    Raises:
        ContractError: loss가 스칼라가 아니거나 그래프에 연결되지 않은 경우
    """
    if loss.size != 1:
        raise ContractError(f"backward()는 스칼라 loss에서만 호출할 수 있습니다: shape={loss.shape}")
    graph = _state.graph
    if loss.is_leaf and loss.requires_grad:
        loss.grad = np.ones_like(loss.data) if loss.grad is None else loss.grad + 1.0
        return
    if not loss.requires_grad:
        raise ContractError("loss가 기록된 그래프에 연결되어 있지 않습니다 (no_grad 안에서 계산했는지 확인하세요)")
    if loss._node is None:
        raise ContractError("loss의 계산 그래프가 이미 해제되었습니다 (순전파를 다시 수행하세요)")

    pending: dict = {id(loss): np.ones_like(loss.data)}
    for node in reversed(graph.nodes):
        grad_out = pending.pop(id(node.output), None)
        if grad_out is None:
            continue
        grads_in = node.backward(grad_out)
        for tensor, grad in zip(node.inputs, grads_in):
            if grad is None or not tensor.requires_grad:
                continue
            if grad.shape != tensor.shape:
                raise DimensionError(
                    f"{node.op} 역전파 기울기 shape {grad.shape}가 입력 shape {tensor.shape}와 다릅니다"
                )
            if tensor.is_leaf:
                tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
            else:
                _accumulate(pending, id(tensor), grad)
    graph.clear()


def zero_grad(tensors: Iterable[Tensor]) -> None:
    """여러 leaf 텐서의 grad를 한 번에 초기화"""
    for tensor in tensors:
        tensor.zero_grad()

"""
텐서 연산 예외 정의
"""


class DimensionError(ValueError):
    """연산 입력의 shape가 맞지 않을 때"""


class ContractError(ValueError):
    """호출 전제 조건 위반 (스칼라가 아닌 loss의 backward, 잘못된 인덱스 등)"""


class NonFiniteError(ArithmeticError):
    """순전파 결과에 NaN/Inf가 발생했을 때"""

"""
체크포인트 평가

예제마다 따로 디코딩하므로 beam_size 1의 결과는 greedy 결과와 정확히 같습니다.
"""

from typing import List, Optional, Sequence

from tqdm import tqdm

from corpus import Example, encode_io
from decoding import decode
from g2p_model import ModelParams
from metrics import (
    EvalReport,
    ExposureBiasReport,
    accerr_curve,
    context_free_accuracy,
    score_token_hypotheses,
)
from training import encode_examples


def decoding_label(beam_size: int) -> str:
    return "greedy" if beam_size == 1 else f"beam-{beam_size}"


def decode_examples(
    params: ModelParams,
    examples: Sequence[Example],
    beam_size: int = 1,
    max_len: Optional[int] = None,
    show_progress: bool = False,
) -> List[List[int]]:
    """예제별 디코딩 결과 토큰 목록"""
    hypotheses = []
    desc = decoding_label(beam_size)
    for example in tqdm(examples, desc=desc, leave=False, disable=not show_progress):
        src, _ = encode_io(example, params.config)
        hypotheses.append(decode(params, src, beam_size=beam_size, max_len=max_len))
    return hypotheses


def evaluate_examples(
    params: ModelParams,
    examples: Sequence[Example],
    beam_size: int = 1,
    max_len: Optional[int] = None,
    show_progress: bool = False,
) -> EvalReport:
    """
    분할 하나를 디코딩하고 채점합니다.

    Args:
        params: 모델 파라미터
        examples: 평가 예제
        beam_size: 빔 크기 (1이면 greedy)
        max_len: 최대 생성 길이 (None이면 소스 길이로 결정)
        show_progress: 진행 막대 표시 여부

    Returns:
        EvalReport (문맥 없는 이의어 정확도 상한 포함)
    """
    hypotheses = decode_examples(params, examples, beam_size, max_len, show_progress)
    report = score_token_hypotheses(examples, hypotheses, params.config.target_mode)
    report.decoding = decoding_label(beam_size)
    report.context_free_heteronym_accuracy, _ = context_free_accuracy(examples)
    return report


def accerr_for_examples(
    params: ModelParams,
    examples: Sequence[Example],
    l_max: int,
    show_progress: bool = False,
) -> ExposureBiasReport:
    pairs = encode_examples(examples, params.config)
    return accerr_curve(params, pairs, l_max, show_progress)

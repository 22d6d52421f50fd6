"""
실험 설정 / 결과 스키마 정의

실행 설정은 JSON 파일로 읽고, 명령행 플래그 > 설정 파일 > 기본값 순으로 적용합니다.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from corpus import target_vocab
from g2p_model import ConfigError, ModelConfig
from metrics import EvalReport, ExposureBiasReport
from training import OptimizerConfig, SamplingPolicy, TrainerConfig


Method = Literal["teacher_forcing", "uniform", "loss_based"]
RatioMode = Literal["fixed", "adaptive"]

EVAL_SPLITS = ("test_short", "test_long")
DEFAULT_RATIO_GRID = [0.1, 0.3, 0.6, 0.9]

# 결과 표 레이아웃: (테스트 분할, 디코딩) 4개 그룹 × (PER, WER)
TABLE1_GROUPS = (
    ("short_greedy", "test_short", "greedy"),
    ("short_beam", "test_short", "beam"),
    ("long_greedy", "test_long", "greedy"),
    ("long_beam", "test_long", "beam"),
)
TABLE1_METRICS = tuple(f"{group}_{metric}" for group, _, _ in TABLE1_GROUPS for metric in ("per", "wer"))
TABLE1_COLUMNS = (
    ("method", "ratio_mode", "n_seeds", "n_failed")
    + TABLE1_METRICS
    + ("heteronym_accuracy", "context_free_heteronym_accuracy", "selected_ratios")
)


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """중첩 dict 병합 (override 우선)"""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _derive_vocab_size(data: Any) -> Any:
    # 파일에 tgt_vocab_size가 없으면 target_mode로부터 결정
    if not isinstance(data, dict):
        return data
    model = data.get("model")
    if isinstance(model, ModelConfig):
        return data
    model = dict(model or {})
    if "tgt_vocab_size" not in model:
        model["tgt_vocab_size"] = target_vocab(model.get("target_mode", "bytes")).size
    return {**data, "model": model}


def _read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"설정 파일을 찾을 수 없습니다: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: JSON 형식 오류 ({e.msg}, {e.lineno}행)") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: 최상위 값은 객체여야 합니다")
    return data


def _validate(model_cls, data: Mapping[str, Any], source: str):
    try:
        return model_cls.model_validate(dict(data))
    except ValidationError as e:
        fields = ", ".join(".".join(str(p) for p in err["loc"]) for err in e.errors())
        raise ConfigError(f"{source}: 설정 오류 ({fields})\n{e}") from e


class DecodeConfig(BaseModel):
    """디코딩 설정"""
    beam_size: int = Field(default=1, ge=1, description="빔 크기 (1이면 greedy)")
    max_len: Optional[int] = Field(default=None, ge=1, description="최대 생성 길이 (None이면 2×소스+16)")


class CorpusSizes(BaseModel):
    """코퍼스 생성 크기"""
    n_words: int = Field(default=200, gt=0, description="사전 단어 수")
    n_heteronyms: int = Field(default=10, ge=0, description="이의어 수")
    n_train: int = Field(default=8000, gt=0, description="학습 예제 수")
    n_valid: int = Field(default=500, gt=0, description="검증 예제 수")
    n_test: int = Field(default=500, gt=0, description="test_short / test_long 각각의 예제 수")

    @model_validator(mode="after")
    def _check_heteronyms(self):
        if self.n_heteronyms >= self.n_words:
            raise ValueError(f"n_heteronyms({self.n_heteronyms})는 n_words({self.n_words})보다 작아야 합니다")
        return self


class RunConfig(BaseModel):
    """gen / train / eval / accerr 실행 설정"""
    model: ModelConfig = Field(default_factory=ModelConfig, description="모델 설정")
    policy: SamplingPolicy = Field(default_factory=SamplingPolicy, description="학습 방법")
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    corpus: CorpusSizes = Field(default_factory=CorpusSizes, description="gen 코퍼스 크기")
    corpus_dir: str = Field(default="corpus", description="코퍼스 디렉토리 (output_dir 기준 상대 경로 허용)")
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1, description="시드 목록")
    decode: DecodeConfig = Field(default_factory=DecodeConfig)
    output_dir: str = Field(default="./output", description="출력 디렉토리")

    @model_validator(mode="before")
    @classmethod
    def _derive_vocab(cls, data: Any) -> Any:
        return _derive_vocab_size(data)

    @property
    def seed(self) -> int:
        return self.seeds[0]

    @classmethod
    def from_file(
        cls,
        path: Optional[Union[str, Path]] = None,
        defaults: Optional[Mapping[str, Any]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        """
        설정 파일 로드

        Args:
            path: JSON 설정 파일 (None이면 기본값만)
            defaults: 환경 변수 등에서 온 기본값
            overrides: 명령행 플래그 값

        Raises:
            FileNotFoundError: 설정 파일이 없는 경우
            ConfigError: JSON 형식 또는 필드 값 오류
        """
        data = deep_merge(defaults or {}, _read_config_file(path) if path else {})
        data = deep_merge(data, overrides or {})
        return _validate(cls, data, str(path or "<기본값>"))

    def corpus_path(self) -> Path:
        path = Path(self.corpus_dir)
        return (path if path.is_absolute() else Path(self.output_dir) / path).resolve()

    def require_corpus(self) -> Path:
        """
        코퍼스 디렉토리가 존재하는지 확인

        Raises:
            FileNotFoundError: 디렉토리가 없는 경우
        """
        path = self.corpus_path()
        if not path.is_dir():
            raise FileNotFoundError(f"코퍼스 디렉토리를 찾을 수 없습니다: {path} (먼저 gen을 실행하세요)")
        return path


class ExperimentConfig(BaseModel):
    """방법 × 비율 정책 × 시드 실험 격자 설정"""
    model: ModelConfig = Field(default_factory=ModelConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    corpus_dir: str = Field(default="corpus")
    output_dir: str = Field(default="./output")
    methods: List[Method] = Field(
        default_factory=lambda: ["teacher_forcing", "uniform", "loss_based"], min_length=1
    )
    ratio_modes: List[RatioMode] = Field(default_factory=lambda: ["fixed", "adaptive"], min_length=1)
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    ratio_grid: List[float] = Field(
        default_factory=lambda: list(DEFAULT_RATIO_GRID), min_length=1, description="고정 비율 탐색 후보"
    )
    beam_size: int = Field(default=3, ge=1, description="빔 탐색 크기")
    max_len: Optional[int] = Field(default=None, ge=1)
    l_max: int = Field(default=64, ge=1, description="AccErr 최대 스텝")
    accerr_split: Literal["validation", "test_short", "test_long"] = Field(default="test_long")
    accerr_labels: List[str] = Field(
        default_factory=lambda: ["teacher_forcing", "loss_based/adaptive"],
        description="AccErr 곡선을 계산할 셀",
    )
    workers: int = Field(default=1, ge=1, description="병렬 프로세스 수 (1이면 순차 실행)")
    save_runs: bool = Field(default=True, description="시드별 체크포인트와 학습 로그 저장 여부")

    @model_validator(mode="before")
    @classmethod
    def _derive_vocab(cls, data: Any) -> Any:
        return _derive_vocab_size(data)

    @field_validator("ratio_grid")
    @classmethod
    def _check_grid(cls, value: List[float]) -> List[float]:
        for ratio in value:
            if not 0.0 < ratio <= 1.0:
                raise ValueError(f"ratio_grid 값은 (0, 1] 범위여야 합니다: {ratio}")
        return value

    @classmethod
    def from_file(
        cls,
        path: Union[str, Path],
        defaults: Optional[Mapping[str, Any]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "ExperimentConfig":
        data = deep_merge(defaults or {}, _read_config_file(path))
        data = deep_merge(data, overrides or {})
        return _validate(cls, data, str(path))

    def cells(self) -> List[Tuple[str, str]]:
        """결과 표 행 순서의 (method, ratio_mode) 목록. teacher forcing은 한 행"""
        cells: List[Tuple[str, str]] = []
        for method in dict.fromkeys(self.methods):
            if method == "teacher_forcing":
                cells.append((method, "fixed"))
                continue
            for mode in dict.fromkeys(self.ratio_modes):
                cells.append((method, mode))
        return cells

    def corpus_path(self) -> Path:
        path = Path(self.corpus_dir)
        return (path if path.is_absolute() else Path(self.output_dir) / path).resolve()


class RunJob(BaseModel):
    """실험 격자의 (셀, 시드) 하나"""
    method: Method
    ratio_mode: RatioMode
    seed: int
    model: ModelConfig
    optimizer: OptimizerConfig
    trainer: TrainerConfig
    ratio_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_RATIO_GRID))
    beam_size: int = Field(default=3, ge=1)
    max_len: Optional[int] = None
    l_max: int = 64
    accerr_split: str = "test_long"
    track_accerr: bool = False
    run_dir: Optional[str] = Field(default=None, description="체크포인트/로그 저장 위치")
    show_progress: bool = False

    @property
    def label(self) -> str:
        return self.policies()[0].label

    def policies(self) -> List[SamplingPolicy]:
        """학습할 정책 후보. 고정 비율 two-pass는 ratio_grid 전체"""
        if self.method == "teacher_forcing":
            return [SamplingPolicy(method=self.method)]
        if self.ratio_mode == "adaptive":
            return [SamplingPolicy(method=self.method, ratio_mode="adaptive")]
        return [SamplingPolicy(method=self.method, ratio_mode="fixed", fixed_ratio=r) for r in self.ratio_grid]


class SeedResult(BaseModel):
    """(셀, 시드) 하나의 결과"""
    method: str
    ratio_mode: str
    seed: int
    selected_ratio: Optional[float] = Field(default=None, description="고정 비율 탐색으로 고른 비율")
    best_epoch: int = 0
    best_val_loss: Optional[float] = None
    reports: Dict[str, EvalReport] = Field(default_factory=dict, description="'test_long/beam' 등 → 리포트")
    accerr: Optional[ExposureBiasReport] = None
    error: Optional[str] = Field(default=None, description="실패한 경우 오류 메시지")

    @property
    def ok(self) -> bool:
        return self.error is None


class Table1Row(BaseModel):
    """시드 평균 결과 한 행"""
    method: str
    ratio_mode: str = Field(description="teacher forcing은 '-'")
    n_seeds: int = Field(ge=0, description="성공한 시드 수")
    n_failed: int = Field(default=0, ge=0)
    metrics: Dict[str, Optional[float]] = Field(default_factory=dict, description="TABLE1_METRICS → 시드 평균")
    heteronym_accuracy: Optional[float] = Field(default=None, description="test_long greedy 이의어 정확도 평균")
    context_free_heteronym_accuracy: Optional[float] = None
    selected_ratios: List[float] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list)

    def csv_row(self) -> dict:
        row = {
            "method": self.method,
            "ratio_mode": self.ratio_mode,
            "n_seeds": self.n_seeds,
            "n_failed": self.n_failed,
            "heteronym_accuracy": self.heteronym_accuracy,
            "context_free_heteronym_accuracy": self.context_free_heteronym_accuracy,
            "selected_ratios": " ".join(repr(r) for r in self.selected_ratios),
        }
        row.update({name: self.metrics.get(name) for name in TABLE1_METRICS})
        return row


class GridSummary(BaseModel):
    """실험 격자 요약"""
    seeds: List[int]
    target_mode: str
    beam_size: int
    rows: List[Table1Row] = Field(default_factory=list)
    accerr: Dict[str, List[dict]] = Field(default_factory=dict, description="셀 라벨 → 시드 평균 AccErr 행")
    runs: List[SeedResult] = Field(default_factory=list)

    def row(self, method: str, ratio_mode: str = "-") -> Table1Row:
        for entry in self.rows:
            if entry.method == method and entry.ratio_mode == ratio_mode:
                return entry
        raise KeyError(f"{method}/{ratio_mode}")

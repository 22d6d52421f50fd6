"""
실험 모듈

실행 설정 스키마, 평가, LangGraph 기반 실험 격자 오케스트레이션, AccErr 그림을 제공합니다.
"""

from .schemas import (
    TABLE1_COLUMNS,
    TABLE1_METRICS,
    CorpusSizes,
    DecodeConfig,
    ExperimentConfig,
    GridSummary,
    RunConfig,
    RunJob,
    SeedResult,
    Table1Row,
    deep_merge,
)
from .evaluation import accerr_for_examples, decode_examples, decoding_label, evaluate_examples
from .orchestrator import (
    build_jobs,
    create_orchestrator,
    mean_accerr_rows,
    run_experiment,
    run_job,
    save_summary,
    summarize,
)
from .plotting import MATPLOTLIB_AVAILABLE, plot_accerr_curves

__all__ = [
    "TABLE1_COLUMNS",
    "TABLE1_METRICS",
    "CorpusSizes",
    "DecodeConfig",
    "ExperimentConfig",
    "GridSummary",
    "RunConfig",
    "RunJob",
    "SeedResult",
    "Table1Row",
    "deep_merge",
    "accerr_for_examples",
    "decode_examples",
    "decoding_label",
    "evaluate_examples",
    "build_jobs",
    "create_orchestrator",
    "mean_accerr_rows",
    "run_experiment",
    "run_job",
    "save_summary",
    "summarize",
    "MATPLOTLIB_AVAILABLE",
    "plot_accerr_curves",
]

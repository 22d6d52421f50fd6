"""
실험 격자 오케스트레이션 (LangGraph 기반)

(방법, 비율 정책, 시드) 하나를 train → evaluate → accerr 그래프로 실행하고,
시드 평균을 결과 표 레이아웃으로 모읍니다. 한 셀이 실패해도 격자는 계속 진행되고
실패는 셀별로 기록됩니다.
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph

from corpus import CorpusSplit
from g2p_model import ModelParams, save_checkpoint
from metrics import ACCERR_COLUMNS, EvalReport, ExposureBiasReport
from services import FileHandler
from training import LOG_COLUMNS, TrainState, log_rows, train

from .evaluation import accerr_for_examples, evaluate_examples
from .schemas import (
    EVAL_SPLITS,
    TABLE1_COLUMNS,
    TABLE1_GROUPS,
    ExperimentConfig,
    GridSummary,
    RunJob,
    SeedResult,
    Table1Row,
)


# ===== 상태 정의 =====
class RunState(TypedDict):
    """실험 그래프 상태"""
    job: RunJob
    corpus: CorpusSplit
    params: Optional[ModelParams]
    train_state: Optional[TrainState]
    result: SeedResult
    current_step: str
    error: Optional[str]


def _say(job: RunJob, message: str) -> None:
    if job.show_progress:
        print(message)


def _failed(state: RunState, error: Exception) -> RunState:
    return {**state, "error": f"{type(error).__name__}: {error}", "current_step": "error"}


# ===== LangGraph 노드 함수 =====
async def train_node(state: RunState) -> RunState:
    """학습 노드. 고정 비율 two-pass는 ratio_grid 후보 중 검증 손실이 가장 낮은 것을 고릅니다"""
    job = state["job"]
    _say(job, f"\n🔍 [{job.label}] seed {job.seed}: 학습 중...")

    try:
        policies = job.policies()
        best_policy, best_state = None, None
        for policy in policies:
            candidate = train(
                job.model,
                state["corpus"],
                policy,
                job.seed,
                job.trainer,
                job.optimizer,
                show_progress=job.show_progress,
            )
            if best_state is None or candidate.best_val_loss < best_state.best_val_loss:
                best_policy, best_state = policy, candidate
            if len(policies) > 1:
                _say(job, f"   ✓ ratio {policy.fixed_ratio}: best val loss {candidate.best_val_loss:.4f}")

        grid_searched = best_policy.is_two_pass and best_policy.ratio_mode == "fixed"
        result = state["result"].model_copy(update={
            "selected_ratio": best_policy.fixed_ratio if grid_searched else None,
            "best_epoch": best_state.best_epoch,
            "best_val_loss": best_state.best_val_loss,
        })
        if job.run_dir:
            handler = FileHandler(job.run_dir)
            handler.write_csv("train_log.csv", LOG_COLUMNS, log_rows(best_state.history))
            save_checkpoint(best_state.params, handler.resolve("checkpoint.zip"))

        return {
            **state,
            "params": best_state.params,
            "train_state": best_state,
            "result": result,
            "current_step": "evaluate",
        }
    except Exception as e:
        return _failed(state, e)


async def evaluate_node(state: RunState) -> RunState:
    """test_short / test_long을 greedy와 빔 탐색으로 평가하는 노드"""
    job = state["job"]
    _say(job, f"📊 [{job.label}] seed {job.seed}: 평가 중...")

    try:
        reports: Dict[str, EvalReport] = {}
        for split in EVAL_SPLITS:
            examples = state["corpus"].split(split)
            greedy = evaluate_examples(state["params"], examples, 1, job.max_len)
            reports[f"{split}/greedy"] = greedy
            if job.beam_size == 1:
                reports[f"{split}/beam"] = greedy
            else:
                reports[f"{split}/beam"] = evaluate_examples(state["params"], examples, job.beam_size, job.max_len)
            _say(job, f"   ✓ {split}: greedy PER {greedy.per:.2%}, beam PER {reports[f'{split}/beam'].per:.2%}")

        result = state["result"].model_copy(update={"reports": reports})
        next_step = "accerr" if job.track_accerr else "complete"
        return {**state, "result": result, "current_step": next_step}
    except Exception as e:
        return _failed(state, e)


async def accerr_node(state: RunState) -> RunState:
    """노출 편향 곡선 노드"""
    job = state["job"]
    _say(job, f"📈 [{job.label}] seed {job.seed}: AccErr 계산 중...")

    try:
        examples = state["corpus"].split(job.accerr_split)
        report = accerr_for_examples(state["params"], examples, job.l_max)
        if job.run_dir:
            FileHandler(job.run_dir).write_csv("accerr.csv", ACCERR_COLUMNS, report.rows())
        result = state["result"].model_copy(update={"accerr": report})
        return {**state, "result": result, "current_step": "complete"}
    except Exception as e:
        return _failed(state, e)


def should_continue(state: RunState) -> str:
    """다음 단계 결정"""
    if state.get("error"):
        return "error"
    return state["current_step"]


def create_orchestrator():
    """실험 그래프 생성"""
    builder = StateGraph(RunState)

    builder.add_node("train", train_node)
    builder.add_node("evaluate", evaluate_node)
    builder.add_node("accerr", accerr_node)

    builder.set_entry_point("train")
    builder.add_conditional_edges("train", should_continue, {"evaluate": "evaluate", "error": END})
    builder.add_conditional_edges(
        "evaluate",
        should_continue,
        {"accerr": "accerr", "complete": END, "error": END},
    )
    builder.add_conditional_edges("accerr", should_continue, {"complete": END, "error": END})

    return builder.compile()


async def run_job(job: RunJob, corpus: CorpusSplit) -> SeedResult:
    """
    (셀, 시드) 하나를 실행합니다.

    Returns:
        SeedResult (실패하면 error 필드에 원인)
    """
    initial_state: RunState = {
        "job": job,
        "corpus": corpus,
        "params": None,
        "train_state": None,
        "result": SeedResult(method=job.method, ratio_mode=job.ratio_mode, seed=job.seed),
        "current_step": "train",
        "error": None,
    }
    graph = create_orchestrator()
    final_state = await graph.ainvoke(initial_state)

    result = final_state["result"]
    if final_state.get("error"):
        print(f"   ⚠️ [{job.label}] seed {job.seed} 실패: {final_state['error']}")
        result = result.model_copy(update={"error": final_state["error"]})
    return result


def run_job_sync(job: RunJob, corpus: CorpusSplit) -> SeedResult:
    """프로세스 풀 작업 진입점"""
    return asyncio.run(run_job(job, corpus))


def build_jobs(config: ExperimentConfig, show_progress: bool = False) -> List[RunJob]:
    """격자의 (셀, 시드) 작업 목록 (셀 순서 → 시드 순서)"""
    runs_dir = Path(config.output_dir) / "runs"
    jobs = []
    for method, ratio_mode in config.cells():
        for seed in config.seeds:
            job = RunJob(
                method=method,
                ratio_mode=ratio_mode,
                seed=seed,
                model=config.model,
                optimizer=config.optimizer,
                trainer=config.trainer,
                ratio_grid=config.ratio_grid,
                beam_size=config.beam_size,
                max_len=config.max_len,
                l_max=config.l_max,
                accerr_split=config.accerr_split,
                show_progress=show_progress,
            )
            slug = job.label.replace("/", "_")
            job.track_accerr = job.label in config.accerr_labels
            job.run_dir = str(runs_dir / slug / f"seed{seed}") if config.save_runs else None
            jobs.append(job)
    return jobs


def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def mean_accerr_rows(reports: Sequence[ExposureBiasReport]) -> List[dict]:
    """시드별 AccErr 곡선의 스텝별 평균 (가장 짧은 곡선 길이까지)"""
    if not reports:
        return []
    rows = [report.rows() for report in reports]
    length = min(len(r) for r in rows)
    merged = []
    for k in range(length):
        column = [r[k] for r in rows]
        merged.append({
            "l": column[0]["l"],
            "L_AR_cum": _mean([c["L_AR_cum"] for c in column]),
            "L_TF_cum": _mean([c["L_TF_cum"] for c in column]),
            "AccErr": _mean([c["AccErr"] for c in column]),
            "expected": column[0]["expected"],
            "n_examples_at_l": min(c["n_examples_at_l"] for c in column),
        })
    return merged


def summarize(config: ExperimentConfig, results: Sequence[SeedResult]) -> GridSummary:
    """시드 결과를 결과 표 레이아웃으로 평균"""
    summary = GridSummary(
        seeds=list(config.seeds),
        target_mode=config.model.target_mode,
        beam_size=config.beam_size,
        runs=list(results),
    )
    for method, ratio_mode in config.cells():
        cell = [r for r in results if r.method == method and r.ratio_mode == ratio_mode]
        ok = [r for r in cell if r.ok]
        metrics = {}
        for group, split, decoding in TABLE1_GROUPS:
            reports = [r.reports[f"{split}/{decoding}"] for r in ok]
            metrics[f"{group}_per"] = _mean([report.per for report in reports])
            metrics[f"{group}_wer"] = _mean([report.wer for report in reports])
        long_greedy = [r.reports["test_long/greedy"] for r in ok]
        bounds = [rep.context_free_heteronym_accuracy for rep in long_greedy
                  if rep.context_free_heteronym_accuracy is not None]
        summary.rows.append(Table1Row(
            method=method,
            ratio_mode="-" if method == "teacher_forcing" else ratio_mode,
            n_seeds=len(ok),
            n_failed=len(cell) - len(ok),
            metrics=metrics,
            heteronym_accuracy=_mean([rep.heteronym_accuracy for rep in long_greedy]),
            context_free_heteronym_accuracy=_mean(bounds),
            selected_ratios=[r.selected_ratio for r in ok if r.selected_ratio is not None],
            errors=[f"seed {r.seed}: {r.error}" for r in cell if not r.ok],
        ))

        curves = [r.accerr for r in ok if r.accerr is not None]
        if curves:
            label = "teacher_forcing" if method == "teacher_forcing" else f"{method}/{ratio_mode}"
            summary.accerr[label] = mean_accerr_rows(curves)
    return summary


async def run_experiment(
    config: ExperimentConfig,
    corpus: CorpusSplit,
    show_progress: bool = False,
) -> GridSummary:
    """
    실험 격자 전체를 실행합니다.

    workers가 1이면 순차 실행하고, 그보다 크면 셀을 독립 프로세스에서 병렬로 실행한 뒤
    결과를 모읍니다.

    Args:
        config: 실험 설정
        corpus: 코퍼스
        show_progress: 진행 상황 출력 여부

    Returns:
        GridSummary
    """
    jobs = build_jobs(config, show_progress)
    print(f"🧪 실험 격자: 셀 {len(config.cells())}개 × 시드 {len(config.seeds)}개 = 실행 {len(jobs)}회")

    if config.workers <= 1:
        results = [await run_job(job, corpus) for job in jobs]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = await asyncio.gather(
                *(loop.run_in_executor(pool, run_job_sync, job, corpus) for job in jobs),
                return_exceptions=True,
            )
        results = []
        for job, outcome in zip(jobs, outcomes):
            if isinstance(outcome, BaseException):
                print(f"   ⚠️ [{job.label}] seed {job.seed} 작업 오류: {outcome}")
                outcome = SeedResult(
                    method=job.method, ratio_mode=job.ratio_mode, seed=job.seed,
                    error=f"{type(outcome).__name__}: {outcome}",
                )
            results.append(outcome)

    summary = summarize(config, results)
    n_failed = sum(not r.ok for r in results)
    if n_failed:
        print(f"⚠️ 실패한 실행 {n_failed}회 (요약에 셀별로 기록됨)")
    print("🎉 실험 격자 완료!")
    return summary


def save_summary(summary: GridSummary, output_dir: str, plot: bool = True) -> Dict[str, str]:
    """
    요약 저장: table1.csv, summary.json, AccErr CSV (및 그림)

    Returns:
        저장된 파일 경로 딕셔너리
    """
    handler = FileHandler(output_dir)
    saved = {
        "table": str(handler.write_csv("table1.csv", TABLE1_COLUMNS, (row.csv_row() for row in summary.rows))),
        "summary": str(handler.write_json("summary.json", summary)),
    }
    for label, rows in summary.accerr.items():
        name = f"accerr_{label.replace('/', '_')}.csv"
        saved[f"accerr:{label}"] = str(handler.write_csv(name, ACCERR_COLUMNS, rows))
    if plot and summary.accerr:
        from .plotting import plot_accerr_curves

        figure = plot_accerr_curves(summary.accerr, handler.resolve("accerr.png"))
        if figure is not None:
            saved["plot"] = str(figure)
    return saved

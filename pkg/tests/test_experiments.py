"""
실험 설정 / 격자 실행 / 요약 테스트
"""

import asyncio
import json

import pytest

from conftest import TINY_MODEL
from experiments import (
    TABLE1_COLUMNS,
    ExperimentConfig,
    RunConfig,
    RunJob,
    SeedResult,
    build_jobs,
    evaluate_examples,
    mean_accerr_rows,
    run_experiment,
    save_summary,
    summarize,
)
from experiments import orchestrator
from g2p_model import ConfigError
from metrics import EvalReport, accerr_from_losses
from training import DivergenceError


QUICK_TRAINER = {
    "epochs": 1,
    "batch_size": 8,
    "val_per_examples": 2,
    "val_batch_size": 2,
    "max_len_factor": 1,
    "max_len_offset": 2,
}


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


# ===== 설정 =====

def test_run_config_precedence(tmp_path):
    path = _write(tmp_path / "run.json", {"seeds": [4], "model": {"d_model": 64}, "decode": {"beam_size": 2}})
    config = RunConfig.from_file(
        path,
        defaults={"output_dir": "from-env", "seeds": [9]},
        overrides={"decode": {"beam_size": 5}},
    )
    assert config.seed == 4
    assert config.output_dir == "from-env"
    assert config.model.d_model == 64
    assert config.model.n_heads == 4
    assert config.decode.beam_size == 5


def test_vocab_size_follows_target_mode():
    assert RunConfig.from_file(None).model.tgt_vocab_size == 259
    symbols = RunConfig.from_file(None, overrides={"model": {"target_mode": "symbols"}})
    assert symbols.model.tgt_vocab_size == 44


def test_invalid_config_values_name_the_field(tmp_path):
    path = _write(tmp_path / "bad.json", {"model": {"d_model": 30, "n_heads": 4}, "trainer": {"epochs": 0}})
    with pytest.raises(ConfigError) as exc_info:
        RunConfig.from_file(path)
    assert "trainer.epochs" in str(exc_info.value)


def test_malformed_or_missing_config(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_file(broken)
    with pytest.raises(FileNotFoundError):
        RunConfig.from_file(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        RunConfig.from_file(None, overrides={"corpus": {"n_words": 5, "n_heteronyms": 5}})


def test_corpus_path_is_relative_to_output_dir(tmp_path):
    config = RunConfig(output_dir=str(tmp_path), corpus_dir="data")
    assert config.corpus_path() == (tmp_path / "data").resolve()
    with pytest.raises(FileNotFoundError):
        config.require_corpus()


def test_experiment_cells_list_teacher_forcing_once(tmp_path):
    config = ExperimentConfig.from_file(_write(tmp_path / "grid.json", {"seeds": [0, 1]}))
    assert config.cells() == [
        ("teacher_forcing", "fixed"),
        ("uniform", "fixed"),
        ("uniform", "adaptive"),
        ("loss_based", "fixed"),
        ("loss_based", "adaptive"),
    ]


def test_ratio_grid_must_be_positive(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(_write(tmp_path / "grid.json", {"ratio_grid": [0.0, 0.5]}))


def test_fixed_ratio_jobs_search_the_grid():
    base = dict(seed=0, model=TINY_MODEL, optimizer={}, trainer={})
    fixed = RunJob(method="uniform", ratio_mode="fixed", ratio_grid=[0.2, 0.4], **base)
    assert [p.fixed_ratio for p in fixed.policies()] == [0.2, 0.4]
    assert fixed.label == "uniform/fixed"
    adaptive = RunJob(method="loss_based", ratio_mode="adaptive", **base)
    assert [p.label for p in adaptive.policies()] == ["loss_based/adaptive"]
    assert RunJob(method="teacher_forcing", ratio_mode="fixed", **base).label == "teacher_forcing"


def test_build_jobs_paths_and_accerr_flags(tmp_path):
    config = ExperimentConfig(
        output_dir=str(tmp_path),
        methods=["teacher_forcing", "loss_based"],
        ratio_modes=["adaptive"],
        seeds=[0, 1],
    )
    jobs = build_jobs(config)
    assert [(j.label, j.seed) for j in jobs] == [
        ("teacher_forcing", 0),
        ("teacher_forcing", 1),
        ("loss_based/adaptive", 0),
        ("loss_based/adaptive", 1),
    ]
    assert all(j.track_accerr for j in jobs)
    assert jobs[3].run_dir == str(tmp_path / "runs" / "loss_based_adaptive" / "seed1")


# ===== 요약 =====

def _report(per, wer=0.5, het=1.0, bound=0.75):
    return EvalReport(
        per=per, wer=wer, heteronym_accuracy=het, n_examples=1, total_ref_phonemes=1, total_ref_words=1,
        context_free_heteronym_accuracy=bound,
    )


def _seed_result(method, mode, seed, per, error=None, ratio=None):
    reports = {} if error else {
        f"{split}/{decoding}": _report(per)
        for split in ("test_short", "test_long")
        for decoding in ("greedy", "beam")
    }
    return SeedResult(method=method, ratio_mode=mode, seed=seed, reports=reports, error=error, selected_ratio=ratio)


def test_summarize_averages_successful_seeds():
    config = ExperimentConfig(methods=["teacher_forcing", "uniform"], ratio_modes=["fixed"], seeds=[0, 1])
    results = [
        _seed_result("teacher_forcing", "fixed", 0, 0.2),
        _seed_result("teacher_forcing", "fixed", 1, 0.4),
        _seed_result("uniform", "fixed", 0, 0.1, ratio=0.3),
        _seed_result("uniform", "fixed", 1, 0.0, error="DivergenceError: boom"),
    ]
    summary = summarize(config, results)

    tf = summary.row("teacher_forcing")
    assert tf.n_seeds == 2
    assert tf.metrics["long_greedy_per"] == pytest.approx(0.3)
    assert tf.heteronym_accuracy == 1.0
    assert tf.context_free_heteronym_accuracy == 0.75

    uniform = summary.row("uniform", "fixed")
    assert (uniform.n_seeds, uniform.n_failed) == (1, 1)
    assert uniform.metrics["short_beam_per"] == pytest.approx(0.1)
    assert uniform.selected_ratios == [0.3]
    assert uniform.errors == ["seed 1: DivergenceError: boom"]
    assert set(uniform.csv_row()) == set(TABLE1_COLUMNS)


def test_all_failed_cell_has_empty_metrics():
    config = ExperimentConfig(methods=["teacher_forcing"], seeds=[0])
    summary = summarize(config, [_seed_result("teacher_forcing", "fixed", 0, 0.0, error="x")])
    row = summary.row("teacher_forcing")
    assert row.n_seeds == 0
    assert row.metrics["long_beam_wer"] is None


def test_mean_accerr_rows_truncates_to_shortest():
    a = accerr_from_losses([[1.0, 1.0, 1.0]], [[1.0, 1.0, 1.0]])
    b = accerr_from_losses([[3.0, 3.0]], [[1.0, 1.0]])
    rows = mean_accerr_rows([a, b])
    assert [row["l"] for row in rows] == [1, 2]
    assert rows[1]["AccErr"] == pytest.approx((2.0 + 6.0) / 2)
    assert mean_accerr_rows([]) == []


# ===== 격자 실행 =====

def _tiny_grid(tmp_path, **extra):
    data = {
        "model": dict(TINY_MODEL),
        "trainer": QUICK_TRAINER,
        "output_dir": str(tmp_path),
        "methods": ["teacher_forcing", "loss_based"],
        "ratio_modes": ["adaptive"],
        "seeds": [0],
        "beam_size": 2,
        "max_len": 6,
        "l_max": 4,
    }
    data.update(extra)
    return ExperimentConfig.model_validate(data)


def test_tiny_grid_end_to_end(tmp_path, corpus):
    config = _tiny_grid(tmp_path)
    summary = asyncio.run(run_experiment(config, corpus))

    assert [(row.method, row.ratio_mode) for row in summary.rows] == [
        ("teacher_forcing", "-"),
        ("loss_based", "adaptive"),
    ]
    assert all(row.n_seeds == 1 and row.n_failed == 0 for row in summary.rows)
    assert set(summary.accerr) == {"teacher_forcing", "loss_based/adaptive"}
    steps = [row["l"] for row in summary.accerr["teacher_forcing"]]
    assert steps == list(range(1, len(steps) + 1)) and 1 <= len(steps) <= 4
    for run in summary.runs:
        assert set(run.reports) == {"test_short/greedy", "test_short/beam", "test_long/greedy", "test_long/beam"}
        assert run.reports["test_long/beam"].decoding == "beam-2"

    run_dir = tmp_path / "runs" / "loss_based_adaptive" / "seed0"
    assert (run_dir / "checkpoint.zip").is_file()
    assert (run_dir / "train_log.csv").is_file()
    assert (run_dir / "accerr.csv").is_file()

    saved = save_summary(summary, str(tmp_path), plot=False)
    assert (tmp_path / "table1.csv").read_text(encoding="utf-8").splitlines()[0] == ",".join(TABLE1_COLUMNS)
    assert json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))["beam_size"] == 2
    assert (tmp_path / "accerr_loss_based_adaptive.csv").is_file()
    assert "plot" not in saved


def test_failed_cell_does_not_stop_grid(tmp_path, corpus, monkeypatch):
    real_train = orchestrator.train

    def flaky_train(config, corpus, policy, seed, *args, **kwargs):
        if policy.is_two_pass:
            raise DivergenceError(1, 0, float("nan"))
        return real_train(config, corpus, policy, seed, *args, **kwargs)

    monkeypatch.setattr(orchestrator, "train", flaky_train)
    config = _tiny_grid(tmp_path, save_runs=False, accerr_labels=[])
    summary = asyncio.run(run_experiment(config, corpus))

    assert summary.row("teacher_forcing").n_seeds == 1
    failed = summary.row("loss_based", "adaptive")
    assert (failed.n_seeds, failed.n_failed) == (0, 1)
    assert "DivergenceError" in failed.errors[0]
    assert summary.accerr == {}
    assert not (tmp_path / "runs").exists()


def test_beam_one_report_equals_greedy(tiny_params, corpus):
    greedy = evaluate_examples(tiny_params, corpus.test_short, beam_size=1, max_len=5)
    assert greedy.decoding == "greedy"
    beam = evaluate_examples(tiny_params, corpus.test_short, beam_size=2, max_len=5)
    assert beam.decoding == "beam-2"
    assert beam.n_examples == greedy.n_examples


def test_accerr_plot(tmp_path):
    pytest.importorskip("matplotlib")
    from experiments import plot_accerr_curves

    rows = accerr_from_losses([[1.0, 2.0]], [[1.0, 1.0]]).rows()
    path = plot_accerr_curves({"teacher_forcing": rows}, tmp_path / "accerr.png")
    assert path is not None and path.stat().st_size > 0

"""
데스크 규모 재현 테스트

학습이 오래 걸리는 테스트는 @pytest.mark.slow로 표시되어 --runslow 옵션이 있을 때만 실행됩니다.
"""

import asyncio

import numpy as np
import pytest

from corpus import build_lexicon, generate_corpus
from experiments import ExperimentConfig, evaluate_examples, run_experiment
from experiments.schemas import CorpusSizes
from g2p_model import ModelConfig, save_checkpoint
from training import SamplingPolicy, TrainerConfig, log_rows, train


@pytest.fixture(scope="module")
def desk_corpus():
    sizes = CorpusSizes()
    lexicon = build_lexicon(0, sizes.n_words, sizes.n_heteronyms)
    return generate_corpus(
        lexicon, 0, n_train=sizes.n_train, n_valid=sizes.n_valid, n_test=sizes.n_test, limits=ModelConfig()
    )


@pytest.fixture(scope="module")
def desk_grid(desk_corpus, tmp_path_factory):
    config = ExperimentConfig(
        output_dir=str(tmp_path_factory.mktemp("grid")),
        methods=["teacher_forcing", "loss_based"],
        ratio_modes=["adaptive"],
        seeds=[0, 1, 2],
        beam_size=3,
        save_runs=False,
    )
    return asyncio.run(run_experiment(config, desk_corpus))


def test_same_seed_reproduces_logs_and_checkpoints(tiny_config, corpus, tmp_path):
    trainer = TrainerConfig(epochs=2, batch_size=8, val_per_examples=4, val_batch_size=4, max_len_factor=1, max_len_offset=4)
    policy = SamplingPolicy(method="loss_based", ratio_mode="adaptive")
    outputs = []
    for run in ("a", "b"):
        state = train(tiny_config, corpus, policy, seed=11, trainer_config=trainer)
        checkpoint = save_checkpoint(state.params, tmp_path / run / "checkpoint.zip")
        report = evaluate_examples(state.params, corpus.test_short, beam_size=2, max_len=6)
        outputs.append((log_rows(state.history), checkpoint.read_bytes(), report.model_dump_json()))
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_teacher_forcing_reaches_low_validation_per(desk_corpus):
    state = train(ModelConfig(), desk_corpus, SamplingPolicy(), seed=0, trainer_config=TrainerConfig())
    assert min(log.val_per for log in state.history) < 0.10


@pytest.mark.slow
def test_loss_based_adaptive_beats_teacher_forcing_on_long_inputs(desk_grid):
    baseline = desk_grid.row("teacher_forcing")
    proposed = desk_grid.row("loss_based", "adaptive")
    assert baseline.n_seeds == proposed.n_seeds == 3
    for metric in ("long_greedy_per", "long_beam_per"):
        assert proposed.metrics[metric] < baseline.metrics[metric]


@pytest.mark.slow
def test_loss_based_accerr_is_lower_at_large_steps(desk_grid):
    baseline = desk_grid.accerr["teacher_forcing"]
    proposed = desk_grid.accerr["loss_based/adaptive"]
    n = min(len(baseline), len(proposed))
    top = slice(n - max(n // 4, 1), n)
    base_values = np.array([row["AccErr"] for row in baseline[:n]])
    prop_values = np.array([row["AccErr"] for row in proposed[:n]])
    assert prop_values[top].mean() < base_values[top].mean()


@pytest.mark.slow
def test_sentence_model_beats_context_free_heteronym_bound(desk_grid):
    row = desk_grid.row("loss_based", "adaptive")
    assert row.context_free_heteronym_accuracy is not None
    assert row.heteronym_accuracy > row.context_free_heteronym_accuracy


@pytest.mark.slow
def test_accerr_stays_above_ideal_line_while_ar_losses_dominate(desk_grid):
    checked = 0
    for run in desk_grid.runs:
        if run.accerr is None:
            continue
        report = run.accerr
        for k, step in enumerate(report.steps):
            if any(ar < tf - 1e-9 for ar, tf in zip(report.l_ar[: k + 1], report.l_tf[: k + 1])):
                break
            assert report.accerr[k] >= step - 1e-9
            checked += 1
    assert checked > 0

"""
바이트 단위 문장 G2P 실험 프로그램 메인 모듈

합성 코퍼스 생성, 학습, 평가, 노출 편향(AccErr) 측정, 결과 표 실험 격자를 실행합니다.

사용법:
    # 코퍼스 생성
    python main.py gen --seed 0 --out ./output

    # 학습 (체크포인트 + 학습 로그)
    python main.py train --config configs/run.json

    # 평가 (greedy / 빔 탐색)
    python main.py eval --config configs/run.json --split test_long --beam 3

    # AccErr 곡선
    python main.py accerr --config configs/run.json --split test_long --l-max 64

    # 실험 격자
    python main.py experiment --config configs/experiment.json --workers 4

종료 코드: 0 성공, 2 사용법/설정 오류, 3 입출력 오류, 4 학습 발산, 1 그 밖의 오류
"""

import argparse
import asyncio
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

# Windows 콘솔 UTF-8 출력 설정
if sys.platform == "win32":
    sys.stdout.reconfigure(encoding="utf-8")
    sys.stderr.reconfigure(encoding="utf-8")

# 환경 변수 로드
load_dotenv()

from corpus import LexiconError, build_lexicon, generate_corpus
from corpus.generator import SENTENCE_JOIN, SPLIT_SENTENCE_COUNTS
from corpus.lexicon import CUE_RULE
from experiments import (
    ExperimentConfig,
    RunConfig,
    accerr_for_examples,
    evaluate_examples,
    plot_accerr_curves,
    run_experiment,
    save_summary,
)
from g2p_model import CheckpointError, ConfigError, ModelParams, load_checkpoint, save_checkpoint
from metrics import ACCERR_COLUMNS
from services import CorpusFormatError, FileHandler
from training import LOG_COLUMNS, DivergenceError, log_rows, train


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIVERGENCE = 4

SPLIT_CHOICES = ["train", "validation", "test_short", "test_long"]


def env_defaults() -> Dict[str, Any]:
    """환경 변수에서 온 기본값 (설정 파일과 플래그가 우선)"""
    return {
        "output_dir": os.getenv("G2P_OUTPUT_DIR", "./output"),
        "model": {"dtype": os.getenv("G2P_DTYPE", "float32")},
    }


def flag_overrides(args: argparse.Namespace, experiment: bool = False) -> Dict[str, Any]:
    """명령행 플래그 → 설정 덮어쓰기 dict"""
    overrides: Dict[str, Any] = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    beam = getattr(args, "beam", None)
    max_len = getattr(args, "max_len", None)
    if experiment:
        if beam is not None:
            overrides["beam_size"] = beam
        if max_len is not None:
            overrides["max_len"] = max_len
        if getattr(args, "workers", None) is not None:
            overrides["workers"] = args.workers
    else:
        decode = {}
        if beam is not None:
            decode["beam_size"] = beam
        if max_len is not None:
            decode["max_len"] = max_len
        if decode:
            overrides["decode"] = decode
        sizes = {
            key: getattr(args, key)
            for key in ("n_train", "n_valid", "n_test", "n_words", "n_heteronyms")
            if getattr(args, key, None) is not None
        }
        if sizes:
            overrides["corpus"] = sizes
    return overrides


def load_run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig.from_file(args.config, defaults=env_defaults(), overrides=flag_overrides(args))


def checkpoint_path(config: RunConfig, args: argparse.Namespace) -> Path:
    if getattr(args, "checkpoint", None):
        return Path(args.checkpoint)
    return Path(config.output_dir) / f"checkpoint_seed{config.seed}.zip"


# 체크포인트와 실행 설정이 반드시 같아야 하는 모델 필드 (dtype, dropout은 추론에 영향 없음)
ARCHITECTURE_FIELDS = (
    "d_model",
    "n_heads",
    "n_enc_layers",
    "n_dec_layers",
    "d_ffn",
    "src_vocab_size",
    "tgt_vocab_size",
    "target_mode",
)


def load_run_checkpoint(config: RunConfig, args: argparse.Namespace) -> ModelParams:
    """
    체크포인트를 불러오고 실행 설정의 모델 구조와 맞는지 확인

    Raises:
        ConfigError: 체크포인트 구조가 config.model과 다른 경우
    """
    path = checkpoint_path(config, args)
    params = load_checkpoint(path)
    saved, wanted = params.config.model_dump(), config.model.model_dump()
    mismatched = [f"{name}={saved[name]!r} (설정 {wanted[name]!r})" for name in ARCHITECTURE_FIELDS
                  if saved[name] != wanted[name]]
    if mismatched:
        raise ConfigError(f"체크포인트 {path}의 모델 구조가 설정과 다릅니다: {', '.join(mismatched)}")
    return params


# ===== 서브커맨드 =====

def cmd_gen(args: argparse.Namespace) -> int:
    """합성 코퍼스 생성: 분할별 JSONL 4개 + manifest.json + lexicon.json"""
    config = load_run_config(args)
    sizes = config.corpus
    seed = config.seed
    show = not args.quiet

    print(f"🔤 발음 사전 생성 중... (단어 {sizes.n_words}개, 이의어 {sizes.n_heteronyms}개)")
    lexicon = build_lexicon(seed, sizes.n_words, sizes.n_heteronyms)
    corpus = generate_corpus(
        lexicon,
        seed,
        n_train=sizes.n_train,
        n_valid=sizes.n_valid,
        n_test=sizes.n_test,
        limits=config.model,
        show_progress=show,
    )
    manifest = {
        "seed": seed,
        **sizes.model_dump(),
        "sentence_join": SENTENCE_JOIN,
        "split_sentence_counts": {name: list(r) for name, r in SPLIT_SENTENCE_COUNTS.items()},
        "cue_rule": CUE_RULE,
        "max_src_len": config.model.max_src_len,
        "max_tgt_len": config.model.max_tgt_len,
        "target_mode": config.model.target_mode,
    }
    handler = FileHandler(config.output_dir)
    saved = handler.save_corpus(corpus, config.corpus_dir, manifest=manifest, lexicon=lexicon)

    print("\n✨ 저장 완료!")
    for name, path in saved.items():
        print(f"   📄 {name}: {path}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    """학습: 시드마다 최적 체크포인트와 학습 로그 CSV"""
    config = load_run_config(args)
    handler = FileHandler(config.output_dir)
    corpus = handler.load_corpus(config.require_corpus())

    for seed in config.seeds:
        state = train(
            config.model,
            corpus,
            config.policy,
            seed,
            config.trainer,
            config.optimizer,
            show_progress=not args.quiet,
        )
        log_path = handler.write_csv(f"train_log_seed{seed}.csv", LOG_COLUMNS, log_rows(state.history))
        ckpt = save_checkpoint(state.params, Path(config.output_dir) / f"checkpoint_seed{seed}.zip")
        print(f"   💾 체크포인트: {ckpt}")
        print(f"   📄 학습 로그: {log_path}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """평가: EvalReport JSON"""
    config = load_run_config(args)
    handler = FileHandler(config.output_dir)
    params = load_run_checkpoint(config, args)
    examples = handler.load_split(config.require_corpus() / f"{args.split}.jsonl")

    beam = config.decode.beam_size
    print(f"🔍 평가 중: {args.split} ({len(examples)}개), beam {beam}")
    report = evaluate_examples(params, examples, beam, config.decode.max_len, show_progress=not args.quiet)
    path = handler.write_json(f"eval_{args.split}_{report.decoding}.json", report)

    print(f"   ✓ PER {report.per:.2%}, WER {report.wer:.2%}")
    bound = report.context_free_heteronym_accuracy
    bound_text = f"{bound:.2%}" if bound is not None else "이의어 없음"
    print(f"   ✓ 이의어 정확도 {report.heteronym_accuracy:.2%} (문맥 없는 상한 {bound_text}, "
          f"{report.n_heteronym_slots}개 위치)")
    if report.decode_failure_flag:
        print(f"   ⚠️ UTF-8 디코딩 실패 {report.n_decode_failures}건")
    print(f"   📄 {path}")
    return EXIT_OK


def cmd_accerr(args: argparse.Namespace) -> int:
    """노출 편향 측정: AccErr CSV (expected = l 열 포함)"""
    config = load_run_config(args)
    handler = FileHandler(config.output_dir)
    params = load_run_checkpoint(config, args)
    examples = handler.load_split(config.require_corpus() / f"{args.split}.jsonl")

    print(f"📈 AccErr 계산 중: {args.split} ({len(examples)}개), l_max {args.l_max}")
    report = accerr_for_examples(params, examples, args.l_max, show_progress=not args.quiet)
    path = handler.write_csv(f"accerr_{args.split}.csv", ACCERR_COLUMNS, report.rows())
    if report.accerr:
        print(f"   ✓ AccErr({report.steps[-1]}) = {report.accerr[-1]:.3f} (이상적 값 {report.steps[-1]})")
    print(f"   📄 {path}")
    if args.plot:
        figure = plot_accerr_curves({args.split: report.rows()}, handler.resolve(f"accerr_{args.split}.png"))
        if figure is not None:
            print(f"   🖼️ {figure}")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    """실험 격자: table1.csv + summary.json + AccErr 곡선"""
    defaults = env_defaults()
    defaults["workers"] = int(os.getenv("G2P_NUM_WORKERS", "1"))
    config = ExperimentConfig.from_file(args.config, defaults=defaults, overrides=flag_overrides(args, experiment=True))
    corpus_dir = config.corpus_path()
    if not corpus_dir.is_dir():
        raise FileNotFoundError(f"코퍼스 디렉토리를 찾을 수 없습니다: {corpus_dir} (먼저 gen을 실행하세요)")
    corpus = FileHandler(config.output_dir).load_corpus(corpus_dir)

    summary = asyncio.run(run_experiment(config, corpus, show_progress=not args.quiet))
    saved = save_summary(summary, config.output_dir, plot=args.plot)

    print("\n" + "=" * 50)
    for row in summary.rows:
        per = row.metrics.get("long_greedy_per")
        per_text = f"{per:.2%}" if per is not None else "-"
        print(f"   {row.method:<16} {row.ratio_mode:<9} test_long greedy PER {per_text} "
              f"(시드 {row.n_seeds}개, 실패 {row.n_failed}개)")
    print("=" * 50)
    for name, path in saved.items():
        print(f"   📄 {name}: {path}")
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "accerr": cmd_accerr,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    """커맨드라인 인자 파서"""
    parser = argparse.ArgumentParser(
        description="바이트 단위 문장 G2P와 loss 기반 two-pass 샘플링 실험",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예시:
  python main.py gen --seed 0
  python main.py train --config run.json
  python main.py eval --config run.json --split test_long --beam 3
  python main.py experiment --config experiment.json --workers 4
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=str, default=None, help="JSON 설정 파일")
    common.add_argument("--seed", type=int, default=None, help="시드 (설정의 seeds를 덮어씀)")
    common.add_argument("--out", "-o", type=str, default=None, help="출력 디렉토리 (기본값: $G2P_OUTPUT_DIR 또는 ./output)")
    common.add_argument("--quiet", "-q", action="store_true", help="진행 상황 출력 끄기")

    decode = argparse.ArgumentParser(add_help=False)
    decode.add_argument("--beam", type=int, default=None, help="빔 크기 (1이면 greedy)")
    decode.add_argument("--max-len", dest="max_len", type=int, default=None, help="최대 생성 길이")

    evaluation = argparse.ArgumentParser(add_help=False)
    evaluation.add_argument("--checkpoint", type=str, default=None, help="체크포인트 경로")
    evaluation.add_argument("--split", choices=SPLIT_CHOICES, default="test_long", help="평가 분할")

    gen = subparsers.add_parser("gen", parents=[common], help="합성 코퍼스 생성")
    for flag in ("n-train", "n-valid", "n-test", "n-words", "n-heteronyms"):
        gen.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=int, default=None)

    subparsers.add_parser("train", parents=[common], help="모델 학습")
    subparsers.add_parser("eval", parents=[common, decode, evaluation], help="체크포인트 평가")

    accerr = subparsers.add_parser("accerr", parents=[common, evaluation], help="AccErr 노출 편향 곡선")
    accerr.add_argument("--l-max", dest="l_max", type=int, default=64, help="최대 스텝 (기본값: 64)")
    accerr.add_argument("--plot", action="store_true", help="PNG 그림 저장")

    experiment = subparsers.add_parser("experiment", parents=[common, decode], help="결과 표 실험 격자")
    experiment.add_argument("--workers", type=int, default=None, help="병렬 프로세스 수 (기본값: $G2P_NUM_WORKERS 또는 1)")
    experiment.add_argument("--no-plot", dest="plot", action="store_false", help="AccErr 그림 생략")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수. 종료 코드를 돌려줍니다"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment" and args.config is None:
        parser.error("experiment에는 --config가 필요합니다")

    try:
        return COMMANDS[args.command](args)
    except DivergenceError as e:
        print(f"\n❌ 학습 발산: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (CorpusFormatError, CheckpointError, OSError) as e:
        print(f"\n❌ 파일 오류: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, LexiconError) as e:
        print(f"\n❌ 설정 오류: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"\n❌ 오류: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

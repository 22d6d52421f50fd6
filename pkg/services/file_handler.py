"""
파일 핸들러 서비스

코퍼스 JSONL, 매니페스트, 발음 사전, 리포트(JSON/CSV) 파일 입출력을 담당합니다.
모든 파일은 UTF-8, "\\n" 줄바꿈으로 기록하며 같은 입력이면 같은 바이트가 나옵니다.
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ValidationError

from corpus import SPLIT_NAMES, CorpusSplit, Example, HeteronymSlot, Lexicon


MANIFEST_FILE = "manifest.json"
LEXICON_FILE = "lexicon.json"
CORPUS_FIELDS = ("text", "phonemes", "n_sentences", "heteronym_slots")


class CorpusFormatError(ValueError):
    """코퍼스 파일 한 줄을 해석할 수 없을 때 (경로와 줄 번호 포함)"""

    def __init__(self, path: Union[str, Path], line_number: int, reason: str, field: Optional[str] = None):
        self.path = str(path)
        self.line_number = line_number
        self.field = field
        super().__init__(f"{self.path}:{line_number}: {reason}")


def _example_to_record(example: Example) -> Dict[str, Any]:
    return {
        "text": example.text,
        "phonemes": " ".join(example.phonemes),
        "n_sentences": example.n_sentences,
        "heteronym_slots": [[s.word_position, s.pronunciation_id] for s in example.heteronym_slots],
    }


def _record_to_example(record: Any, path: Path, line_number: int) -> Example:
    if not isinstance(record, dict):
        raise CorpusFormatError(path, line_number, "JSON 객체가 아닙니다")
    for field in CORPUS_FIELDS:
        if field not in record:
            raise CorpusFormatError(path, line_number, f"필드 '{field}'가 없습니다", field=field)
    try:
        slots = [HeteronymSlot(word_position=p, pronunciation_id=i) for p, i in record["heteronym_slots"]]
        return Example(
            text=record["text"],
            phonemes=str(record["phonemes"]).split(),
            n_sentences=record["n_sentences"],
            heteronym_slots=slots,
        )
    except (ValidationError, TypeError, ValueError) as e:
        raise CorpusFormatError(path, line_number, f"필드 값이 올바르지 않습니다: {e}") from e


class FileHandler:
    """
    파일 입출력 핸들러

    코퍼스 디렉토리 저장/로드와 리포트 파일 생성을 담당합니다.
    """

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        """
        FileHandler 초기화

        Args:
            output_dir: 출력 파일 저장 디렉토리 (기본값: ./output)
        """
        self.output_dir = Path(output_dir) if output_dir else Path("./output")
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def resolve(self, name: Union[str, Path]) -> Path:
        """상대 경로는 output_dir 기준으로 해석"""
        path = Path(name)
        return path if path.is_absolute() else self.output_dir / path

    # ===== 코퍼스 =====

    def save_corpus(
        self,
        corpus: CorpusSplit,
        subdir: Union[str, Path] = "corpus",
        manifest: Optional[Mapping[str, Any]] = None,
        lexicon: Optional[Lexicon] = None,
    ) -> Dict[str, str]:
        """
        코퍼스를 분할별 JSONL로 저장

        Returns:
            저장된 파일 경로 딕셔너리
        """
        corpus_dir = self.resolve(subdir)
        corpus_dir.mkdir(parents=True, exist_ok=True)
        saved = {}
        for name in SPLIT_NAMES:
            path = corpus_dir / f"{name}.jsonl"
            self.write_jsonl(path, (_example_to_record(e) for e in corpus.split(name)))
            saved[name] = str(path)
        if manifest is not None:
            payload = dict(manifest)
            payload["split_sizes"] = corpus.sizes()
            saved["manifest"] = str(self.write_json(corpus_dir / MANIFEST_FILE, payload))
        if lexicon is not None:
            saved["lexicon"] = str(self.write_json(corpus_dir / LEXICON_FILE, lexicon))
        return saved

    def load_corpus(self, subdir: Union[str, Path]) -> CorpusSplit:
        """
        코퍼스 디렉토리 로드

        Raises:
            FileNotFoundError: 디렉토리나 분할 파일이 없는 경우
            CorpusFormatError: 해석할 수 없는 줄 (줄 번호, 필드 이름 포함)
        """
        corpus_dir = self.resolve(subdir)
        if not corpus_dir.is_dir():
            raise FileNotFoundError(f"코퍼스 디렉토리를 찾을 수 없습니다: {corpus_dir}")
        return CorpusSplit(**{name: self.load_split(corpus_dir / f"{name}.jsonl") for name in SPLIT_NAMES})

    def load_split(self, path: Union[str, Path]) -> List[Example]:
        """JSONL 분할 파일 하나 로드"""
        path = self.resolve(path)
        return [_record_to_example(record, path, n) for n, record in self.read_jsonl(path)]

    def load_lexicon(self, subdir: Union[str, Path]) -> Lexicon:
        path = self.resolve(subdir)
        if path.is_dir():
            path = path / LEXICON_FILE
        if not path.exists():
            raise FileNotFoundError(f"발음 사전 파일을 찾을 수 없습니다: {path}")
        try:
            return Lexicon.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as e:
            raise CorpusFormatError(path, 1, f"발음 사전 형식 오류: {e}") from e

    def load_manifest(self, subdir: Union[str, Path]) -> Dict[str, Any]:
        return self.read_json(self.resolve(subdir) / MANIFEST_FILE)

    # ===== 일반 파일 =====

    def write_jsonl(self, path: Union[str, Path], records: Iterable[Mapping[str, Any]]) -> Path:
        path = self.resolve(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for record in records:
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
        return path

    def read_jsonl(self, path: Union[str, Path]) -> Iterable[tuple]:
        """
        (줄 번호, 레코드)를 순서대로 돌려줍니다. 빈 줄은 건너뜁니다.

        Raises:
            FileNotFoundError: 파일이 없는 경우
            CorpusFormatError: JSON으로 해석할 수 없는 줄
        """
        path = self.resolve(path)
        if not path.exists():
            raise FileNotFoundError(f"파일을 찾을 수 없습니다: {path}")
        records = []
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    records.append((line_number, json.loads(line)))
                except json.JSONDecodeError as e:
                    raise CorpusFormatError(path, line_number, f"JSON 파싱 실패: {e.msg}") from e
        return records

    def write_json(self, path: Union[str, Path], data: Union[BaseModel, Mapping[str, Any], Sequence[Any]]) -> Path:
        """pydantic 모델 또는 dict를 JSON으로 저장 (indent 2)"""
        path = self.resolve(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, BaseModel):
            text = data.model_dump_json(indent=2)
        else:
            text = json.dumps(data, ensure_ascii=False, indent=2)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text + "\n")
        return path

    def read_json(self, path: Union[str, Path]) -> Any:
        path = self.resolve(path)
        if not path.exists():
            raise FileNotFoundError(f"파일을 찾을 수 없습니다: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def write_csv(self, path: Union[str, Path], columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        """',' 구분자, '.' 소수점 CSV 저장"""
        path = self.resolve(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _format_cell(row.get(c)) for c in columns})
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(buffer.getvalue())
        return path

    def read_csv(self, path: Union[str, Path]) -> List[Dict[str, str]]:
        path = self.resolve(path)
        with open(path, "r", encoding="utf-8", newline="") as f:
            return list(csv.DictReader(f))


def _format_cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def save_corpus(
    corpus: CorpusSplit,
    path: Union[str, Path],
    manifest: Optional[Mapping[str, Any]] = None,
    lexicon: Optional[Lexicon] = None,
) -> Dict[str, str]:
    """코퍼스 디렉토리 저장 (FileHandler 단축 함수)"""
    path = Path(path)
    return FileHandler(path.parent).save_corpus(corpus, path.name, manifest=manifest, lexicon=lexicon)


def load_corpus(path: Union[str, Path]) -> CorpusSplit:
    """코퍼스 디렉토리 로드 (FileHandler 단축 함수)"""
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"코퍼스 디렉토리를 찾을 수 없습니다: {path}")
    return FileHandler(path.parent).load_corpus(path.name)

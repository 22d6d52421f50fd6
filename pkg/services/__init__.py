"""
서비스 모듈

코퍼스와 리포트 파일 처리 서비스를 제공합니다.
"""

from .file_handler import CorpusFormatError, FileHandler, load_corpus, save_corpus

__all__ = [
    "CorpusFormatError",
    "FileHandler",
    "load_corpus",
    "save_corpus",
]

"""Glue from a loaded corpus to fingerprints: roles, segmentation, typing, term repetitions."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .ingest import infer_roles, segment_sentences
from .labels import Lexicons, SchemaMapping, TypedCorpus, apply_labels
from .model import Corpus, Fingerprint
from .textprep import PreprocessConfig, build_vocabulary, fingerprint, normalize


@dataclass(frozen=True)
class TypingSource:
    labels: Optional[Mapping[tuple[str, int], str]] = None
    mapping: Optional[SchemaMapping] = None
    fallback: bool = True
    lexicons: Optional[Lexicons] = None
    digest_parts: tuple[str, ...] = field(default=("rules",))

    def digest(self) -> str:
        return hashlib.sha256("\0".join(self.digest_parts).encode()).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_digest(preprocess: PreprocessConfig, typing: TypingSource, segment: bool = True) -> str:
    h = hashlib.sha256()
    for part in (preprocess.digest(), typing.digest(), f"segment={segment}"):
        h.update(part.encode())
        h.update(b"\0")
    return h.hexdigest()


def prepare(corpus: Corpus, segment: bool = True) -> Corpus:
    """Infer missing roles and split utterances into sentences."""
    corpus = corpus.map(infer_roles)
    return corpus.map(segment_sentences) if segment else corpus


def fingerprint_corpus(corpus: Corpus, preprocess: Optional[PreprocessConfig] = None,
                       typing: Optional[TypingSource] = None) -> tuple[list[Fingerprint], TypedCorpus]:
    """Fingerprint an already prepared corpus."""
    preprocess = preprocess or PreprocessConfig()
    typing = typing or TypingSource()
    typed = apply_labels(corpus, typing.labels, typing.fallback, typing.mapping, typing.lexicons)
    fps = [fingerprint(d, typed.types[d.id], preprocess) for d in corpus.dialogues]
    return fps, typed


def vocabularies(corpus: Corpus, preprocess: Optional[PreprocessConfig] = None) -> list[list[str]]:
    return [build_vocabulary([normalize(u.text, preprocess) for u in d.utterances])
            for d in corpus.dialogues]

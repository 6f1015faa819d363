"""Term extraction, dialogue vocabularies and fingerprint construction."""

from __future__ import annotations

import functools
import hashlib
import json
import os
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import snowballstemmer

from .model import ConvoshapeError, Dialogue, Fingerprint, FingerprintRow, UtteranceType

STEMMERS = ("english-snowball", "none")
STOPWORDS_ENV = "CONVOSHAPE_STOPWORDS"

# A term set keeps first-occurrence order so vocabulary order is well defined.
TermSet = tuple[str, ...]


class LengthMismatchError(ConvoshapeError):
    pass


def read_wordlist(path) -> list[str]:
    """One entry per line; blank lines and '#' comments are ignored."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line)
    return words


def default_stopwords_path() -> Path:
    override = os.environ.get(STOPWORDS_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("convoshape") / "data" / "stopwords-en.txt"))


@functools.lru_cache(maxsize=16)
def _load_stopwords(path: str, mtime: float) -> frozenset[str]:
    return frozenset(read_wordlist(path))


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: Optional[str] = None  # path; None means the bundled list
    stemmer: str = "english-snowball"
    lowercase: bool = True
    strip_punctuation: bool = True
    use_stopwords: bool = True

    def __post_init__(self):
        if self.stemmer not in STEMMERS:
            raise ValueError(f"unknown stemmer {self.stemmer!r}")

    @property
    def stopwords_path(self) -> Path:
        return Path(self.stopwords) if self.stopwords else default_stopwords_path()

    def stopword_set(self) -> frozenset[str]:
        if not self.use_stopwords:
            return frozenset()
        path = self.stopwords_path
        return _load_stopwords(str(path), path.stat().st_mtime)

    def digest(self) -> str:
        """Hash of every setting that influences term sets, stopword contents included."""
        h = hashlib.sha256()
        h.update(json.dumps({"stemmer": self.stemmer, "lowercase": self.lowercase,
                             "strip_punctuation": self.strip_punctuation,
                             "use_stopwords": self.use_stopwords}, sort_keys=True).encode())
        h.update(b"\0")
        h.update("\n".join(sorted(self.stopword_set())).encode("utf-8"))
        return h.hexdigest()


@functools.lru_cache(maxsize=2)
def _stemmer(name: str):
    return snowballstemmer.stemmer("english") if name == "english-snowball" else None


def strip_punctuation(text: str) -> str:
    return "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))


def normalize(text: str, config: Optional[PreprocessConfig] = None) -> TermSet:
    """punctuation removal -> whitespace split -> lowercase -> stopwords -> stem -> dedupe"""
    config = config or PreprocessConfig()
    if config.strip_punctuation:
        text = strip_punctuation(text)
    tokens = text.split()
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    stop = config.stopword_set()
    tokens = [t for t in tokens if t not in stop]
    stem = _stemmer(config.stemmer)
    if stem is not None:
        tokens = stem.stemWords(tokens)
    return tuple(dict.fromkeys(tokens))


def build_vocabulary(term_sets: Sequence[Sequence[str]]) -> list[str]:
    """Terms found in at least two distinct utterances, in first-appearance order."""
    seen_in: dict[str, int] = {}
    for terms in term_sets:
        for term in set(terms):
            seen_in[term] = seen_in.get(term, 0) + 1
    order = dict.fromkeys(t for terms in term_sets for t in terms)
    return [t for t in order if seen_in[t] >= 2]


def build_repetition_matrix(term_sets: Sequence[Sequence[str]], vocabulary: Sequence[str]) -> list[list[int]]:
    return [[1 if w in set(terms) else 0 for w in vocabulary] for terms in term_sets]


def char_length(text: str) -> int:
    # str length counts code points, i.e. Unicode scalar values
    return len(text.strip())


def fingerprint(dialogue: Dialogue, types: Sequence[UtteranceType],
                config: Optional[PreprocessConfig] = None) -> Fingerprint:
    """Build the fingerprint of a sentence-segmented, role-annotated dialogue."""
    utts = dialogue.utterances
    if len(types) != len(utts):
        raise LengthMismatchError(
            f"dialogue {dialogue.id!r}: {len(types)} types for {len(utts)} utterances")
    missing = [u.index for u in utts if u.role is None]
    if missing:
        raise ConvoshapeError(f"dialogue {dialogue.id!r}: no role for utterances {missing}")
    term_sets = [normalize(u.text, config) for u in utts]
    vocabulary = build_vocabulary(term_sets)
    matrix = build_repetition_matrix(term_sets, vocabulary)
    rows = tuple(
        FingerprintRow(u.role, t, char_length(u.text), tuple(flags))
        for u, t, flags in zip(utts, types, matrix)
    )
    return Fingerprint(dialogue.id, rows, len(vocabulary))

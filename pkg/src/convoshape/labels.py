"""Utterance typing: rule-based classifier, external label files, schema mappings, evaluation."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .model import ConvoshapeError, Corpus, ParseError, Role, SchemaError, UtteranceType
from .textprep import read_wordlist

QRFA = ("Q", "R", "F", "A")
_QRFA_TO_TYPE = {"Q": UtteranceType.INITIATIVE, "R": UtteranceType.INITIATIVE,
                 "F": UtteranceType.NON_INITIATIVE, "A": UtteranceType.NON_INITIATIVE}

SHORT_SENTENCE_TOKENS = 5
_DISCOURSE_MARKERS = ("ok", "okay", "so", "and", "but", "well", "oh", "um", "uh", "alright", "now", "then")
_PRONOUNS = ("i", "you", "we", "he", "she", "it", "they", "there", "that", "this", "u", "ya")


class LabelError(ConvoshapeError):
    pass


def _data_path(*parts: str) -> Path:
    base = resources.files("convoshape") / "data"
    for part in parts:
        base = base / part
    return Path(str(base))


def _words(text: str) -> list[str]:
    text = text.lower().replace("’", "'").replace("‘", "'")
    return re.findall(r"[a-z0-9']+", text)


@dataclass(frozen=True)
class Lexicons:
    greetings: tuple[str, ...]
    farewells: tuple[str, ...]
    needs: tuple[str, ...]
    request_verbs: frozenset[str]
    wh_words: frozenset[str]
    auxiliaries: frozenset[str]

    @classmethod
    def load(cls, directory=None) -> "Lexicons":
        """Read lexicon files from ``directory``, falling back to the bundled ones per file."""
        def get(name):
            if directory is not None and (Path(directory) / name).exists():
                return read_wordlist(Path(directory) / name)
            return read_wordlist(_data_path("lexicons", name))

        return cls(
            greetings=tuple(" ".join(_words(p)) for p in get("greetings.txt")),
            farewells=tuple(" ".join(_words(p)) for p in get("farewells.txt")),
            needs=tuple(" ".join(_words(p)) for p in get("needs.txt")),
            request_verbs=frozenset(get("request_verbs.txt")),
            wh_words=frozenset(get("wh_words.txt")),
            auxiliaries=frozenset(get("auxiliaries.txt")),
        )


_DEFAULT_LEXICONS: Optional[Lexicons] = None


def default_lexicons() -> Lexicons:
    global _DEFAULT_LEXICONS
    if _DEFAULT_LEXICONS is None:
        _DEFAULT_LEXICONS = Lexicons.load()
    return _DEFAULT_LEXICONS


def _contains(haystack: str, phrase: str) -> bool:
    return f" {phrase} " in f" {haystack} "


def _clauses(text: str) -> list[list[str]]:
    return [w for w in (_words(c) for c in re.split(r"[,;:—–]|\s-\s", text)) if w]


def _is_question_clause(words: list[str], lex: Lexicons) -> bool:
    while words and words[0] in _DISCOURSE_MARKERS:
        words = words[1:]
    if len(words) < 2:
        return False
    first, second = words[0], words[1]
    if first in lex.auxiliaries and second in _PRONOUNS:
        return True
    if first in lex.wh_words and second in lex.auxiliaries:
        return True
    # contracted forms such as "what's", "where're"
    head, _, tail = first.partition("'")
    return head in lex.wh_words and tail in ("s", "re", "ll", "d")


def classify_rule_based(text: str, lexicons: Optional[Lexicons] = None) -> UtteranceType:
    """Type a single sentence.

    A trailing '?' always means Initiative; otherwise precedence is
    Hi > Bye > Initiative > NonInitiative.
    """
    lex = lexicons or default_lexicons()
    if text.rstrip().endswith("?"):
        return UtteranceType.INITIATIVE
    words = _words(text)
    joined = " ".join(words)
    short = len(words) <= SHORT_SENTENCE_TOKENS

    if short and words and any(joined == g or joined.startswith(g + " ") for g in lex.greetings):
        return UtteranceType.HI
    if short and words and any(_contains(joined, f) for f in lex.farewells):
        return UtteranceType.BYE

    if any(_is_question_clause(c, lex) for c in _clauses(text)):
        return UtteranceType.INITIATIVE
    for i, w in enumerate(words[:-1]):
        if w == "please" and words[i + 1] in lex.request_verbs:
            return UtteranceType.INITIATIVE
    if any(_contains(joined, n) for n in lex.needs):
        return UtteranceType.INITIATIVE
    return UtteranceType.NON_INITIATIVE


# External labels ----------------------------------------------------------------

LabelKey = tuple[str, int]


def read_label_file(path) -> dict[LabelKey, str]:
    """JSON Lines records ``{"dialogue_id", "utterance_index", "label"}``."""
    labels: dict[LabelKey, str] = {}
    source = str(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, lineno, source) from exc
            for name in ("dialogue_id", "utterance_index", "label"):
                if name not in obj:
                    raise SchemaError(name, lineno, source)
            key = (str(obj["dialogue_id"]), int(obj["utterance_index"]))
            if key in labels:
                raise ParseError(f"duplicate label for {key}", lineno, source)
            labels[key] = str(obj["label"])
    return labels


def label_to_type(label: str) -> UtteranceType:
    key = label.strip()
    if key.upper() in _QRFA_TO_TYPE:
        return _QRFA_TO_TYPE[key.upper()]
    try:
        return UtteranceType.parse(key)
    except ValueError:
        raise LabelError(f"cannot interpret label {label!r} as an utterance type") from None


@dataclass
class TypedCorpus:
    """Per-dialogue utterance types plus where each label came from ('external' or 'rules')."""

    types: dict[str, list[UtteranceType]]
    provenance: dict[str, list[str]]

    def counts(self) -> Counter:
        return Counter(p for prov in self.provenance.values() for p in prov)


def apply_labels(corpus: Corpus, labels: Optional[Mapping[LabelKey, str]] = None,
                 fallback: bool = True, mapping: Optional["SchemaMapping"] = None,
                 lexicons: Optional[Lexicons] = None) -> TypedCorpus:
    labels = dict(labels or {})
    ids = {d.id: len(d.utterances) for d in corpus.dialogues}
    for did, idx in labels:
        if did not in ids:
            raise LabelError(f"label refers to unknown dialogue_id {did!r}")
        if not 0 <= idx < ids[did]:
            raise LabelError(f"label index {idx} out of range for dialogue {did!r}")
    if mapping is not None:
        mapped = mapping.apply(labels.values())
        labels = dict(zip(labels.keys(), mapped))

    types: dict[str, list[UtteranceType]] = {}
    provenance: dict[str, list[str]] = {}
    for d in corpus.dialogues:
        ts, ps = [], []
        for u in d.utterances:
            label = labels.get((d.id, u.index))
            if label is not None:
                ts.append(label_to_type(label))
                ps.append("external")
            elif fallback:
                ts.append(classify_rule_based(u.text, lexicons))
                ps.append("rules")
            else:
                raise LabelError(f"no label for dialogue {d.id!r} utterance {u.index}")
        types[d.id] = ts
        provenance[d.id] = ps
    return TypedCorpus(types, provenance)


# Schema mapping -------------------------------------------------------------------

BUNDLED_MAPPINGS = ("msdialog_intent", "scsdata")


@dataclass(frozen=True)
class SchemaMapping:
    table: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "SchemaMapping":
        table: dict[str, str] = {}
        for foreign, target in pairs:
            target = target.strip()
            _validate_target(target, foreign)
            if foreign in table and table[foreign] != target:
                raise LabelError(f"label {foreign!r} maps to both {table[foreign]!r} and {target!r}")
            table[foreign] = target
        return cls(table)

    @classmethod
    def load(cls, path) -> "SchemaMapping":
        """Two-column TSV ``foreign_label<TAB>target``; '#' lines are comments."""
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n").rstrip("\r")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                if "\t" not in line:
                    raise ParseError("expected 'foreign_label<TAB>target'", lineno, str(path))
                foreign, target = line.split("\t", 1)
                pairs.append((foreign.strip(), target))
        return cls.from_pairs(pairs)

    @classmethod
    def bundled(cls, name: str) -> "SchemaMapping":
        if name not in BUNDLED_MAPPINGS:
            raise LabelError(f"no bundled mapping {name!r}; available: {', '.join(BUNDLED_MAPPINGS)}")
        return cls.load(_data_path("mappings", f"{name}.tsv"))

    def apply(self, labels: Iterable[str]) -> list[str]:
        return map_schema(labels, self)


def _validate_target(target: str, foreign: str) -> None:
    if target.upper() in QRFA:
        return
    try:
        UtteranceType.parse(target)
    except ValueError:
        raise LabelError(f"mapping target {target!r} for {foreign!r} is neither QRFA nor a type") from None


def map_schema(labels: Iterable[str], mapping: SchemaMapping) -> list[str]:
    labels = list(labels)
    unmapped = sorted({lab for lab in labels if lab not in mapping.table})
    if unmapped:
        raise LabelError("unmapped labels: " + ", ".join(repr(u) for u in unmapped))
    return [mapping.table[lab] for lab in labels]


def qrfa_role(label: str) -> Role:
    return Role.SEEKER if label.upper() in ("Q", "F") else Role.ASSISTANT


# Evaluation ---------------------------------------------------------------------

@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class TypingReport:
    classes: tuple[str, ...]
    per_class: Mapping[str, ClassScores]
    macro_f1: float
    micro_f1: float
    confusion: tuple[tuple[int, ...], ...]  # rows = gold, columns = predicted

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "per_class": {c: vars(s) for c, s in self.per_class.items()},
            "macro_f1": self.macro_f1,
            "micro_f1": self.micro_f1,
            "confusion": [list(r) for r in self.confusion],
        }


def _label_str(x: Union[str, UtteranceType]) -> str:
    return x.value if isinstance(x, UtteranceType) else str(x)


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


def evaluate(predicted: Sequence, gold: Sequence) -> TypingReport:
    if len(predicted) != len(gold):
        raise LabelError(f"length mismatch: {len(predicted)} predicted vs {len(gold)} gold")
    pred = [_label_str(p) for p in predicted]
    true = [_label_str(g) for g in gold]
    classes = tuple(sorted(set(pred) | set(true)))
    pos = {c: i for i, c in enumerate(classes)}
    conf = [[0] * len(classes) for _ in classes]
    for p, t in zip(pred, true):
        conf[pos[t]][pos[p]] += 1

    per_class = {}
    for c, i in pos.items():
        tp = conf[i][i]
        predicted_c = sum(row[i] for row in conf)
        gold_c = sum(conf[i])
        p = tp / predicted_c if predicted_c else 0.0
        r = tp / gold_c if gold_c else 0.0
        per_class[c] = ClassScores(p, r, _f1(p, r), gold_c)

    total = len(true)
    tp_all = sum(conf[i][i] for i in range(len(classes)))
    # single-label multiclass: micro precision == micro recall == accuracy
    micro = tp_all / total if total else 0.0
    macro = sum(s.f1 for s in per_class.values()) / len(per_class) if per_class else 0.0
    return TypingReport(classes, per_class, macro, micro, tuple(tuple(r) for r in conf))

"""Core domain types: roles, utterance types, dialogues, corpora and fingerprints."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional


class ConvoshapeError(Exception):
    """Base class for all errors raised by convoshape."""


class ParseError(ConvoshapeError):
    def __init__(self, message: str, position: Optional[int] = None, source: str = ""):
        self.position = position
        self.source = source
        where = f"{source}:{position}: " if position is not None else (f"{source}: " if source else "")
        super().__init__(where + message)


class SchemaError(ConvoshapeError):
    def __init__(self, field_name: str, position: Optional[int] = None, source: str = ""):
        self.field = field_name
        self.position = position
        loc = f" (record {position})" if position is not None else ""
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}missing or invalid field '{field_name}'{loc}")


class MultiPartyError(ConvoshapeError):
    pass


class Role(enum.Enum):
    SEEKER = "S"
    ASSISTANT = "A"

    @property
    def other(self) -> "Role":
        return Role.ASSISTANT if self is Role.SEEKER else Role.SEEKER

    @classmethod
    def parse(cls, value: str) -> "Role":
        key = value.strip().lower()
        if key in ("s", "seeker"):
            return cls.SEEKER
        if key in ("a", "assistant"):
            return cls.ASSISTANT
        raise ValueError(f"unknown role {value!r}")


class UtteranceType(enum.Enum):
    HI = "H"
    INITIATIVE = "I"
    NON_INITIATIVE = "N"
    BYE = "B"

    @classmethod
    def parse(cls, value: str) -> "UtteranceType":
        key = value.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        for member in cls:
            if key in (member.value.lower(), member.name.lower().replace("_", "")):
                return member
        aliases = {"hello": cls.HI, "greeting": cls.HI, "noninitiatiave": cls.NON_INITIATIVE,
                   "farewell": cls.BYE, "goodbye": cls.BYE}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown utterance type {value!r}")


@dataclass(frozen=True)
class Utterance:
    index: int
    speaker_id: str
    text: str
    role: Optional[Role] = None

    @property
    def is_empty(self) -> bool:
        return not self.text.strip()


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[Utterance, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    @property
    def speakers(self) -> list[str]:
        """Distinct speaker ids in order of first appearance."""
        return list(dict.fromkeys(u.speaker_id for u in self.utterances))

    @property
    def fully_annotated(self) -> bool:
        return all(u.role is not None for u in self.utterances)

    def with_utterances(self, utterances: Iterable[Utterance]) -> "Dialogue":
        return Dialogue(self.id, tuple(utterances), dict(self.metadata))


@dataclass(frozen=True)
class Corpus:
    name: str
    dialogues: tuple[Dialogue, ...]
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.dialogues)

    def map(self, fn) -> "Corpus":
        return Corpus(self.name, tuple(fn(d) for d in self.dialogues), dict(self.provenance))


@dataclass(frozen=True)
class FingerprintRow:
    role: Role
    utype: UtteranceType
    length: int
    flags: tuple[int, ...] = ()

    def to_list(self) -> list:
        return [self.role.value, self.utype.value, self.length, list(self.flags)]

    @classmethod
    def from_list(cls, item: list) -> "FingerprintRow":
        role, utype, length, flags = item
        if any(f not in (0, 1) for f in flags):
            raise ValueError("repetition flags must be 0/1")
        return cls(Role(role), UtteranceType(utype), int(length), tuple(int(f) for f in flags))


@dataclass(frozen=True)
class Fingerprint:
    """Per-dialogue structural matrix: one (role, type, length, flags) row per utterance.

    Vocabulary terms are never stored, only the number of columns.
    """

    dialogue_id: str
    rows: tuple[FingerprintRow, ...]
    vocab_size: int

    def __post_init__(self):
        for row in self.rows:
            if len(row.flags) != self.vocab_size:
                raise ValueError(
                    f"fingerprint {self.dialogue_id!r}: row has {len(row.flags)} flags, "
                    f"expected {self.vocab_size}"
                )

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def roles(self) -> list[Role]:
        return [r.role for r in self.rows]

    @property
    def matrix(self) -> list[list[int]]:
        return [list(r.flags) for r in self.rows]

    def swap_roles(self) -> "Fingerprint":
        rows = tuple(FingerprintRow(r.role.other, r.utype, r.length, r.flags) for r in self.rows)
        return Fingerprint(self.dialogue_id, rows, self.vocab_size)

    def to_dict(self) -> dict[str, Any]:
        return {"dialogue_id": self.dialogue_id, "m": self.vocab_size,
                "rows": [r.to_list() for r in self.rows]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Fingerprint":
        rows = tuple(FingerprintRow.from_list(item) for item in data["rows"])
        return cls(str(data["dialogue_id"]), rows, int(data["m"]))


# Corpus serialization (full fidelity, unlike the canonical ingest format).

def corpus_to_dict(corpus: Corpus) -> dict[str, Any]:
    return {
        "name": corpus.name,
        "provenance": dict(corpus.provenance),
        "dialogues": [
            {
                "id": d.id,
                "metadata": dict(d.metadata),
                "utterances": [
                    {"index": u.index, "speaker": u.speaker_id, "text": u.text,
                     "role": u.role.value if u.role else None}
                    for u in d.utterances
                ],
            }
            for d in corpus.dialogues
        ],
    }


def corpus_from_dict(data: Mapping[str, Any]) -> Corpus:
    dialogues = []
    for d in data["dialogues"]:
        utts = tuple(
            Utterance(u["index"], u["speaker"], u["text"], Role(u["role"]) if u["role"] else None)
            for u in d["utterances"]
        )
        dialogues.append(Dialogue(d["id"], utts, dict(d.get("metadata", {}))))
    return Corpus(data["name"], tuple(dialogues), dict(data.get("provenance", {})))


@dataclass(frozen=True)
class Issue:
    kind: str
    dialogue_id: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.dialogue_id}: {self.kind}" + (f" ({self.detail})" if self.detail else "")


def validate_corpus(corpus: Corpus) -> list[Issue]:
    """Report structural problems without touching the corpus."""
    issues: list[Issue] = []
    seen: set[str] = set()
    for d in corpus.dialogues:
        if d.id in seen:
            issues.append(Issue("duplicate id", d.id))
        seen.add(d.id)
        if not d.utterances:
            issues.append(Issue("empty dialogue", d.id))
            continue
        speakers = d.speakers
        if len(speakers) > 2:
            issues.append(Issue("multi-party", d.id, f"{len(speakers)} speakers"))
        missing = [u.index for u in d.utterances if u.role is None]
        if missing:
            issues.append(Issue("missing roles", d.id, f"{len(missing)} utterances"))
        if [u.index for u in d.utterances] != list(range(len(d.utterances))):
            issues.append(Issue("non-consecutive indices", d.id))
        for u in d.utterances:
            if u.is_empty:
                issues.append(Issue("empty utterance", d.id, f"index {u.index}"))
    return issues

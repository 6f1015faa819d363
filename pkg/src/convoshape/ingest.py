"""Transcript adapters, role inference and sentence segmentation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional

from .model import (
    Corpus,
    Dialogue,
    MultiPartyError,
    ParseError,
    Role,
    SchemaError,
    Utterance,
    validate_corpus,
)

FORMATS = ("canonical", "two-column-chat", "forum-thread")

_DEFAULT_FIELDS = {
    "dialogue_id": "dialogue_id",
    "turns": "turns",
    "speaker": "speaker",
    "role": "role",
    "text": "text",
    "posts": "posts",
    "author": "author",
    "body": "body",
}

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class AdapterConfig:
    format: str = "canonical"
    fields: Mapping[str, str] = field(default_factory=dict)
    infer_roles: bool = False
    quote_prefix: str = ">"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; expected one of {', '.join(FORMATS)}")

    def field(self, name: str) -> str:
        return self.fields.get(name, _DEFAULT_FIELDS[name])


def load_corpus(path, config: Optional[AdapterConfig] = None, name: Optional[str] = None) -> Corpus:
    """Read a transcript file into a validated Corpus, preserving file order."""
    config = config or AdapterConfig()
    path = Path(path)
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", source=str(path)) from exc

    if config.format == "canonical":
        dialogues = list(_read_canonical(raw, config, str(path)))
    elif config.format == "two-column-chat":
        dialogues = list(_read_two_column(raw, str(path)))
    else:
        dialogues = list(_read_forum(raw, config, str(path)))

    corpus = Corpus(name or path.name.split(".")[0], tuple(dialogues),
                    {"source": path.name, "format": config.format})
    if config.infer_roles:
        corpus = corpus.map(infer_roles)

    fatal = [i for i in validate_corpus(corpus)
             if i.kind in ("duplicate id", "empty dialogue", "multi-party")]
    if fatal:
        first = fatal[0]
        if first.kind == "multi-party":
            raise MultiPartyError(f"{path}: {first}")
        raise ParseError(str(first), source=str(path))
    return corpus


def _json_lines(raw: str, source: str) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(raw.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, lineno, source) from exc
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", lineno, source)
        yield lineno, obj


def _read_canonical(raw: str, config: AdapterConfig, source: str) -> Iterator[Dialogue]:
    f = config.field
    for lineno, obj in _json_lines(raw, source):
        if not isinstance(obj.get(f("dialogue_id")), (str, int)):
            raise SchemaError(f("dialogue_id"), lineno, source)
        turns = obj.get(f("turns"))
        if not isinstance(turns, list) or not turns:
            raise SchemaError(f("turns"), lineno, source)
        utterances = []
        for idx, turn in enumerate(turns):
            if not isinstance(turn, dict):
                raise SchemaError(f("turns"), lineno, source)
            speaker = turn.get(f("speaker"))
            text = turn.get(f("text"))
            if not isinstance(speaker, (str, int)):
                raise SchemaError(f("speaker"), lineno, source)
            if not isinstance(text, str):
                raise SchemaError(f("text"), lineno, source)
            role = turn.get(f("role"))
            if role is not None:
                if role not in ("seeker", "assistant"):
                    raise SchemaError(f("role"), lineno, source)
                role = Role.parse(role)
            utterances.append(Utterance(idx, str(speaker), text, role))
        yield Dialogue(str(obj[f("dialogue_id")]), tuple(utterances), {"line": str(lineno)})


def _read_two_column(raw: str, source: str) -> Iterator[Dialogue]:
    block: list[Utterance] = []
    start = 1
    count = 0

    def flush():
        nonlocal count
        dialogue = Dialogue(f"{count}", tuple(block), {"line": str(start)})
        count += 1
        return dialogue

    for lineno, line in enumerate(raw.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            if block:
                yield flush()
                block = []
            continue
        if not block:
            start = lineno
        if "\t" not in line:
            raise ParseError("expected 'speaker<TAB>text'", lineno, source)
        speaker, text = line.split("\t", 1)
        if not speaker.strip():
            raise SchemaError("speaker", lineno, source)
        block.append(Utterance(len(block), speaker.strip(), text))
    if block:
        yield flush()


def _strip_quotes(body: str, prefix: str) -> str:
    if not prefix:
        return body
    kept = [ln for ln in body.split("\n") if not ln.lstrip().startswith(prefix)]
    return "\n".join(kept).strip()


def _read_forum(raw: str, config: AdapterConfig, source: str) -> Iterator[Dialogue]:
    f = config.field
    for lineno, obj in _json_lines(raw, source):
        posts = obj.get(f("posts"))
        if not isinstance(posts, list) or not posts:
            raise SchemaError(f("posts"), lineno, source)
        thread_id = obj.get(f("dialogue_id"), obj.get("thread_id", lineno))
        utterances = []
        for idx, post in enumerate(posts):
            if not isinstance(post, dict):
                raise SchemaError(f("posts"), lineno, source)
            author, body = post.get(f("author")), post.get(f("body"))
            if not isinstance(author, (str, int)):
                raise SchemaError(f("author"), lineno, source)
            if not isinstance(body, str):
                raise SchemaError(f("body"), lineno, source)
            utterances.append(Utterance(idx, str(author), _strip_quotes(body, config.quote_prefix)))
        yield Dialogue(str(thread_id), tuple(utterances), {"line": str(lineno)})


def infer_roles(dialogue: Dialogue) -> Dialogue:
    """Fill missing roles: the speaker who opens the dialogue is the Seeker.

    Existing annotations are kept; a speaker with an annotated utterance keeps
    that role for their unannotated ones.
    """
    speakers = dialogue.speakers
    if len(speakers) > 2:
        raise MultiPartyError(f"dialogue {dialogue.id!r} has {len(speakers)} speakers")
    if dialogue.fully_annotated:
        return dialogue

    known: dict[str, Role] = {}
    for u in dialogue.utterances:
        if u.role is not None:
            known.setdefault(u.speaker_id, u.role)
    assignment: dict[str, Role] = {}
    for pos, speaker in enumerate(speakers):
        if speaker in known:
            assignment[speaker] = known[speaker]
        elif pos == 0:
            other = known.get(speakers[1]) if len(speakers) > 1 else None
            assignment[speaker] = other.other if other else Role.SEEKER
        else:
            assignment[speaker] = assignment[speakers[0]].other

    return dialogue.with_utterances(
        u if u.role is not None else Utterance(u.index, u.speaker_id, u.text, assignment[u.speaker_id])
        for u in dialogue.utterances
    )


def split_sentences(text: str) -> list[str]:
    parts = [p.strip() for p in _SENTENCE_BOUNDARY.split(text.strip())]
    parts = [p for p in parts if p]
    return parts or [text.strip()]


def segment_sentences(dialogue: Dialogue) -> Dialogue:
    """Split every utterance at '.', '!' or '?' followed by whitespace."""
    out: list[Utterance] = []
    for u in dialogue.utterances:
        for sentence in split_sentences(u.text):
            out.append(Utterance(len(out), u.speaker_id, sentence, u.role))
    return dialogue.with_utterances(out)

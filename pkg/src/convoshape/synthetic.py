"""Synthetic corpora with known dialogue-flow shapes, for demos and tests."""

from __future__ import annotations

import json
import random
from typing import Iterable, Optional, Sequence

from .model import Corpus, Dialogue, Role, Utterance

_SEEKER, _ASSISTANT = "seeker-1", "assistant-1"

_TEXTS = {
    "Q": ("What year was album number {n} released?", "Who directed film {n}?",
          "Can you tell me where station {n} is located?", "How long does route {n} take?"),
    "A": ("It came out in {y}.", "That was produced by studio {n}.",
          "It sits near exit {n} of the highway.", "About {n} minutes on average."),
    "R": ("Which genre do you usually prefer?", "Do you want something newer than {y}?",
          "Would you like a cheaper option?", "Have you already tried version {n}?"),
    "F": ("I mostly enjoy comedies.", "Something recent sounds good.",
          "Yes that works for me.", "No I have not tried it yet."),
}


def corpus_from_patterns(name: str, patterns: Iterable[str], seed: int = 0) -> Corpus:
    """One dialogue per QRFA pattern string, one sentence per label, roles annotated."""
    rng = random.Random(seed)
    dialogues = []
    for i, pattern in enumerate(patterns):
        utts = []
        for j, label in enumerate(pattern):
            template = rng.choice(_TEXTS[label])
            text = template.format(n=rng.randint(1, 999), y=rng.randint(1950, 2020))
            seeker = label in "QF"
            utts.append(Utterance(j, _SEEKER if seeker else _ASSISTANT, text,
                                  Role.SEEKER if seeker else Role.ASSISTANT))
        dialogues.append(Dialogue(f"{name}-{i:04d}", tuple(utts)))
    return Corpus(name, tuple(dialogues), {"source": "synthetic"})


def quac_like(n: int = 200, min_pairs: int = 3, max_pairs: int = 10, seed: int = 7) -> Corpus:
    """Dialogues made only of Seeker-question / Assistant-answer pairs."""
    rng = random.Random(seed)
    patterns = ["QA" * rng.randint(min_pairs, max_pairs) for _ in range(n)]
    return corpus_from_patterns("quac-like", patterns, seed)


def support_planted(seed: int = 11) -> Corpus:
    """Largest label bigram FA = 100, with RF = 82 and QA = 56 (RF and QA opacities 0.82 / 0.56)."""
    patterns = ["QAFA"] * 56 + ["RF"] * 38 + ["RFA"] * 44
    return corpus_from_patterns("support-planted", patterns, seed)


def preference_elicitation(n: int = 30, seed: int = 3) -> Corpus:
    """Assistant asks all questions, Seeker answers."""
    rng = random.Random(seed)
    patterns = ["RF" * rng.randint(2, 5) + "A" for _ in range(n)]
    return corpus_from_patterns("preference", patterns, seed)


def chit_chat(n: int = 30, seed: int = 5) -> Corpus:
    """Both roles ask and answer equally often."""
    patterns = ["QAFRFA" if i % 2 == 0 else "RFAQAF" for i in range(n)]
    return corpus_from_patterns("chit-chat", patterns, seed)


KINDS = {"quac": quac_like, "support": support_planted,
         "preference": preference_elicitation, "chit-chat": chit_chat}


def to_canonical_jsonl(corpus: Corpus) -> str:
    lines = []
    for d in corpus.dialogues:
        turns = [{"speaker": u.speaker_id,
                  "role": None if u.role is None else ("seeker" if u.role is Role.SEEKER else "assistant"),
                  "text": u.text} for u in d.utterances]
        lines.append(json.dumps({"dialogue_id": d.id, "turns": turns}, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def mirror(corpus: Corpus, suffix: str = "-mirror") -> Corpus:
    """Swap the two roles in every dialogue."""
    dialogues = [
        Dialogue(d.id + suffix, tuple(Utterance(u.index, u.speaker_id, u.text,
                                                None if u.role is None else u.role.other)
                                      for u in d.utterances), dict(d.metadata))
        for d in corpus.dialogues
    ]
    return Corpus(corpus.name, tuple(dialogues), dict(corpus.provenance))

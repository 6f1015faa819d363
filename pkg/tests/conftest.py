from pathlib import Path

import pytest

from convoshape.ingest import AdapterConfig, load_corpus
from convoshape.model import UtteranceType
from convoshape.pipeline import prepare

DATA = Path(__file__).parent / "data"

H, I, N = UtteranceType.HI, UtteranceType.INITIATIVE, UtteranceType.NON_INITIATIVE
WORKED_TYPES = [H, I, N, I, I, N, N, N, N]
WORKED_ROLES = "AASAAASAA"
WORKED_LENGTHS = [4, 41, 42, 30, 56, 30, 44, 41, 32]
WORKED_FLAGS = [[0, 0], [1, 0], [0, 0], [1, 0], [0, 0], [0, 0], [0, 1], [0, 0], [0, 1]]
WORKED_TERMS = [
    {"hey"}, {"watch", "movi"}, {"romanc", "drama", "indi"}, {"favorit", "movi"},
    {"genr", "stay", "88487", "104253"}, set(), {"181097", "kid", "horror"},
    {"miseri", "creepi"}, {"horror"},
]

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0])):
        terminalreporter.write_line(f"criterion {key}: {_ACCEPTANCE[key]}")


@pytest.fixture
def redial_dialogue():
    corpus = load_corpus(DATA / "redial_snippet.jsonl", AdapterConfig())
    return prepare(corpus).dialogues[0]


@pytest.fixture
def redial_fingerprint(redial_dialogue):
    from convoshape.textprep import fingerprint
    return fingerprint(redial_dialogue, WORKED_TYPES)

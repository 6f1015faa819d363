"""Hypothesis strategies shared by the property suites."""

from hypothesis import strategies as st

from convoshape.model import Dialogue, Fingerprint, FingerprintRow, Role, Utterance, UtteranceType
from convoshape.textprep import PreprocessConfig, build_repetition_matrix, build_vocabulary

TERMS = [f"t{k}" for k in range(8)]
RAW = PreprocessConfig(stemmer="none", use_stopwords=False)

roles = st.sampled_from(list(Role))
utypes = st.sampled_from(list(UtteranceType))
# a row draws as (role, type, length, term bitmask)
_row = st.tuples(roles, utypes, st.integers(0, 120), st.integers(0, 255))


@st.composite
def fingerprints(draw, max_rows=10):
    drawn = draw(st.lists(_row, min_size=1, max_size=max_rows))
    term_sets = [tuple(t for k, t in enumerate(TERMS) if mask >> k & 1) for *_, mask in drawn]
    vocab = build_vocabulary(term_sets)
    matrix = build_repetition_matrix(term_sets, vocab)
    rows = tuple(FingerprintRow(r, t, length, tuple(flags))
                 for (r, t, length, _), flags in zip(drawn, matrix))
    return Fingerprint("fp", rows, len(vocab))


corpora = st.lists(fingerprints(), min_size=1, max_size=6)


@st.composite
def token_dialogues(draw):
    """(dialogue, token lists) with ≤10 utterances over ≤8 distinct terms."""
    n = draw(st.integers(1, 10))
    tokens = [draw(st.lists(st.sampled_from(TERMS), max_size=5)) for _ in range(n)]
    rs = [draw(roles) for _ in range(n)]
    utts = tuple(Utterance(i, r.value, " ".join(toks), r) for i, (toks, r) in enumerate(zip(tokens, rs)))
    return Dialogue("tok", utts), tokens


label_sequences = st.lists(
    st.lists(st.sampled_from("QRFA"), max_size=12).map("".join), min_size=1, max_size=8)

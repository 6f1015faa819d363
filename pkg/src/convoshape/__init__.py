"""Dialogue fingerprinting, dialogue-flow mining and initiative asymmetry metrics."""

from .model import (
    ConvoshapeError,
    Corpus,
    Dialogue,
    Fingerprint,
    FingerprintRow,
    Role,
    Utterance,
    UtteranceType,
    validate_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "ConvoshapeError",
    "Corpus",
    "Dialogue",
    "Fingerprint",
    "FingerprintRow",
    "Role",
    "Utterance",
    "UtteranceType",
    "validate_corpus",
]

"""Initiative asymmetry metrics (Volume, Direction, Information, Repetition) and dataset comparison."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .model import ConvoshapeError, Fingerprint, Role, UtteranceType

METRICS = ("volume", "direction", "information", "repetition")
DISPLAY = {"volume": "ΔVolume", "direction": "ΔDirection",
           "information": "ΔInformation", "repetition": "ΔRepetition"}
ZERO_POLICIES = ("contribute-zero", "exclude")
DISTANCES = ("euclidean", "cosine")


class DimensionError(ConvoshapeError):
    pass


def _role_mask(fp: Fingerprint, role: Role) -> np.ndarray:
    return np.array([r.role is role for r in fp.rows], dtype=bool)


def _flags(fp: Fingerprint) -> np.ndarray:
    return np.array([r.flags for r in fp.rows], dtype=np.int8).reshape(fp.n, fp.vocab_size)


def volume(fp: Fingerprint, role: Role) -> float:
    """Characters spoken by ``role`` per fingerprint row (all rows count in the divisor)."""
    if not fp.n:
        return 0.0
    return sum(r.length for r in fp.rows if r.role is role) / fp.n


def direction(fp: Fingerprint, role: Role) -> float:
    if not fp.n:
        return 0.0
    return sum(1 for r in fp.rows if r.role is role and r.utype is UtteranceType.INITIATIVE) / fp.n


def information_count(fp: Fingerprint, role: Role) -> int:
    """Number of vocabulary columns whose first 1 sits in a row of ``role``."""
    if not fp.n or not fp.vocab_size:
        return 0
    m = _flags(fp)
    present = m.any(axis=0)
    first = m.argmax(axis=0)
    mask = _role_mask(fp, role)
    return int(np.count_nonzero(present & mask[first]))


def repetition_count(fp: Fingerprint, role: Role) -> int:
    """1-entries in ``role`` rows whose term already occurred in an earlier row of the other role."""
    if not fp.n or not fp.vocab_size:
        return 0
    m = _flags(fp).astype(np.int64)
    mask = _role_mask(fp, role)
    other = m * (~mask)[:, None]
    before = np.cumsum(other, axis=0) - other  # exclusive prefix sums
    hits = (m == 1) & (before > 0) & mask[:, None]
    return int(np.count_nonzero(hits))


def information(fp: Fingerprint, role: Role) -> float:
    return information_count(fp, role) / fp.n if fp.n else 0.0


def repetition(fp: Fingerprint, role: Role) -> float:
    return repetition_count(fp, role) / fp.n if fp.n else 0.0


_METRIC_FNS = {"volume": volume, "direction": direction,
               "information": information, "repetition": repetition}


@dataclass(frozen=True)
class RoleMetrics:
    volume: float
    direction: float
    information: float
    repetition: float

    def get(self, metric: str) -> float:
        return getattr(self, metric)


def role_metrics(fp: Fingerprint) -> dict[Role, RoleMetrics]:
    return {role: RoleMetrics(*(_METRIC_FNS[m](fp, role) for m in METRICS)) for role in Role}


def _delta_term(a: float, s: float) -> Optional[float]:
    total = a + s
    if total == 0:
        return None
    return (a - s) / total


def _check_policy(zero_policy: str) -> None:
    if zero_policy not in ZERO_POLICIES:
        raise ValueError(f"zero policy must be one of {ZERO_POLICIES}")


def delta_terms(pairs: Iterable[tuple[float, float]], zero_policy: str = "contribute-zero") -> tuple[float, int, int]:
    """Return (delta, dialogues averaged over, dialogues with a nonzero denominator)."""
    _check_policy(zero_policy)
    pairs = list(pairs)
    if not pairs:
        raise ValueError("delta of an empty list")
    terms = [_delta_term(a, s) for a, s in pairs]
    used = [t for t in terms if t is not None]
    if zero_policy == "contribute-zero":
        values = [0.0 if t is None else t for t in terms]
    else:
        values = used
    if not values:
        return 0.0, 0, 0
    # fsum keeps the mean invariant under duplicating every dialogue
    return math.fsum(values) / len(values), len(values), len(used)


def delta(pairs: Iterable[tuple[float, float]], zero_policy: str = "contribute-zero") -> float:
    """Mean over dialogues of (assistant - seeker) / (assistant + seeker)."""
    return delta_terms(pairs, zero_policy)[0]


@dataclass(frozen=True)
class DatasetAsymmetry:
    name: str
    delta_volume: float
    delta_direction: float
    delta_information: float
    delta_repetition: float
    d: int
    d_used: Mapping[str, int] = field(default_factory=dict)

    @property
    def vector(self) -> tuple[float, float, float, float]:
        return (self.delta_volume, self.delta_direction, self.delta_information, self.delta_repetition)

    def to_dict(self) -> dict:
        return {"dataset": self.name, "delta_volume": self.delta_volume,
                "delta_direction": self.delta_direction, "delta_information": self.delta_information,
                "delta_repetition": self.delta_repetition, "d": self.d, "d_used": dict(self.d_used)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "DatasetAsymmetry":
        return cls(str(data["dataset"]), *(float(data[f"delta_{m}"]) for m in METRICS),
                   int(data["d"]), dict(data.get("d_used", {})))


def dataset_asymmetry(name: str, fingerprints: Iterable[Fingerprint],
                      zero_policy: str = "contribute-zero") -> DatasetAsymmetry:
    per_dialogue = [role_metrics(fp) for fp in fingerprints]
    if not per_dialogue:
        raise ConvoshapeError(f"corpus {name!r} has no dialogues")
    deltas, used = {}, {}
    for metric in METRICS:
        pairs = [(rm[Role.ASSISTANT].get(metric), rm[Role.SEEKER].get(metric)) for rm in per_dialogue]
        deltas[metric], _, used[metric] = delta_terms(pairs, zero_policy)
    return DatasetAsymmetry(name, *(deltas[m] for m in METRICS), len(per_dialogue), used)


@dataclass(frozen=True)
class DatasetEmbedding:
    name: str
    vector: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.vector) != 4 or not all(math.isfinite(v) for v in self.vector):
            raise ValueError(f"embedding {self.name!r} must be four finite numbers")

    def coord(self, metric: str) -> float:
        return self.vector[dimension_index(metric)]


def embed(name: str, fingerprints: Iterable[Fingerprint], zero_policy: str = "contribute-zero") -> DatasetEmbedding:
    return DatasetEmbedding(name, dataset_asymmetry(name, fingerprints, zero_policy).vector)


def dimension_index(name: str) -> int:
    key = name.lower().removeprefix("delta_").removeprefix("δ")
    if key not in METRICS:
        raise DimensionError(f"unknown dimension {name!r}; valid names: {', '.join(METRICS)}")
    return METRICS.index(key)


@dataclass
class Comparison:
    names: list[str]
    distance: str
    matrix: list[list[Optional[float]]]
    neighbors: dict[str, list[tuple[str, float]]]
    undefined: list[tuple[str, str]]

    def to_dict(self) -> dict:
        return {"distance": self.distance, "names": self.names, "matrix": self.matrix,
                "neighbors": {k: [[n, d] for n, d in v] for k, v in self.neighbors.items()},
                "undefined_pairs": [list(p) for p in self.undefined]}


def _pair_distance(u: np.ndarray, v: np.ndarray, kind: str) -> Optional[float]:
    if kind == "euclidean":
        return float(np.linalg.norm(u - v))
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return None
    return float(max(0.0, 1.0 - float(u @ v) / (nu * nv)))


def compare(embeddings: Sequence[DatasetEmbedding], distance: str = "euclidean") -> Comparison:
    if distance not in DISTANCES:
        raise ValueError(f"distance must be one of {DISTANCES}")
    if len(embeddings) < 2:
        raise ConvoshapeError("need ≥ 2 datasets to compare")
    names = [e.name for e in embeddings]
    vecs = [np.asarray(e.vector, dtype=float) for e in embeddings]
    k = len(vecs)
    matrix: list[list[Optional[float]]] = [[0.0] * k for _ in range(k)]
    undefined = []
    for i in range(k):
        for j in range(i + 1, k):
            dist = _pair_distance(vecs[i], vecs[j], distance)
            if dist is None:
                undefined.append((names[i], names[j]))
            matrix[i][j] = matrix[j][i] = dist
    neighbors = {}
    for i, name in enumerate(names):
        ranked = [(names[j], matrix[i][j]) for j in range(k) if j != i and matrix[i][j] is not None]
        ranked.sort(key=lambda item: (item[1], item[0]))
        neighbors[name] = ranked
    return Comparison(names, distance, matrix, neighbors, undefined)


def table_csv(rows: Sequence[DatasetAsymmetry]) -> str:
    """Table of Δ metrics, one row per dataset, ordered by ΔDirection descending."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", *(f"delta_{m}" for m in METRICS), "d"])
    for row in sorted(rows, key=lambda r: (-r.delta_direction, r.name)):
        writer.writerow([row.name, *(f"{v:.6f}" for v in row.vector), row.d])
    return buf.getvalue()


def scatter_csv(embeddings: Sequence[DatasetEmbedding], x: str, y: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "x", "y"])
    for e in embeddings:
        writer.writerow([e.name, f"{e.coord(x):.6f}", f"{e.coord(y):.6f}"])
    return buf.getvalue()

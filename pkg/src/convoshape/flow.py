"""QRFA sequences, turn collapsing, n-gram counts, diagram opacities and dataset classes."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .model import ConvoshapeError, Fingerprint, Role, UtteranceType

LABEL_ORDER = ("Q", "R", "F", "A")
START, END = "start", "end"
DEFAULT_EPSILON = 0.05
UNIGRAM_BASES = ("turn", "utterance")


class QrfaLabel(enum.Enum):
    Q = "Q"
    R = "R"
    F = "F"
    A = "A"

    @property
    def role(self) -> Role:
        return Role.SEEKER if self in (QrfaLabel.Q, QrfaLabel.F) else Role.ASSISTANT

    @property
    def initiative(self) -> bool:
        return self in (QrfaLabel.Q, QrfaLabel.R)

    @classmethod
    def of(cls, role: Role, initiative: bool) -> "QrfaLabel":
        if role is Role.SEEKER:
            return cls.Q if initiative else cls.F
        return cls.R if initiative else cls.A


class DatasetClass(enum.Enum):
    SEARCH = "search"
    SUPPORT = "support"
    SHARING = "sharing"


class NoAnalyzableTurns(ConvoshapeError):
    pass


def to_qrfa(fp: Fingerprint) -> list[Optional[QrfaLabel]]:
    """Map each row to a QRFA label; greetings and farewells map to None."""
    out: list[Optional[QrfaLabel]] = []
    for row in fp.rows:
        if row.utype is UtteranceType.INITIATIVE:
            out.append(QrfaLabel.of(row.role, True))
        elif row.utype is UtteranceType.NON_INITIATIVE:
            out.append(QrfaLabel.of(row.role, False))
        else:
            out.append(None)
    return out


def collapse_turns(roles: Sequence[Role], labels: Sequence[Optional[QrfaLabel]]) -> list[QrfaLabel]:
    """One label per turn: Q/R if any utterance in the turn carries initiative, else F/A.

    Turns are runs of the same role over all rows (greetings included). Turns
    holding only greetings/farewells disappear, and neighbours left adjacent
    with the same role are merged so the result always alternates roles.
    """
    if len(roles) != len(labels):
        raise ValueError("roles and labels must be aligned")
    turns: list[tuple[Role, Optional[bool]]] = []
    for role, label in zip(roles, labels):
        if not turns or turns[-1][0] is not role:
            turns.append((role, None))
        if label is not None:
            current = turns[-1][1]
            turns[-1] = (role, bool(current) or label.initiative)

    merged: list[tuple[Role, bool]] = []
    for role, initiative in turns:
        if initiative is None:
            continue
        if merged and merged[-1][0] is role:
            merged[-1] = (role, merged[-1][1] or initiative)
        else:
            merged.append((role, initiative))
    return [QrfaLabel.of(role, initiative) for role, initiative in merged]


def dialogue_sequence(fp: Fingerprint) -> list[QrfaLabel]:
    return collapse_turns(fp.roles, to_qrfa(fp))


def _key(label) -> str:
    return label.value if isinstance(label, QrfaLabel) else str(label)


@dataclass
class FlowStats:
    """Unigram and bigram counts; bigram keys look like 'QA', '<Q' and 'A>'."""

    d: int = 0
    unigrams: Counter = field(default_factory=Counter)
    bigrams: Counter = field(default_factory=Counter)
    skipped: int = 0

    def merge(self, other: "FlowStats") -> "FlowStats":
        return FlowStats(self.d + other.d, self.unigrams + other.unigrams,
                         self.bigrams + other.bigrams, self.skipped + other.skipped)

    __add__ = merge

    def __eq__(self, other) -> bool:
        if not isinstance(other, FlowStats):
            return NotImplemented
        return (self.d, +self.unigrams, +self.bigrams, self.skipped) == \
               (other.d, +other.unigrams, +other.bigrams, other.skipped)

    def label_bigrams(self) -> dict[str, int]:
        return {k: v for k, v in self.bigrams.items() if v and "<" not in k and ">" not in k}

    def to_dict(self) -> dict:
        return {"d": self.d, "skipped": self.skipped,
                "unigrams": {k: self.unigrams.get(k, 0) for k in LABEL_ORDER},
                "bigrams": dict(sorted((k, v) for k, v in self.bigrams.items() if v))}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FlowStats":
        return cls(int(data["d"]), Counter(data["unigrams"]), Counter(data["bigrams"]),
                   int(data.get("skipped", 0)))


def count_flow(sequences: Iterable[Sequence], unigram_sequences: Optional[Iterable[Sequence]] = None) -> FlowStats:
    """Count unigrams and bigrams (with '<' start and '>' end markers) over turn sequences.

    ``unigram_sequences`` replaces the basis for unigram counts (for instance
    per-utterance labels); bigrams always come from ``sequences``.
    """
    stats = FlowStats()
    for seq in sequences:
        labels = [_key(x) for x in seq]
        if not labels:
            stats.skipped += 1
            continue
        stats.d += 1
        if unigram_sequences is None:
            stats.unigrams.update(labels)
        padded = ["<", *labels, ">"]
        stats.bigrams.update(a + b for a, b in zip(padded, padded[1:]))
    if unigram_sequences is not None:
        for seq in unigram_sequences:
            stats.unigrams.update(_key(x) for x in seq if x is not None)
    return stats


def flow_stats(fingerprints: Iterable[Fingerprint], unigram_basis: str = "turn") -> FlowStats:
    if unigram_basis not in UNIGRAM_BASES:
        raise ValueError(f"unigram basis must be one of {UNIGRAM_BASES}")
    fps = list(fingerprints)
    seqs = [dialogue_sequence(fp) for fp in fps]
    if unigram_basis == "turn":
        return count_flow(seqs)
    utter = [[x for x in to_qrfa(fp) if x is not None] for fp, s in zip(fps, seqs) if s]
    return count_flow(seqs, utter)


@dataclass(frozen=True)
class DiagramSpec:
    boxes: Mapping[str, float]
    arrows: Mapping[tuple[str, str], float]

    def to_dict(self) -> dict:
        return {"boxes": dict(self.boxes),
                "arrows": {f"{a}->{b}": v for (a, b), v in sorted(self.arrows.items())}}


def to_diagram(stats: FlowStats) -> DiagramSpec:
    total = sum(stats.unigrams.get(k, 0) for k in LABEL_ORDER)
    if stats.d < 1 or total == 0:
        raise NoAnalyzableTurns("no analyzable turns")
    boxes = {k: 100.0 * stats.unigrams.get(k, 0) / total for k in LABEL_ORDER}
    inner = stats.label_bigrams()
    peak = max(inner.values(), default=0)
    arrows: dict[tuple[str, str], float] = {}
    for key, count in stats.bigrams.items():
        if not count:
            continue
        a, b = key[0], key[1]
        if a == "<":
            arrows[(START, b)] = min(100.0, 100.0 * count / stats.d)
        elif b == ">":
            arrows[(a, END)] = min(100.0, 100.0 * count / stats.d)
        else:
            arrows[(a, b)] = 100.0 * count / peak
    return DiagramSpec(boxes, dict(sorted(arrows.items())))


@dataclass(frozen=True)
class Verdict:
    label: DatasetClass
    qa: float
    rf: float
    relative_gap: float
    epsilon: float


def criterion_values(stats: FlowStats) -> tuple[float, float]:
    """QA and RF bigram counts on the arrow scale (divided by the largest label bigram)."""
    peak = max(stats.label_bigrams().values(), default=0)
    if not peak:
        return 0.0, 0.0
    return stats.bigrams.get("QA", 0) / peak, stats.bigrams.get("RF", 0) / peak


def classify(stats: FlowStats, epsilon: float = DEFAULT_EPSILON) -> Verdict:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    qa, rf = criterion_values(stats)
    gap = abs(qa - rf) / (qa + rf) if qa + rf else 0.0
    if gap <= epsilon:
        label = DatasetClass.SHARING
    elif qa > rf:
        label = DatasetClass.SEARCH
    else:
        label = DatasetClass.SUPPORT
    return Verdict(label, qa, rf, gap, epsilon)


def classify_dataset(stats: FlowStats, epsilon: float = DEFAULT_EPSILON) -> DatasetClass:
    return classify(stats, epsilon).label


def alpha_hex(percent: float) -> str:
    return f"{int(math.floor(255 * percent / 100.0 + 0.5)):02X}"


_BOX_COLOURS = {"Q": "#1F77B4", "F": "#1F77B4", "R": "#D62728", "A": "#D62728"}
_EDGE_COLOUR = "#000000"


def emit_dot(spec: DiagramSpec, name: str = "flow") -> str:
    lines = [f'digraph "{name}" {{', "  rankdir=LR;",
             '  start [shape=circle, label="", style=filled, fillcolor="#000000FF"];',
             '  end [shape=doublecircle, label="", style=filled, fillcolor="#000000FF"];']
    for label in LABEL_ORDER:
        pct = spec.boxes.get(label, 0.0)
        colour = _BOX_COLOURS[label] + alpha_hex(pct)
        lines.append(f'  {label} [shape=box, style="rounded,filled", fillcolor="{colour}", '
                     f'label="{label}\\n{pct:.1f}%"];')
    for (a, b), pct in sorted(spec.arrows.items()):
        colour = _EDGE_COLOUR + alpha_hex(pct)
        lines.append(f'  {a} -> {b} [color="{colour}", label="{pct:.0f}%"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# Fixed layout: Seeker labels on the top row, Assistant labels on the bottom row.
_POS = {START: (60, 150), "Q": (200, 70), "F": (380, 70), "R": (200, 230), "A": (380, 230), END: (520, 150)}


def _edge_points(a: str, b: str, bend: float) -> tuple[float, float, float, float, float, float]:
    (x1, y1), (x2, y2) = _POS[a], _POS[b]
    dx, dy = x2 - x1, y2 - y1
    length = math.hypot(dx, dy) or 1.0
    ux, uy = dx / length, dy / length
    shrink = 34.0
    sx, sy = x1 + ux * shrink, y1 + uy * shrink
    ex, ey = x2 - ux * shrink, y2 - uy * shrink
    cx, cy = (sx + ex) / 2 - uy * bend, (sy + ey) / 2 + ux * bend
    return sx, sy, cx, cy, ex, ey


def emit_svg(spec: DiagramSpec, title: str = "") -> str:
    """Render the diagram with a fixed node layout; no layout engine involved."""
    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="580" height="300" viewBox="0 0 580 300" '
           'font-family="sans-serif" font-size="13">',
           '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" '
           'markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>']
    if title:
        out.append(f'<text x="10" y="18" font-weight="bold">{_xml(title)}</text>')
    for (a, b), pct in sorted(spec.arrows.items()):
        if a == b:
            x, y = _POS[a]
            out.append(f'<path d="M {x - 12} {y - 22} C {x - 30} {y - 70}, {x + 30} {y - 70}, {x + 12} {y - 22}" '
                       f'fill="none" stroke="#000" stroke-opacity="{pct / 100:.3f}" stroke-width="2" '
                       f'marker-end="url(#arrow)"/>')
            continue
        bend = 18.0 if (b, a) in spec.arrows else 0.0
        sx, sy, cx, cy, ex, ey = _edge_points(a, b, bend)
        out.append(f'<path d="M {sx:.1f} {sy:.1f} Q {cx:.1f} {cy:.1f} {ex:.1f} {ey:.1f}" fill="none" '
                   f'stroke="#000" stroke-opacity="{pct / 100:.3f}" stroke-width="2" marker-end="url(#arrow)">'
                   f'<title>{a}-&gt;{b} {pct:.1f}%</title></path>')
    for node in (START, END):
        x, y = _POS[node]
        out.append(f'<circle cx="{x}" cy="{y}" r="16" fill="#000"/>')
    for label in LABEL_ORDER:
        x, y = _POS[label]
        pct = spec.boxes.get(label, 0.0)
        out.append(f'<rect x="{x - 34}" y="{y - 22}" width="68" height="44" rx="10" '
                   f'fill="{_BOX_COLOURS[label]}" fill-opacity="{pct / 100:.3f}" stroke="#333"/>')
        out.append(f'<text x="{x}" y="{y + 5}" text-anchor="middle">{label} {pct:.0f}%</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _xml(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def flow_summary(name: str, stats: FlowStats, spec: DiagramSpec, verdict: Verdict) -> dict:
    return {
        "corpus": name,
        "d": stats.d,
        "skipped": stats.skipped,
        "unigrams": stats.to_dict()["unigrams"],
        "bigrams": stats.to_dict()["bigrams"],
        "opacities": spec.to_dict(),
        "class": verdict.label.value,
        "criterion": {"qa": verdict.qa, "rf": verdict.rf,
                      "relative_gap": verdict.relative_gap, "epsilon": verdict.epsilon},
    }

"""Self-contained HTML report assembled from flow, asymmetry and comparison outputs."""

from __future__ import annotations

import datetime as _dt
import html
import json
from pathlib import Path
from typing import Optional

from .asymmetry import DISPLAY, METRICS, DatasetAsymmetry
from .model import ConvoshapeError


class MissingInputs(ConvoshapeError):
    def __init__(self, missing: list[str]):
        self.missing = missing
        super().__init__("missing report inputs: " + ", ".join(missing))


def _strip_xml_prolog(svg: str) -> str:
    start = svg.find("<svg")
    return svg[start:] if start >= 0 else svg


def collect(out_dir) -> dict:
    out_dir = Path(out_dir)
    flows = sorted(out_dir.glob("*.flow.json"))
    missing: list[str] = []
    if not flows:
        missing.append("*.flow.json")
    corpora = []
    for path in flows:
        name = path.name[: -len(".flow.json")]
        svg = out_dir / f"{name}.flow.svg"
        asym = out_dir / f"{name}.asym.json"
        for p in (svg, asym):
            if not p.exists():
                missing.append(p.name)
        corpora.append(name)
    if missing:
        raise MissingInputs(missing)
    return {
        "corpora": corpora,
        "flows": {n: json.loads((out_dir / f"{n}.flow.json").read_text(encoding="utf-8")) for n in corpora},
        "flow_svgs": {n: (out_dir / f"{n}.flow.svg").read_text(encoding="utf-8") for n in corpora},
        "asym": {n: DatasetAsymmetry.from_dict(json.loads((out_dir / f"{n}.asym.json").read_text(encoding="utf-8")))
                 for n in corpora},
        "scatters": {p.stem: p.read_text(encoding="utf-8") for p in sorted(out_dir.glob("scatter_*.svg"))},
        "distances": (json.loads((out_dir / "distances.json").read_text(encoding="utf-8"))
                      if (out_dir / "distances.json").exists() else None),
    }


def render_html(data: dict, title: str = "Mixed-initiative report", timestamp: Optional[str] = None) -> str:
    esc = html.escape
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>{esc(title)}</title>",
        "<style>body{font-family:sans-serif;max-width:1100px;margin:2em auto;}"
        "table{border-collapse:collapse}td,th{border:1px solid #999;padding:4px 8px;text-align:right}"
        "th:first-child,td:first-child{text-align:left}.flow{display:inline-block;margin:1em}</style>",
        "</head><body>",
        f"<h1>{esc(title)}</h1>",
    ]
    if timestamp:
        parts.append(f"<p>Generated {esc(timestamp)}</p>")

    parts.append("<h2>Dialogue flow</h2>")
    for name in data["corpora"]:
        flow = data["flows"][name]
        crit = flow["criterion"]
        parts.append(f'<div class="flow" id="flow-{esc(name)}"><h3>{esc(name)}</h3>')
        parts.append(_strip_xml_prolog(data["flow_svgs"][name]))
        parts.append(
            f"<p>Class: <b>{esc(flow['class'])}</b> (QA = {crit['qa']:.3f}, RF = {crit['rf']:.3f}, "
            f"relative gap = {crit['relative_gap']:.3f}, ε = {crit['epsilon']:.3f}; d = {flow['d']})</p></div>")

    parts.append("<h2>Asymmetry</h2><table><tr><th>Dataset</th><th>Class</th>"
                 + "".join(f"<th>{DISPLAY[m]}</th>" for m in METRICS) + "<th>d</th></tr>")
    rows = sorted(data["asym"].values(), key=lambda a: (-a.delta_direction, a.name))
    for a in rows:
        cls = data["flows"][a.name]["class"]
        parts.append(f"<tr><td>{esc(a.name)}</td><td>{esc(cls)}</td>"
                     + "".join(f"<td>{v:.2f}</td>" for v in a.vector) + f"<td>{a.d}</td></tr>")
    parts.append("</table>")

    if data["scatters"]:
        parts.append("<h2>Embeddings</h2>")
        for stem, svg in data["scatters"].items():
            parts.append(f'<div id="{esc(stem)}">{_strip_xml_prolog(svg)}</div>')
    if data["distances"]:
        dist = data["distances"]
        parts.append(f"<h2>Nearest datasets ({esc(dist['distance'])})</h2><ul>")
        for name, ranked in dist["neighbors"].items():
            near = ", ".join(f"{esc(n)} ({d:.3f})" for n, d in ranked[:3])
            parts.append(f"<li>{esc(name)}: {near}</li>")
        parts.append("</ul>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


def build_report(out_dir, title: str = "Mixed-initiative report", timestamps: bool = True) -> str:
    stamp = _dt.datetime.now().isoformat(timespec="seconds") if timestamps else None
    return render_html(collect(out_dir), title, stamp)

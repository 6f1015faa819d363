import json
import re

import pytest

from convoshape.cli import main
from convoshape.model import Fingerprint

from conftest import DATA

THREE = str(DATA / "three.jsonl")
SNIPPET = str(DATA / "redial_snippet.jsonl")


def run(*argv):
    return main([str(a) for a in argv])


def cache_records(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return json.loads(lines[0]), [json.loads(ln) for ln in lines[1:]]


@pytest.fixture
def synth(tmp_path):
    """Write synthetic corpora in canonical format and return their paths by kind."""
    paths = {}
    for kind in ("quac", "preference", "chit-chat", "support"):
        p = tmp_path / "in" / f"{kind}.jsonl"
        p.parent.mkdir(exist_ok=True)
        assert run("synth", kind, p) == 0
        paths[kind] = p
    return paths


# -- fingerprint ---------------------------------------------------------------

def test_fingerprint_three_records(tmp_path, capsys):
    assert run("fingerprint", THREE, "--out", tmp_path) == 0
    header, records = cache_records(tmp_path / "three.fp.jsonl")
    assert header["format_version"] == 1 and len(header["config_digest"]) == 64
    assert [r["dialogue_id"] for r in records] == ["d1", "d2", "d3"]
    for r in records:
        assert Fingerprint.from_dict(r).n == len(r["rows"])
    out = capsys.readouterr().out.splitlines()
    assert out[0].split("\t")[:2] == ["corpus", "dialogues"]
    assert out[1].split("\t")[:2] == ["three", "3"]


def test_fingerprint_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("fingerprint", THREE, "--out", a) == 0
    assert run("fingerprint", THREE, "--out", b) == 0
    first = (a / "three.fp.jsonl").read_bytes()
    assert first == (b / "three.fp.jsonl").read_bytes()
    assert run("fingerprint", THREE, "--out", a, "--force") == 0
    assert (a / "three.fp.jsonl").read_bytes() == first


def test_changed_stopwords_force_regeneration(tmp_path, capsys):
    stop = tmp_path / "stop.txt"
    stop.write_text("the\na\n", encoding="utf-8")
    assert run("fingerprint", THREE, "--out", tmp_path, "--stopwords", stop) == 0
    digest1 = cache_records(tmp_path / "three.fp.jsonl")[0]["config_digest"]
    assert run("fingerprint", THREE, "--out", tmp_path, "--stopwords", stop) == 0
    assert "(reused)" in capsys.readouterr().out
    stop.write_text("the\na\ncheap\n", encoding="utf-8")
    assert run("fingerprint", THREE, "--out", tmp_path, "--stopwords", stop) == 0
    assert "(written)" in capsys.readouterr().out
    assert cache_records(tmp_path / "three.fp.jsonl")[0]["config_digest"] != digest1


def test_privacy_cache_has_no_text(tmp_path):
    assert run("fingerprint", THREE, SNIPPET, "--out", tmp_path) == 0
    blob = b"".join(p.read_bytes() for p in tmp_path.glob("*.fp.jsonl"))
    sentences = []
    for path in (THREE, SNIPPET):
        for line in open(path, encoding="utf-8"):
            for turn in json.loads(line)["turns"]:
                sentences += [s for s in re.split(r"(?<=[.!?])\s+", turn["text"]) if s]
    for s in sentences:
        assert s.encode("utf-8") not in blob
    for word in (b"hotel", b"museum", b"horror", b"movi"):
        assert word not in blob


def test_no_privacy_stores_vocabulary(tmp_path):
    assert run("fingerprint", SNIPPET, "--out", tmp_path, "--no-privacy") == 0
    _, records = cache_records(tmp_path / "redial_snippet.fp.jsonl")
    assert records[0]["vocab"] == ["movi", "horror"]


def test_fingerprint_two_column_and_forum(tmp_path, capsys):
    assert run("fingerprint", DATA / "chat.tsv", "--format", "two-column-chat", "--out", tmp_path) == 0
    assert run("fingerprint", DATA / "forum.jsonl", "--format", "forum-thread", "--out", tmp_path) == 0
    _, chat = cache_records(tmp_path / "chat.fp.jsonl")
    _, forum = cache_records(tmp_path / "forum.fp.jsonl")
    assert [r["dialogue_id"] for r in chat] == ["0", "1"]
    assert [r["dialogue_id"] for r in forum] == ["t1", "t2"]
    # first speaker becomes the Seeker
    assert chat[0]["rows"][0][0] == "S" and forum[0]["rows"][0][0] == "S"


def test_fingerprint_with_labels_and_mapping(tmp_path):
    labels = tmp_path / "labels.jsonl"
    labels.write_text("\n".join(json.dumps({"dialogue_id": "d2", "utterance_index": i, "label": lab})
                                for i, lab in enumerate(["Original Question", "Potential Answer"])) + "\n",
                      encoding="utf-8")
    assert run("fingerprint", THREE, "--out", tmp_path, "--labels", labels, "--mapping", "msdialog_intent") == 0
    _, records = cache_records(tmp_path / "three.fp.jsonl")
    assert [row[1] for row in records[1]["rows"]] == ["I", "N"]


def test_labels_without_fallback_fail(tmp_path, capsys):
    labels = tmp_path / "labels.jsonl"
    labels.write_text(json.dumps({"dialogue_id": "d2", "utterance_index": 0, "label": "I"}) + "\n",
                      encoding="utf-8")
    assert run("fingerprint", THREE, "--out", tmp_path, "--labels", labels, "--no-fallback") == 1
    assert "d1" in capsys.readouterr().err
    assert not list(tmp_path.glob("*.fp.jsonl"))


def test_multi_party_rejected(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"dialogue_id": "m", "turns": [
        {"speaker": s, "role": None, "text": "hi"} for s in "abc"]}) + "\n", encoding="utf-8")
    assert run("fingerprint", bad, "--out", tmp_path) == 1
    assert "m" in capsys.readouterr().err


def test_partial_outputs_removed_on_failure(tmp_path):
    bad = tmp_path / "zz.jsonl"
    bad.write_text('{"dialogue_id": "x", "turns": [{"speaker": "a"}]}\n', encoding="utf-8")
    out = tmp_path / "out"
    assert run("fingerprint", THREE, bad, "--out", out) == 1
    assert not (out / "three.fp.jsonl").exists()


# -- flow ----------------------------------------------------------------------

@pytest.mark.parametrize("kind, expected", [
    ("quac", "search"), ("preference", "support"), ("chit-chat", "sharing"), ("support", "support"),
])
def test_flow_classes(synth, tmp_path, capsys, kind, expected):
    out = tmp_path / "out"
    assert run("fingerprint", synth[kind], "--out", out) == 0
    assert run("flow", out / f"{kind}.fp.jsonl", "--out", out) == 0
    for ext in ("dot", "svg", "json"):
        assert (out / f"{kind}.flow.{ext}").exists()
    summary = json.loads((out / f"{kind}.flow.json").read_text(encoding="utf-8"))
    assert summary["class"] == expected
    assert capsys.readouterr().out.splitlines()[-1].split("\t")[2] == expected


def test_flow_unreadable_cache(tmp_path, capsys):
    bad = tmp_path / "bad.fp.jsonl"
    bad.write_text("not json\n", encoding="utf-8")
    assert run("flow", bad, "--out", tmp_path) == 1
    assert capsys.readouterr().err


def test_flow_epsilon_range(tmp_path):
    with pytest.raises(SystemExit):
        run("flow", "x.fp.jsonl", "--epsilon", "2")


# -- asymmetry -----------------------------------------------------------------

def test_asymmetry_worked_example(tmp_path):
    assert run("fingerprint", SNIPPET, "--out", tmp_path) == 0
    assert run("asymmetry", tmp_path / "redial_snippet.fp.jsonl", "--out", tmp_path) == 0
    data = json.loads((tmp_path / "redial_snippet.asym.json").read_text(encoding="utf-8"))
    # hand sum of the worked-example lengths: (234 - 86) / (234 + 86)
    assert data["delta_volume"] == pytest.approx(0.4625, abs=1e-9)
    assert (data["delta_direction"], data["delta_information"], data["delta_repetition"]) == (1.0, 0.0, 1.0)
    assert (tmp_path / "redial_snippet.asym.csv").read_text(encoding="utf-8").startswith("dataset,")


def test_asymmetry_two_corpora_ordered(synth, tmp_path):
    out = tmp_path / "out"
    assert run("fingerprint", synth["quac"], synth["preference"], "--out", out) == 0
    assert run("asymmetry", out / "quac.fp.jsonl", out / "preference.fp.jsonl", "--out", out) == 0
    rows = (out / "asymmetry.csv").read_text(encoding="utf-8").splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["preference", "quac"]
    directions = [float(r.split(",")[2]) for r in rows]
    assert directions == sorted(directions, reverse=True)


def test_asymmetry_empty_corpus(tmp_path, capsys):
    empty = tmp_path / "empty.fp.jsonl"
    empty.write_text(json.dumps({"config_digest": "0" * 64, "format_version": 1}) + "\n", encoding="utf-8")
    assert run("asymmetry", empty, "--out", tmp_path) == 1
    assert "empty" in capsys.readouterr().err
    assert not (tmp_path / "empty.asym.json").exists()


# -- compare -------------------------------------------------------------------

def _asym_files(synth, out, kinds):
    assert run("fingerprint", *[synth[k] for k in kinds], "--out", out) == 0
    assert run("asymmetry", *[out / f"{k}.fp.jsonl" for k in kinds], "--out", out) == 0
    return [out / f"{k}.asym.json" for k in kinds]


def test_compare_outputs(synth, tmp_path):
    out = tmp_path / "out"
    files = _asym_files(synth, out, ["quac", "preference", "chit-chat"])
    assert run("compare", *files, "--pair", "direction", "information", "--out", out) == 0
    svg = (out / "scatter_direction_information.svg").read_text(encoding="utf-8")
    assert "ΔDirection" in svg and "ΔInformation" in svg
    rows = (out / "scatter_direction_information.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "name,x,y" and len(rows) == 4
    dist = json.loads((out / "distances.json").read_text(encoding="utf-8"))
    assert dist["names"] == ["quac", "preference", "chit-chat"]


def test_compare_dimension_typo(synth, tmp_path, capsys):
    out = tmp_path / "out"
    files = _asym_files(synth, out, ["quac", "preference"])
    assert run("compare", *files, "--pair", "directoin", "information", "--out", out) == 1
    assert "volume, direction, information, repetition" in capsys.readouterr().err


def test_compare_needs_two(synth, tmp_path, capsys):
    out = tmp_path / "out"
    files = _asym_files(synth, out, ["quac"])
    assert run("compare", *files, "--out", out) == 1
    assert "need ≥ 2" in capsys.readouterr().err


def test_compare_identical_datasets(synth, tmp_path):
    out = tmp_path / "out"
    (f,) = _asym_files(synth, out, ["quac"])
    twin = out / "twin.asym.json"
    data = json.loads(f.read_text(encoding="utf-8"))
    data["dataset"] = "twin"
    twin.write_text(json.dumps(data), encoding="utf-8")
    assert run("compare", f, twin, "--out", out) == 0
    dist = json.loads((out / "distances.json").read_text(encoding="utf-8"))
    assert dist["matrix"] == [[0.0, 0.0], [0.0, 0.0]]


# -- report / run --------------------------------------------------------------

def test_run_and_report(synth, tmp_path):
    out = tmp_path / "out"
    inputs = [synth[k] for k in ("quac", "preference", "chit-chat")]
    assert run("run", *inputs, "--out", out, "--no-timestamps") == 0
    html1 = (out / "report.html").read_text(encoding="utf-8")
    assert html1.count('class="flow"') == 3
    for name in ("quac", "preference", "chit-chat"):
        assert html1.count(f'id="flow-{name}"') == 1
    # the support verdict shows the criterion values it rests on
    pref = json.loads((out / "preference.flow.json").read_text(encoding="utf-8"))
    assert pref["class"] == "support"
    assert f"QA = {pref['criterion']['qa']:.3f}, RF = {pref['criterion']['rf']:.3f}" in html1
    assert "scatter_direction_information" in html1 or "<svg" in html1
    assert run("report", "--out", out, "--no-timestamps") == 0
    assert (out / "report.html").read_text(encoding="utf-8") == html1


def test_report_has_timestamp_by_default(synth, tmp_path):
    out = tmp_path / "out"
    assert run("run", synth["quac"], "--out", out) == 0
    assert "Generated" in (out / "report.html").read_text(encoding="utf-8")


def test_report_missing_inputs(synth, tmp_path, capsys):
    out = tmp_path / "out"
    assert run("fingerprint", synth["quac"], "--out", out) == 0
    assert run("flow", out / "quac.fp.jsonl", "--out", out) == 0
    assert run("report", "--out", out) == 1
    assert "quac.asym.json" in capsys.readouterr().err
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run("report", "--out", empty) == 1
    assert "*.flow.json" in capsys.readouterr().err


def test_run_outputs_deterministic(synth, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    inputs = [synth["quac"], synth["chit-chat"]]
    assert run("run", *inputs, "--out", a, "--no-timestamps") == 0
    assert run("run", *inputs, "--out", b, "--no-timestamps") == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name

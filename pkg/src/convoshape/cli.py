"""Command-line interface: fingerprint, flow, asymmetry, compare, report, run, synth."""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .asymmetry import (
    DISTANCES,
    METRICS,
    ZERO_POLICIES,
    DatasetAsymmetry,
    DatasetEmbedding,
    compare,
    dataset_asymmetry,
    dimension_index,
    table_csv,
)
from .cache import CACHE_SUFFIX, atomic_write, corpus_name, is_current, read_cache, render_cache
from .flow import DEFAULT_EPSILON, UNIGRAM_BASES, classify, emit_dot, emit_svg, flow_stats, flow_summary, to_diagram
from .ingest import FORMATS, AdapterConfig, load_corpus, segment_sentences
from .labels import BUNDLED_MAPPINGS, Lexicons, SchemaMapping, read_label_file
from .model import ConvoshapeError
from .pipeline import TypingSource, file_digest, fingerprint_corpus, prepare, run_digest, vocabularies
from .textprep import STEMMERS, PreprocessConfig

logger = logging.getLogger("convoshape")


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=False) + "\n"


class Outputs:
    """Track files written by one command; remove them all if the command fails."""

    def __init__(self):
        self.written: list[Path] = []

    def write(self, path, text: str) -> Path:
        path = Path(path)
        atomic_write(path, text)
        self.written.append(path)
        return path

    @contextlib.contextmanager
    def transaction(self):
        try:
            yield self
        except BaseException:
            for p in self.written:
                with contextlib.suppress(OSError):
                    p.unlink()
            raise


def _epsilon(value: str) -> float:
    eps = float(value)
    if not 0.0 <= eps <= 1.0:
        raise argparse.ArgumentTypeError("epsilon must lie in [0, 1]")
    return eps


def _preprocess(args) -> PreprocessConfig:
    return PreprocessConfig(stopwords=args.stopwords, stemmer=args.stemmer,
                            use_stopwords=not args.no_stopwords)


def _typing_source(args) -> TypingSource:
    parts = ["rules"]
    mapping = None
    if args.mapping:
        if args.mapping in BUNDLED_MAPPINGS and not Path(args.mapping).exists():
            mapping = SchemaMapping.bundled(args.mapping)
            parts.append(f"mapping:{args.mapping}")
        else:
            mapping = SchemaMapping.load(args.mapping)
            parts.append(f"mapping:{file_digest(args.mapping)}")
    labels = None
    if args.labels:
        labels = read_label_file(args.labels)
        parts.append(f"labels:{file_digest(args.labels)}")
    lexicons = None
    if args.lexicons:
        lexicons = Lexicons.load(args.lexicons)
        parts.append(f"lexicons:{sorted(vars(lexicons).items())!r}")
    if args.no_fallback:
        parts.append("no-fallback")
    return TypingSource(labels, mapping, not args.no_fallback, lexicons, tuple(parts))


def cmd_fingerprint(args) -> int:
    preprocess = _preprocess(args)
    typing = _typing_source(args)
    digest = run_digest(preprocess, typing, segment=not args.no_segment)
    out_dir = Path(args.out)
    outputs = Outputs()
    print("corpus\tdialogues\tmean_n\tmean_m\tcache")
    with outputs.transaction():
        for path in args.inputs:
            adapter = AdapterConfig(format=args.format, infer_roles=False, quote_prefix=args.quote_prefix)
            corpus = load_corpus(path, adapter)
            target = out_dir / f"{corpus.name}{CACHE_SUFFIX}"
            if not args.force and args.privacy and is_current(target, digest):
                fps = read_cache(target, digest)
                status = "reused"
            else:
                if args.no_infer_roles:
                    prepared = corpus.map(segment_sentences) if not args.no_segment else corpus
                else:
                    prepared = prepare(corpus, segment=not args.no_segment)
                fps, typed = fingerprint_corpus(prepared, preprocess, typing)
                vocab = None if args.privacy else vocabularies(prepared, preprocess)
                outputs.write(target, render_cache(fps, digest, vocab))
                status = "written"
                logger.info("%s: %s", corpus.name, dict(typed.counts()))
            n = len(fps)
            mean_n = sum(fp.n for fp in fps) / n if n else 0.0
            mean_m = sum(fp.vocab_size for fp in fps) / n if n else 0.0
            print(f"{corpus.name}\t{n}\t{mean_n:.2f}\t{mean_m:.2f}\t{target} ({status})")
    return 0


def _load_caches(paths: Sequence[str]):
    out = []
    for path in paths:
        fps = read_cache(path)
        name = corpus_name(path)
        if not fps:
            raise ConvoshapeError(f"corpus {name!r} is empty: {path}")
        out.append((name, fps))
    return out


def cmd_flow(args) -> int:
    out_dir = Path(args.out)
    outputs = Outputs()
    print("corpus\td\tclass\tqa\trf\trelative_gap")
    with outputs.transaction():
        for name, fps in _load_caches(args.caches):
            stats = flow_stats(fps, args.unigram_basis)
            spec = to_diagram(stats)
            verdict = classify(stats, args.epsilon)
            outputs.write(out_dir / f"{name}.flow.dot", emit_dot(spec, name))
            outputs.write(out_dir / f"{name}.flow.svg", emit_svg(spec, name))
            outputs.write(out_dir / f"{name}.flow.json", _dump(flow_summary(name, stats, spec, verdict)))
            print(f"{name}\t{stats.d}\t{verdict.label.value}\t{verdict.qa:.4f}\t{verdict.rf:.4f}\t"
                  f"{verdict.relative_gap:.4f}")
    return 0


def cmd_asymmetry(args) -> int:
    out_dir = Path(args.out)
    outputs = Outputs()
    rows = []
    with outputs.transaction():
        for name, fps in _load_caches(args.caches):
            result = dataset_asymmetry(name, fps, args.delta_zero_policy)
            rows.append(result)
            outputs.write(out_dir / f"{name}.asym.json", _dump(result.to_dict()))
            outputs.write(out_dir / f"{name}.asym.csv", table_csv([result]))
        table = table_csv(rows)
        if len(rows) > 1:
            outputs.write(out_dir / "asymmetry.csv", table)
    sys.stdout.write(table)
    return 0


def _read_metrics(paths: Sequence[str]) -> list[DatasetAsymmetry]:
    out = []
    for path in paths:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            out.append(DatasetAsymmetry.from_dict(data))
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConvoshapeError(f"unreadable metrics file {path}: {exc}") from exc
    return out


def cmd_compare(args) -> int:
    from .plots import DEFAULT_PAIRS, emit_scatter

    pairs = [tuple(p) for p in args.pair] if args.pair else list(DEFAULT_PAIRS)
    for x, y in pairs:
        dimension_index(x)
        dimension_index(y)
    metrics = _read_metrics(args.metrics)
    if len(metrics) < 2:
        raise ConvoshapeError("need ≥ 2 metric files to compare")
    embeddings = [DatasetEmbedding(m.name, m.vector) for m in metrics]
    out_dir = Path(args.out)
    outputs = Outputs()
    with outputs.transaction():
        for x, y in pairs:
            xn, yn = METRICS[dimension_index(x)], METRICS[dimension_index(y)]
            svg, csv_text = emit_scatter(embeddings, xn, yn)
            outputs.write(out_dir / f"scatter_{xn}_{yn}.svg", svg)
            outputs.write(out_dir / f"scatter_{xn}_{yn}.csv", csv_text)
        result = compare(embeddings, args.distance)
        outputs.write(out_dir / "distances.json", _dump(result.to_dict()))
    print("dataset\tnearest\tdistance")
    for name, ranked in result.neighbors.items():
        near, dist = ranked[0] if ranked else ("-", float("nan"))
        print(f"{name}\t{near}\t{dist:.4f}")
    return 0


def cmd_report(args) -> int:
    from .report import build_report

    text = build_report(args.out, args.title, timestamps=not args.no_timestamps)
    target = Path(args.out) / "report.html"
    Outputs().write(target, text)
    print(target)
    return 0


def cmd_run(args) -> int:
    out = Path(args.out)
    cmd_fingerprint(args)
    caches = [str(out / f"{Path(p).name.split('.')[0]}{CACHE_SUFFIX}") for p in args.inputs]
    args.caches = caches
    cmd_flow(args)
    cmd_asymmetry(args)
    if len(caches) > 1:
        args.metrics = [str(out / f"{corpus_name(c)}.asym.json") for c in caches]
        cmd_compare(args)
    return cmd_report(args)


def cmd_synth(args) -> int:
    from .synthetic import KINDS, to_canonical_jsonl

    corpus = KINDS[args.kind](seed=args.seed) if args.seed is not None else KINDS[args.kind]()
    Outputs().write(args.output, to_canonical_jsonl(corpus))
    print(f"{args.output}\t{len(corpus)} dialogues")
    return 0


def _add_fingerprint_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="canonical", help="input file format")
    p.add_argument("--quote-prefix", default=">", help="forum-thread: drop body lines starting with this")
    p.add_argument("--stopwords", default=None,
                   help="stopword list file (default: bundled list, or $CONVOSHAPE_STOPWORDS)")
    p.add_argument("--no-stopwords", action="store_true", help="disable stopword removal")
    p.add_argument("--stemmer", choices=STEMMERS, default="english-snowball")
    p.add_argument("--labels", help="JSON Lines file with external utterance labels")
    p.add_argument("--mapping", help=f"TSV schema mapping for --labels, or one of {', '.join(BUNDLED_MAPPINGS)}")
    p.add_argument("--lexicons", help="directory overriding the rule-typer lexicon files")
    p.add_argument("--no-fallback", action="store_true", help="fail on unlabeled utterances instead of using rules")
    p.add_argument("--no-segment", action="store_true", help="input is already one sentence per utterance")
    p.add_argument("--no-infer-roles", action="store_true", help="require role annotations in the input")
    p.add_argument("--privacy", action=argparse.BooleanOptionalAction, default=True,
                   help="keep vocabulary terms out of cache files (default: on)")
    p.add_argument("--force", action="store_true", help="rebuild caches even when current")


def _add_flow_flags(p):
    p.add_argument("--epsilon", type=_epsilon, default=DEFAULT_EPSILON,
                   help="relative QA/RF gap at or below which a dataset is 'sharing'")
    p.add_argument("--unigram-basis", choices=UNIGRAM_BASES, default="turn")


def _add_asym_flags(p):
    p.add_argument("--delta-zero-policy", choices=ZERO_POLICIES, default="contribute-zero")


def _add_compare_flags(p):
    p.add_argument("--pair", nargs=2, action="append", metavar=("X", "Y"),
                   help=f"dimension pair to plot, repeatable; names: {', '.join(METRICS)}")
    p.add_argument("--distance", choices=DISTANCES, default="euclidean")


def _add_report_flags(p):
    p.add_argument("--no-timestamps", action="store_true")
    p.add_argument("--title", default="Mixed-initiative report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convoshape", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fingerprint", help="build fingerprint caches from transcripts")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", default="out")
    _add_fingerprint_flags(p)
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("flow", help="dialogue-flow diagrams and Search/Support/Sharing class")
    p.add_argument("caches", nargs="+")
    p.add_argument("--out", default="out")
    _add_flow_flags(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("asymmetry", help="Δ metrics per corpus")
    p.add_argument("caches", nargs="+")
    p.add_argument("--out", default="out")
    _add_asym_flags(p)
    p.set_defaults(func=cmd_asymmetry)

    p = sub.add_parser("compare", help="scatter plots and distances between corpora")
    p.add_argument("metrics", nargs="+", help="<corpus>.asym.json files")
    p.add_argument("--out", default="out")
    _add_compare_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="HTML report from outputs in --out")
    p.add_argument("--out", default="out")
    _add_report_flags(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="fingerprint, flow, asymmetry, compare and report in one go")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", default="out")
    _add_fingerprint_flags(p)
    _add_flow_flags(p)
    _add_asym_flags(p)
    _add_compare_flags(p)
    _add_report_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="write a synthetic corpus in canonical format")
    p.add_argument("kind", choices=["quac", "support", "preference", "chit-chat"])
    p.add_argument("output")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConvoshapeError, OSError, ValueError) as exc:
        print(f"convoshape: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

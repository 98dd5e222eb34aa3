"""Command-line entry point.

    ontodex build-index --ontology ont.json --corpus docs.jsonl --categories cats.json --index out.jsonl
    ontodex select-fragment --ontology ont.json --classes A --classes C
    ontodex rank --ontology ont.json --index out.jsonl --context ctx.json --method weight
    ontodex inspect --index out.jsonl [--doc-id ID]

Data goes to standard output, diagnostics to standard error.
"""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .corpus import Corpus, CorpusError, CsMaxMode, load_category_graph, load_corpus
from .indexer import IndexFormatError, IndexParams, build_index, load_index, round12, save_index
from .ontology import OntologyError, load_ontology, select_fragment
from .relevance import ContextError, Method, RankParams, RelevanceMode, load_context, rank_documents
from .text_metrics import StopWordList

FORMATS_HELP = """\
file formats (UTF-8):
  ontology    JSON {"classes":[{"name","description","attributes":[{"name","description"}]}],
                    "relations":[{"from","to","kind":"associative"|"taxonomical"|"hierarchical"}]}
  corpus      JSON Lines, one {"id","title","categories":[...],"text","metadata"?} per line
  categories  JSON {"categories":[...],"edges":[{"child","parent"}]}
  stopwords   plain text, one word per line (default: small built-in English list)
  synonyms    JSON {element name: [synonym, ...]}
  context     JSON {"classes":[...],"attributes":[{"class","name"}]?}
  index       JSON Lines: header {"format":"ontodex-index","version":1,...} then one record per line
"""


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    ontology: Optional[Path] = None
    corpus: Optional[Path] = None
    categories: Optional[Path] = None
    stopwords: Optional[Path] = None
    synonyms: Optional[Path] = None
    index: Optional[Path] = None
    context: Optional[Path] = None
    params: IndexParams = field(default_factory=IndexParams)
    rank: RankParams = field(default_factory=RankParams)
    fmt: str = "jsonl"
    workers: int = 1

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls()
        for name in ("ontology", "corpus", "categories", "stopwords", "synonyms", "index", "context"):
            value = getattr(args, name, None)
            setattr(cfg, name, Path(value) if value is not None else None)
        try:
            if hasattr(args, "k"):
                cfg.params = IndexParams(args.k, args.dmax, args.cs_max_mode)
            if hasattr(args, "method"):
                cfg.rank = RankParams(args.method, args.theta, args.lmax, args.relevance_mode, args.alpha)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        cfg.fmt = getattr(args, "format", "jsonl")
        cfg.workers = getattr(args, "workers", 1)
        return cfg

    def require(self, *names: str, exists: bool = True) -> None:
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise UsageError(f"--{name} is required")
            if exists and not path.exists():
                raise UsageError(f"--{name}: no such file: {path}")


def _num(x: float) -> float:
    return round12(x)


def _emit_jsonl(rows, out) -> None:
    for row in rows:
        out.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def _emit_table(header: Sequence[str], rows: List[Sequence], out) -> None:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _load_ontology(cfg: RunConfig):
    with open(cfg.ontology, "rb") as fh:
        return load_ontology(fh)


def cmd_build_index(cfg: RunConfig, out, err) -> int:
    cfg.require("ontology", "corpus")
    cfg.require("index", exists=False)
    for opt in ("categories", "stopwords", "synonyms"):
        if getattr(cfg, opt) is not None:
            cfg.require(opt)
    started = time.perf_counter()
    ont = _load_ontology(cfg)
    with open(cfg.corpus, "rb") as fh:
        docs = load_corpus(fh)
    graph = None
    if cfg.categories is not None:
        with open(cfg.categories, "rb") as fh:
            graph = load_category_graph(fh)
    stops = StopWordList.load(cfg.stopwords) if cfg.stopwords else None
    synonyms = None
    if cfg.synonyms:
        synonyms = json.loads(cfg.synonyms.read_text(encoding="utf-8"))
        if not isinstance(synonyms, dict) or not all(isinstance(v, list) for v in synonyms.values()):
            raise UsageError(f"{cfg.synonyms}: synonyms must map names to lists")
    corpus = Corpus.build(docs, graph)
    index = build_index(corpus, ont, cfg.params, stops, synonyms, workers=cfg.workers)
    save_index(index, cfg.index)

    report = index.report
    n_matches = sum(len(r.matches) for r in index.records)
    err.write(f"documents: {len(corpus)}  indexed: {len(index)}  failed: {len(report.errors)}\n")
    err.write(f"matches: {n_matches}  cs_max: {index.cs_max}  missing categories added: {report.missing_categories}\n")
    for doc_id, a, b in report.unreachable:
        err.write(f"warning: {doc_id}: no path between {a!r} and {b!r}\n")
    for doc_id, msg in report.errors:
        err.write(f"error: {doc_id}: {msg}\n")
    err.write(f"elapsed: {time.perf_counter() - started:.3f}s\n")
    return 1 if report.errors else 0


def cmd_select_fragment(cfg: RunConfig, classes: List[str], out, err) -> int:
    cfg.require("ontology")
    ont = _load_ontology(cfg)
    unknown = [c for c in classes if c not in ont]
    if unknown:
        raise UsageError(f"unknown class(es): {', '.join(repr(c) for c in unknown)}")
    if not classes:
        raise UsageError("at least one --classes is required")
    fragment, unreachable = select_fragment(ont, classes)
    for a, b in unreachable:
        err.write(f"warning: no path between {a!r} and {b!r}\n")
    out.write(json.dumps(fragment.to_json(), ensure_ascii=False, separators=(",", ":")) + "\n")
    return 0


def cmd_rank(cfg: RunConfig, out, err) -> int:
    cfg.require("ontology", "index", "context")
    ont = _load_ontology(cfg)
    index = load_index(cfg.index)
    if index.ontology_hash != ont.digest:
        err.write("warning: index was built against a different ontology\n")
    with open(cfg.context, "rb") as fh:
        ctx = load_context(fh, ont)
    results = rank_documents(index, ont, ctx, cfg.rank)
    if cfg.fmt == "table":
        _emit_table(
            ("rank", "doc_id", "s", "index_sim", "relevance"),
            [(i, r.doc_id, f"{r.s:.6f}", f"{r.index_sim:.6f}", f"{r.relevance:.6f}") for i, r in enumerate(results, 1)],
            out,
        )
    else:
        _emit_jsonl(({k: (_num(v) if isinstance(v, float) else v) for k, v in r.to_json().items()} for r in results), out)
    return 0


def cmd_inspect(cfg: RunConfig, doc_id: Optional[str], out, err) -> int:
    cfg.require("index")
    index = load_index(cfg.index)
    if doc_id is not None:
        try:
            rec = index.get(doc_id)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        out.write(f"doc_id: {rec.doc_id}\nsim: {rec.sim!r}\nd_sum: {rec.d_sum}\nmatches: {len(rec.matches)}\n")
        if rec.matches:
            _emit_table(
                ("element", "kind", "owner", "matched_name", "distance", "w", "kd"),
                [
                    (m.element.name, m.element.kind, m.element.owner or "-", m.matched_name, m.distance, repr(m.w), repr(m.kd))
                    for m in rec.matches
                ],
                out,
            )
        out.write(f"fragment classes: {', '.join(rec.fragment.sorted_classes()) or '-'}\n")
        for r in rec.fragment.sorted_relations():
            out.write(f"  {r.source} -[{r.kind.value}]- {r.target}\n")
        return 0

    p = index.params
    out.write(f"k: {p.k!r}\nd_max: {p.d_max}\ncs_max_mode: {p.cs_max_mode.value}\ncs_max: {index.cs_max}\n")
    out.write(f"ontology_hash: {index.ontology_hash}\ncorpus_hash: {index.corpus_hash}\n")
    out.write(f"records: {len(index)}\n")
    sims = sorted(r.sim for r in index.records)
    if sims:
        if len(sims) >= 2:
            q1, q2, q3 = statistics.quantiles(sims, n=4, method="inclusive")
        else:
            q1 = q2 = q3 = sims[0]
        out.write(
            "sim min/q1/median/q3/max: "
            + " ".join(f"{x:.6f}" for x in (sims[0], q1, q2, q3, sims[-1]))
            + "\n"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontodex",
        description="Index wiki-style documents against an ontology and rank them by relevance to a context.",
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_paths(p, *names):
        helps = {
            "ontology": "ontology JSON file",
            "corpus": "corpus JSON Lines file",
            "categories": "category graph JSON file (optional)",
            "stopwords": "stop-word list, one per line (optional)",
            "synonyms": "synonym table JSON (optional)",
            "index": "index JSON Lines file",
            "context": "abstract context JSON file",
        }
        for n in names:
            p.add_argument(f"--{n}", metavar="PATH", help=helps[n])

    b = sub.add_parser("build-index", help="index a corpus against an ontology", epilog=FORMATS_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    add_paths(b, "ontology", "corpus", "categories", "stopwords", "synonyms", "index")
    b.add_argument("--k", type=float, default=0.5, help="weight coefficient in [0,1] (default 0.5)")
    b.add_argument("--dmax", type=int, default=3, help="matches need Levenshtein distance < dmax (default 3)")
    b.add_argument("--cs-max-mode", choices=[m.value for m in CsMaxMode], default="global",
                   help="global: category count; local-max: largest candidate-name set (default global)")
    b.add_argument("--workers", type=int, default=1, help="indexing threads (default 1)")

    f = sub.add_parser("select-fragment", help="print the ontology fragment spanning the given classes")
    add_paths(f, "ontology")
    f.add_argument("--classes", action="append", default=[], metavar="NAME", help="seed class (repeatable)")

    r = sub.add_parser("rank", help="rank indexed documents against a context", epilog=FORMATS_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    add_paths(r, "ontology", "index", "context")
    r.add_argument("--method", choices=[m.value for m in Method], default="graph")
    r.add_argument("--theta", type=float, default=0.6, help="node-name similarity threshold (graph method)")
    r.add_argument("--lmax", type=int, default=2, help="max hops from the context (weight method)")
    r.add_argument("--relevance-mode", choices=[m.value for m in RelevanceMode], default="product")
    r.add_argument("--alpha", type=float, default=0.5, help="blend weight of s (blend mode)")
    r.add_argument("--format", choices=["jsonl", "table"], default="jsonl")

    i = sub.add_parser("inspect", help="summarize an index file or one of its records")
    add_paths(i, "index")
    i.add_argument("--doc-id", default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        if args.command == "build-index":
            return cmd_build_index(cfg, out, err)
        if args.command == "select-fragment":
            return cmd_select_fragment(cfg, args.classes, out, err)
        if args.command == "rank":
            return cmd_rank(cfg, out, err)
        return cmd_inspect(cfg, args.doc_id, out, err)
    except (UsageError, OntologyError, CorpusError, ContextError, IndexFormatError) as exc:
        err.write(f"ontodex {args.command}: error: {exc}\n")
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        err.write(f"ontodex {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

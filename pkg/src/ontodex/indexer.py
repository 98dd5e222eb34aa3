"""Topic-based indexing of documents against an ontology, and the index file
format."""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .corpus import CategoryGraph, Corpus, CsMaxMode, Document, candidate_names, cs_max as corpus_cs_max
from .ontology import Ontology, OntologyFragment, select_fragment
from .text_metrics import StopWordList, bounded_levenshtein, description_overlap, normalize, tokenize

log = logging.getLogger(__name__)

INDEX_FORMAT = "ontodex-index"
INDEX_VERSION = 1

CLASS = "class"
ATTRIBUTE = "attribute"


class IndexFormatError(ValueError):
    """Index file cannot be read back faithfully."""


def round12(x: float) -> float:
    """Round to 12 significant digits, the precision persisted in index files."""
    return float(f"{x:.12g}")


@dataclass(frozen=True)
class IndexParams:
    k: float = 0.5
    d_max: int = 3
    cs_max_mode: CsMaxMode = CsMaxMode.GLOBAL

    def __post_init__(self):
        if not (0.0 <= self.k <= 1.0) or math.isnan(self.k):
            raise ValueError(f"k must lie in [0, 1], got {self.k}")
        if isinstance(self.d_max, bool) or int(self.d_max) != self.d_max or self.d_max < 1:
            raise ValueError(f"d_max must be a positive integer, got {self.d_max}")
        object.__setattr__(self, "d_max", int(self.d_max))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "cs_max_mode", CsMaxMode(self.cs_max_mode))


@dataclass(frozen=True, order=True)
class ElementRef:
    """A class (owner == "") or an attribute of class ``owner``."""

    name: str
    kind: str = CLASS
    owner: str = ""

    @property
    def seed_class(self) -> str:
        return self.name if self.kind == CLASS else self.owner


@dataclass(frozen=True)
class OntologyElement:
    ref: ElementRef
    description: str = ""
    synonyms: Tuple[str, ...] = ()


def ontology_elements(ont: Ontology, synonyms: Optional[Mapping[str, Sequence[str]]] = None) -> List[OntologyElement]:
    """ONT: every class and attribute name, attributes qualified by owner."""
    syn = {normalize(k): tuple(sorted({normalize(s) for s in v} - {""})) for k, v in (synonyms or {}).items()}
    out = []
    for c in ont.classes.values():
        out.append(OntologyElement(ElementRef(c.name), c.description, syn.get(c.name, ())))
        for a in c.attributes:
            out.append(OntologyElement(ElementRef(a.name, ATTRIBUTE, c.name), a.description, syn.get(a.name, ())))
    return out


@dataclass(frozen=True)
class ElementMatch:
    element: ElementRef
    matched_name: str
    distance: int
    w: float = 0.0
    kd: float = 0.0

    def to_json(self) -> dict:
        obj = {
            "element": self.element.name,
            "kind": self.element.kind,
            "matched_name": self.matched_name,
            "distance": self.distance,
            "w": self.w,
            "kd": self.kd,
        }
        if self.element.kind == ATTRIBUTE:
            obj["owner"] = self.element.owner
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "ElementMatch":
        kind = obj["kind"]
        if kind not in (CLASS, ATTRIBUTE):
            raise ValueError(f"unknown element kind {kind!r}")
        ref = ElementRef(obj["element"], kind, obj["owner"] if kind == ATTRIBUTE else "")
        return cls(ref, obj["matched_name"], int(obj["distance"]), float(obj["w"]), float(obj["kd"]))


def match_name(c: str, elements: Sequence[OntologyElement], d_max: int) -> List[Tuple[ElementRef, int]]:
    """Elements within distance < ``d_max`` of one candidate name."""
    out = []
    for e in elements:
        best = None
        for name in (e.ref.name,) + e.synonyms:
            d = bounded_levenshtein(c, name, d_max if best is None else best)
            if d is not None:
                best = d
        if best is not None:
            out.append((e.ref, best))
    return out


def _sorted_matches(per_name) -> Tuple[List[Tuple[ElementRef, str, int]], int]:
    matches = [(ref, c, d) for c, hits in per_name for ref, d in hits]
    matches.sort(key=lambda m: (m[0].name, m[1], m[0].kind, m[0].owner))
    return matches, sum(m[2] for m in matches)


def match_elements(
    cs: Iterable[str],
    elements: Sequence[OntologyElement] | Ontology,
    d_max: int,
) -> Tuple[List[Tuple[ElementRef, str, int]], int]:
    """Every (candidate name, ontology element) pair closer than ``d_max``.

    One entry per pair, sorted by element name then matched name. An element
    with synonyms matches at the smallest distance over its name and synonyms.
    """
    if isinstance(elements, Ontology):
        elements = ontology_elements(elements)
    return _sorted_matches((c, match_name(c, elements, d_max)) for c in cs)


def compute_sim(n_pair: int, d_sum: int, p: IndexParams, cs_max: int, n_ont: int) -> float:
    """Document-to-ontology similarity of the topic-based indexing algorithm.

    sim = 1 - 1/2 * [(1-k) * n_pair / (cs_max * n_ont) + k * (1 - d_sum / (d_max * n_pair))],
    with sim = 1 when nothing matched.
    """
    if n_pair < 0 or d_sum < 0:
        raise ValueError("n_pair and d_sum must be non-negative")
    if cs_max < 1 or n_ont < 1:
        raise ValueError("cs_max and n_ont must be at least 1")
    if n_pair == 0:
        if d_sum != 0:
            raise ValueError("d_sum must be 0 when there are no pairs")
        return 1.0
    if n_pair > cs_max * n_ont:
        raise ValueError(f"n_pair={n_pair} exceeds cs_max*|ONT|={cs_max * n_ont}")
    if d_sum > p.d_max * n_pair:
        raise ValueError(f"d_sum={d_sum} exceeds d_max*n_pair={p.d_max * n_pair}")
    coverage = n_pair / (cs_max * n_ont)
    closeness = 1.0 - d_sum / (p.d_max * n_pair)
    return 1.0 - 0.5 * ((1.0 - p.k) * coverage + p.k * closeness)


class CorpusStats:
    """Token lists and document frequencies for corpus-relative weights."""

    def __init__(self, documents: Iterable[Document]):
        self._tokens = {d.id: tokenize(d.title) + tokenize(d.text) for d in documents}
        self.n_docs = len(self._tokens)
        self._df: Dict[Tuple[str, ...], int] = {}

    def tokens(self, doc_id: str) -> List[str]:
        return self._tokens[doc_id]

    def df(self, name: str) -> int:
        phrase = tuple(tokenize(name))
        if phrase not in self._df:
            self._df[phrase] = sum(1 for toks in self._tokens.values() if count_phrase(toks, phrase))
        return self._df[phrase]


def count_phrase(tokens: Sequence[str], phrase: Sequence[str]) -> int:
    n = len(phrase)
    if n == 0 or n > len(tokens):
        return 0
    if n == 1:
        return tokens.count(phrase[0])
    phrase = list(phrase)
    return sum(1 for i in range(len(tokens) - n + 1) if tokens[i : i + n] == phrase)


def element_weight(name: str, doc: Document, stats: CorpusStats) -> float:
    """tf-idf of the element name in the document's title and text.

    tf is phrase occurrences over total tokens; idf = ln(1 + N / df).
    """
    tokens = stats.tokens(doc.id)
    if not tokens:
        return 0.0
    occurrences = count_phrase(tokens, tokenize(name))
    if occurrences == 0:
        return 0.0
    tf = occurrences / len(tokens)
    return tf * math.log(1.0 + stats.n_docs / stats.df(name))


def element_overlap(element: OntologyElement, doc: Document, stats: CorpusStats, stops: StopWordList) -> float:
    """kd: description overlap with the text, or name presence if undescribed."""
    if element.description.strip():
        return description_overlap(element.description, doc.text, stops)
    return 1.0 if count_phrase(stats.tokens(doc.id), tokenize(element.ref.name)) else 0.0


@dataclass(frozen=True)
class IndexRecord:
    doc_id: str
    sim: float
    matches: Tuple[ElementMatch, ...] = ()
    fragment: OntologyFragment = OntologyFragment()

    @property
    def d_sum(self) -> int:
        return sum(m.distance for m in self.matches)

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "sim": self.sim,
            "matches": [m.to_json() for m in self.matches],
            "fragment": self.fragment.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IndexRecord":
        return cls(
            str(obj["doc_id"]),
            float(obj["sim"]),
            tuple(ElementMatch.from_json(m) for m in obj["matches"]),
            OntologyFragment.from_json(obj["fragment"]),
        )


@dataclass
class BuildReport:
    errors: List[Tuple[str, str]] = field(default_factory=list)
    unreachable: List[Tuple[str, str, str]] = field(default_factory=list)
    missing_categories: int = 0


@dataclass(frozen=True)
class Index:
    records: Tuple[IndexRecord, ...]
    params: IndexParams
    cs_max: int
    ontology_hash: str
    corpus_hash: str
    report: BuildReport = field(default_factory=BuildReport, compare=False, repr=False)

    def get(self, doc_id: str) -> IndexRecord:
        for r in self.records:
            if r.doc_id == doc_id:
                return r
        raise KeyError(f"no record for document {doc_id!r}")

    def __len__(self):
        return len(self.records)


class TopicIndexer:
    """Holds everything shared across documents of one indexing run."""

    def __init__(
        self,
        ont: Ontology,
        graph: CategoryGraph,
        params: IndexParams,
        cs_max: int,
        stats: CorpusStats,
        stops: Optional[StopWordList] = None,
        synonyms: Optional[Mapping[str, Sequence[str]]] = None,
    ):
        self.ont = ont
        self.graph = graph
        self.params = params
        self.cs_max = cs_max
        self.stats = stats
        self.stops = stops if stops is not None else StopWordList.default()
        self.elements = ontology_elements(ont, synonyms)
        self._by_ref = {e.ref: e for e in self.elements}
        # candidate names (mostly categories) recur across documents
        self._name_hits: Dict[str, List[Tuple[ElementRef, int]]] = {}

    def _hits(self, c: str) -> List[Tuple[ElementRef, int]]:
        hits = self._name_hits.get(c)
        if hits is None:
            hits = self._name_hits[c] = match_name(c, self.elements, self.params.d_max)
        return hits

    def index_document(self, doc: Document) -> Tuple[IndexRecord, List[Tuple[str, str]]]:
        """Index one document; also returns unreachable seed pairs of its fragment."""
        cs = candidate_names(doc, self.graph)
        raw, d_sum = _sorted_matches((c, self._hits(c)) for c in cs)
        assert all(d < self.params.d_max for _, _, d in raw)
        sim = compute_sim(len(raw), d_sum, self.params, self.cs_max, max(1, len(self.elements)))

        weights: Dict[ElementRef, Tuple[float, float]] = {}
        matches = []
        for ref, name, d in raw:
            if ref not in weights:
                e = self._by_ref[ref]
                weights[ref] = (
                    round12(element_weight(ref.name, doc, self.stats)),
                    round12(element_overlap(e, doc, self.stats, self.stops)),
                )
            w, kd = weights[ref]
            matches.append(ElementMatch(ref, name, d, w, kd))

        seeds = {ref.seed_class for ref, _, _ in raw}
        if seeds:
            fragment, unreachable = select_fragment(self.ont, seeds)
        else:
            fragment, unreachable = OntologyFragment(), []
        return IndexRecord(doc.id, round12(sim), tuple(matches), fragment), unreachable


def index_document(
    doc: Document,
    ont: Ontology,
    graph: CategoryGraph,
    p: IndexParams,
    cs_max: int,
    stats: CorpusStats,
    stops: Optional[StopWordList] = None,
    synonyms: Optional[Mapping[str, Sequence[str]]] = None,
) -> IndexRecord:
    return TopicIndexer(ont, graph, p, cs_max, stats, stops, synonyms).index_document(doc)[0]


def build_index(
    corpus: Corpus,
    ont: Ontology,
    params: IndexParams = IndexParams(),
    stops: Optional[StopWordList] = None,
    synonyms: Optional[Mapping[str, Sequence[str]]] = None,
    workers: int = 1,
) -> Index:
    """Index every document; records come out sorted by document id.

    Per-document failures are collected in ``index.report`` and the document
    is left out of the index.
    """
    report = BuildReport(missing_categories=corpus.missing_categories)
    if not corpus.documents:
        return Index((), params, 1, ont.digest, corpus.digest(), report)
    cs_max = corpus_cs_max(corpus, params.cs_max_mode)
    indexer = TopicIndexer(ont, corpus.category_graph, params, cs_max, CorpusStats(corpus.documents), stops, synonyms)

    def run(doc):
        try:
            return doc.id, indexer.index_document(doc), None
        except Exception as exc:  # noqa: BLE001 - reported per document
            return doc.id, None, f"{type(exc).__name__}: {exc}"

    docs = sorted(corpus.documents, key=lambda d: d.id)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, docs))
    else:
        results = [run(d) for d in docs]

    records = []
    for doc_id, out, err in results:
        if err is not None:
            log.warning("document %s failed: %s", doc_id, err)
            report.errors.append((doc_id, err))
            continue
        record, unreachable = out
        records.append(record)
        report.unreachable.extend((doc_id, a, b) for a, b in unreachable)
    return Index(tuple(records), params, cs_max, ont.digest, corpus.digest(), report)


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def dumps_index(index: Index) -> str:
    header = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "params": {
            "k": round12(index.params.k),
            "d_max": index.params.d_max,
            "cs_max_mode": index.params.cs_max_mode.value,
            "cs_max": index.cs_max,
        },
        "ontology_hash": index.ontology_hash,
        "corpus_hash": index.corpus_hash,
        "records": len(index.records),
    }
    lines = [_dumps(header)] + [_dumps(r.to_json()) for r in index.records]
    return "\n".join(lines) + "\n"


def save_index(index: Index, target) -> None:
    """Write to a path or a text stream."""
    text = dumps_index(index)
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


def load_index(source) -> Index:
    """Read an index from a path or a text/binary stream."""
    data = source.read() if hasattr(source, "read") else Path(source).read_bytes()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IndexFormatError(f"byte {exc.start}: invalid UTF-8") from None
    return loads_index(data)


def loads_index(data: str) -> Index:
    lines = data.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise IndexFormatError("empty index file")

    def parse(lineno, line):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IndexFormatError(f"line {lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise IndexFormatError(f"line {lineno}: expected a JSON object")
        return obj

    header = parse(1, lines[0])
    if header.get("format") != INDEX_FORMAT:
        raise IndexFormatError(f"line 1: not an {INDEX_FORMAT} file (format={header.get('format')!r})")
    if header.get("version") != INDEX_VERSION:
        raise IndexFormatError(f"line 1: unsupported index version {header.get('version')!r} (expected {INDEX_VERSION})")
    try:
        hp = header["params"]
        params = IndexParams(hp["k"], hp["d_max"], hp["cs_max_mode"])
        cs_max = int(hp["cs_max"])
        expected = int(header["records"])
        ont_hash, corpus_hash = str(header["ontology_hash"]), str(header["corpus_hash"])
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexFormatError(f"line 1: bad header: {exc!r}") from None

    records = []
    for lineno, line in enumerate(lines[1:], 2):
        obj = parse(lineno, line)
        try:
            records.append(IndexRecord.from_json(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise IndexFormatError(f"line {lineno}: bad record: {exc!r}") from None
    if len(records) != expected:
        raise IndexFormatError(f"index truncated or padded: header declares {expected} records, found {len(records)}")
    if not data.endswith("\n"):
        raise IndexFormatError(f"line {len(lines)}: missing final newline, file looks truncated")
    ids = [r.doc_id for r in records]
    if ids != sorted(ids) or len(set(ids)) != len(ids):
        raise IndexFormatError("records are not unique and sorted by doc_id")
    return Index(tuple(records), params, cs_max, ont_hash, corpus_hash)

"""Wiki-style documents, the category parent graph, and candidate-name sets."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .text_metrics import normalize

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Malformed corpus or category graph input."""


class CsMaxMode(str, Enum):
    GLOBAL = "global"
    LOCAL_MAX = "local-max"


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    categories: Tuple[str, ...] = ()
    text: str = ""
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise CorpusError("document id is empty")
        if not self.title or not self.title.strip():
            raise CorpusError(f"document {self.id!r} has an empty title")
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def to_json(self) -> dict:
        obj = {"id": self.id, "title": self.title, "categories": list(self.categories), "text": self.text}
        if self.metadata:
            obj["metadata"] = dict(self.metadata)
        return obj

    def __hash__(self):
        return hash((self.id, self.title, self.categories, self.text))


class CategoryGraph:
    """Child -> parent category edges, keyed by normalized category name."""

    def __init__(self, categories: Iterable[str] = (), edges: Iterable[Tuple[str, str]] = ()):
        cats = {normalize(c) for c in categories}
        if "" in cats:
            raise CorpusError("empty category name")
        parents: Dict[str, set] = {c: set() for c in cats}
        for child, parent in edges:
            child, parent = normalize(child), normalize(parent)
            for end in (child, parent):
                if end not in parents:
                    raise CorpusError(f"category edge {child!r}->{parent!r} refers to unknown category {end!r}")
            if child == parent:
                raise CorpusError(f"category self-loop on {child!r}")
            parents[child].add(parent)
        self._parents = {c: frozenset(p) for c, p in sorted(parents.items())}

    @property
    def categories(self) -> FrozenSet[str]:
        return frozenset(self._parents)

    @property
    def edges(self) -> FrozenSet[Tuple[str, str]]:
        return frozenset((c, p) for c, ps in self._parents.items() for p in ps)

    def parents(self, category: str) -> FrozenSet[str]:
        return self._parents.get(normalize(category), frozenset())

    def __contains__(self, category: str) -> bool:
        return normalize(category) in self._parents

    def __len__(self) -> int:
        return len(self._parents)

    def with_categories(self, extra: Iterable[str]) -> "CategoryGraph":
        return CategoryGraph(self.categories | {normalize(c) for c in extra}, self.edges)

    def to_json(self) -> dict:
        return {
            "categories": sorted(self._parents),
            "edges": [{"child": c, "parent": p} for c, p in sorted(self.edges)],
        }

    def __eq__(self, other):
        if not isinstance(other, CategoryGraph):
            return NotImplemented
        return self._parents == other._parents


@dataclass(frozen=True)
class Corpus:
    """Documents plus their category graph.

    Document categories missing from the graph are added as isolated
    categories; ``missing_categories`` counts how many were added.
    """

    documents: Tuple[Document, ...]
    category_graph: CategoryGraph
    missing_categories: int = 0

    @classmethod
    def build(cls, documents: Iterable[Document], graph: Optional[CategoryGraph] = None) -> "Corpus":
        documents = tuple(documents)
        graph = graph if graph is not None else CategoryGraph()
        seen = set()
        for d in documents:
            if d.id in seen:
                raise CorpusError(f"duplicate document id {d.id!r}")
            seen.add(d.id)
        missing = {normalize(c) for d in documents for c in d.categories} - graph.categories
        missing.discard("")
        if missing:
            log.warning("%d document categories missing from the category graph; added as isolated", len(missing))
            graph = graph.with_categories(missing)
        return cls(documents, graph, len(missing))

    def __len__(self) -> int:
        return len(self.documents)

    def digest(self) -> str:
        """Content hash, independent of document order."""
        h = hashlib.sha256()
        for d in sorted(self.documents, key=lambda d: d.id):
            h.update(json.dumps(d.to_json(), sort_keys=True, ensure_ascii=False).encode("utf-8"))
            h.update(b"\n")
        h.update(json.dumps(self.category_graph.to_json(), sort_keys=True, ensure_ascii=False).encode("utf-8"))
        return h.hexdigest()


def _read_text(source) -> str:
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data


def _document_from_json(obj, lineno: int) -> Document:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    try:
        cats = obj.get("categories", [])
        meta = obj.get("metadata") or {}
        if not isinstance(cats, list) or not all(isinstance(c, str) for c in cats):
            raise CorpusError(f"line {lineno}: 'categories' must be a list of strings")
        if not isinstance(meta, dict):
            raise CorpusError(f"line {lineno}: 'metadata' must be an object")
        return Document(
            id=str(obj["id"]),
            title=str(obj["title"]),
            categories=tuple(cats),
            text=str(obj.get("text", "") or ""),
            metadata={str(k): str(v) for k, v in meta.items()},
        )
    except KeyError as exc:
        raise CorpusError(f"line {lineno}: missing field {exc.args[0]!r}") from None
    except CorpusError as exc:
        if str(exc).startswith("line "):
            raise
        raise CorpusError(f"line {lineno}: {exc}") from None


def load_corpus(source) -> List[Document]:
    """Read JSON Lines documents in file order; blank lines are skipped."""
    docs: List[Document] = []
    seen: Dict[str, int] = {}
    for lineno, line in enumerate(_read_text(source).splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: parse error at column {exc.colno}: {exc.msg}") from None
        doc = _document_from_json(obj, lineno)
        if doc.id in seen:
            raise CorpusError(f"line {lineno}: duplicate document id {doc.id!r} (first seen on line {seen[doc.id]})")
        seen[doc.id] = lineno
        docs.append(doc)
    return docs


def load_category_graph(source) -> CategoryGraph:
    try:
        obj = json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"category graph parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise CorpusError("category graph file must hold a JSON object")
    try:
        return CategoryGraph(obj.get("categories", []), [(e["child"], e["parent"]) for e in obj.get("edges", [])])
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed category edge: {exc!r}") from None


def candidate_names(doc: Document, graph: CategoryGraph) -> FrozenSet[str]:
    """The title, the document's categories, and those categories' parents."""
    names = {normalize(doc.title)}
    for c in doc.categories:
        c = normalize(c)
        if not c:
            continue
        names.add(c)
        names.update(graph.parents(c))
    return frozenset(names)


def cs_max(corpus: Corpus, mode: CsMaxMode | str = CsMaxMode.GLOBAL) -> int:
    mode = CsMaxMode(mode)
    if not corpus.documents:
        raise CorpusError("cs_max is undefined for an empty corpus")
    if mode is CsMaxMode.GLOBAL:
        return max(1, len(corpus.category_graph))
    return max(len(candidate_names(d, corpus.category_graph)) for d in corpus.documents)

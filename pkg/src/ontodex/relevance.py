"""Ranking indexed documents against an abstract context.

Two methods are provided: ``graph`` compares each record's ontology fragment
with the context graph, ``weight`` takes the angular separation between
context weights and the record's weighted element vector.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .indexer import ATTRIBUTE, CLASS, ElementRef, Index, IndexRecord
from .ontology import Ontology, OntologyError, OntologyFragment
from .text_metrics import name_similarity, normalize


class ContextError(ValueError):
    """Context does not fit the ontology."""


class Method(str, Enum):
    GRAPH = "graph"
    WEIGHT = "weight"


class RelevanceMode(str, Enum):
    PRODUCT = "product"
    BLEND = "blend"


@dataclass(frozen=True)
class LabeledGraph:
    """Undirected simple graph over normalized, unique node names."""

    nodes: FrozenSet[str] = frozenset()
    edges: FrozenSet[FrozenSet[str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        edges = frozenset(frozenset(e) for e in self.edges)
        for e in edges:
            if len(e) != 2 or not e <= self.nodes:
                raise ValueError(f"bad edge {sorted(e)}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_fragment(cls, fragment: OntologyFragment) -> "LabeledGraph":
        return cls(fragment.classes, {r.endpoints() for r in fragment.relations})

    def adjacency(self) -> Dict[str, set]:
        adj = {n: set() for n in self.nodes}
        for e in self.edges:
            a, b = tuple(e)
            adj[a].add(b)
            adj[b].add(a)
        return adj


@dataclass(frozen=True)
class AbstractContext:
    classes: FrozenSet[str]
    attributes: FrozenSet[Tuple[str, str]] = frozenset()

    @classmethod
    def of(cls, ont: Ontology, classes: Iterable[str], attributes: Iterable[Tuple[str, str]] = ()) -> "AbstractContext":
        """Validate against ``ont`` and normalize names."""
        names = set()
        for c in classes:
            if c not in ont:
                raise ContextError(f"context class {normalize(c)!r} is not in the ontology")
            names.add(normalize(c))
        if not names:
            raise ContextError("context has no classes")
        attrs = set()
        for owner, name in attributes:
            if owner not in ont:
                raise ContextError(f"context attribute owner {normalize(owner)!r} is not in the ontology")
            cls_ = ont.get_class(owner)
            if normalize(name) not in {a.name for a in cls_.attributes}:
                raise ContextError(f"class {cls_.name!r} has no attribute {normalize(name)!r}")
            attrs.add((cls_.name, normalize(name)))
        return cls(frozenset(names), frozenset(attrs))

    def graph(self, ont: Ontology) -> LabeledGraph:
        """Context classes with every ontology relation induced among them."""
        edges = {r.endpoints() for r in ont.relations if r.source in self.classes and r.target in self.classes}
        return LabeledGraph(self.classes, edges)


def load_context(source, ont: Ontology) -> AbstractContext:
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ContextError(f"context parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return AbstractContext.of(ont, obj["classes"], [(a["class"], a["name"]) for a in obj.get("attributes") or []])
    except (KeyError, TypeError) as exc:
        raise ContextError(f"malformed context: {exc!r}") from None


@dataclass(frozen=True)
class WeightedContext:
    weights: Mapping[ElementRef, float]
    l_max: int

    def __post_init__(self):
        for ref, w in self.weights.items():
            if not (0.0 < w <= 1.0):
                raise ValueError(f"context weight of {ref} outside (0, 1]: {w}")


def context_weights(ont: Ontology, ctx: AbstractContext, l_max: int) -> WeightedContext:
    """wa = 1/(d+1) for every class within ``l_max`` hops of the context.

    Attributes inherit the weight of their owner class.
    """
    if l_max < 0:
        raise ValueError("l_max must be non-negative")
    for c in ctx.classes:
        if c not in ont:
            raise ContextError(f"context class {c!r} is not in the ontology")
    dist = ont.distances_from(sorted(ctx.classes))
    weights: Dict[ElementRef, float] = {}
    for name, d in sorted(dist.items()):
        if d > l_max:
            continue
        wa = 1.0 / (d + 1)
        weights[ElementRef(name)] = wa
        for a in ont.get_class(name).attributes:
            weights[ElementRef(a.name, ATTRIBUTE, name)] = wa
    return WeightedContext(weights, l_max)


def match_nodes(g1: LabeledGraph, g2: LabeledGraph, theta: float) -> List[Tuple[str, str, float]]:
    """Greedy one-to-one pairing, most similar names first.

    Candidates are pairs with name similarity >= ``theta``; ties are broken on
    the unordered name pair so swapping the graphs mirrors the result.
    """
    candidates = []
    for a in g1.nodes:
        for b in g2.nodes:
            s = name_similarity(a, b)
            if s >= theta:
                candidates.append((-s, min(a, b), max(a, b), a, b, s))
    candidates.sort()
    used1, used2 = set(), set()
    pairs = []
    for *_, a, b, s in candidates:
        if a in used1 or b in used2:
            continue
        used1.add(a)
        used2.add(b)
        pairs.append((a, b, s))
    return pairs


def _bfs(adj: Dict[str, set], src: str) -> Dict[str, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _ratio(x: float, y: float) -> float:
    if x == y:
        return 1.0
    return min(x, y) / max(x, y)


def graph_similarity(g1: LabeledGraph, g2: LabeledGraph, theta: float = 0.6) -> float:
    """Product of matching coverage, name similarity, neighbour-count
    agreement and shortest-path agreement over matched nodes."""
    pairs = match_nodes(g1, g2, theta)
    if not pairs:
        return 0.0
    adj1, adj2 = g1.adjacency(), g2.adjacency()
    coverage = 2 * len(pairs) / (len(g1.nodes) + len(g2.nodes))
    name = sum(s for *_, s in pairs) / len(pairs)
    nbr = sum(_ratio(len(adj1[a]), len(adj2[b])) for a, b, _ in pairs) / len(pairs)

    if len(pairs) < 2:
        path = 1.0
    else:
        d1 = {a: _bfs(adj1, a) for a, _, _ in pairs}
        d2 = {b: _bfs(adj2, b) for _, b, _ in pairs}
        terms = []
        for (a1, b1, _), (a2, b2, _) in combinations(pairs, 2):
            p1 = d1[a1].get(a2)
            p2 = d2[b1].get(b2)
            if p1 is None and p2 is None:
                terms.append(1.0)
            elif p1 is None or p2 is None:
                terms.append(0.0)
            else:
                terms.append(_ratio(p1, p2))
        path = sum(terms) / len(terms)
    return coverage * name * nbr * path


def record_vector(rec: IndexRecord) -> Dict[ElementRef, float]:
    """Element -> w * kd over the record's matches (one entry per element)."""
    out: Dict[ElementRef, float] = {}
    for m in rec.matches:
        out.setdefault(m.element, m.w * m.kd)
    return out


def cosine(u: Mapping, v: Mapping) -> float:
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    dot = sum(x * v[k] for k, x in u.items() if k in v)
    return min(1.0, max(0.0, dot / (nu * nv)))


def angular_similarity(ctx_w: WeightedContext, rec: IndexRecord) -> float:
    return cosine(ctx_w.weights, record_vector(rec))


def document_relevance(s: float, index_sim: float, mode: RelevanceMode | str = RelevanceMode.PRODUCT, alpha: float = 0.5) -> float:
    for label, x in (("s", s), ("index_sim", index_sim)):
        if not (0.0 <= x <= 1.0):
            raise ValueError(f"{label} must lie in [0, 1], got {x}")
    mode = RelevanceMode(mode)
    if mode is RelevanceMode.PRODUCT:
        return s * index_sim
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * s + (1.0 - alpha) * index_sim


@dataclass(frozen=True)
class RankParams:
    method: Method = Method.GRAPH
    theta: float = 0.6
    l_max: int = 2
    mode: RelevanceMode = RelevanceMode.PRODUCT
    alpha: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "mode", RelevanceMode(self.mode))
        if not (0.0 <= self.theta <= 1.0):
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.l_max < 0:
            raise ValueError(f"l_max must be non-negative, got {self.l_max}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    s: float
    index_sim: float
    relevance: float

    def to_json(self) -> dict:
        return {"doc_id": self.doc_id, "s": self.s, "index_sim": self.index_sim, "relevance": self.relevance}


def rank_documents(index: Index, ont: Ontology, ctx: AbstractContext, params: RankParams = RankParams()) -> List[RankedResult]:
    """Score every record and sort by relevance (desc), then doc id."""
    for c in ctx.classes:
        if c not in ont:
            raise ContextError(f"context class {c!r} is not in the ontology")
    if params.method is Method.GRAPH:
        ctx_graph = ctx.graph(ont)

        def score(rec):
            return graph_similarity(LabeledGraph.from_fragment(rec.fragment), ctx_graph, params.theta)
    else:
        ctx_w = context_weights(ont, ctx, params.l_max)

        def score(rec):
            return angular_similarity(ctx_w, rec)

    results = []
    for rec in index.records:
        s = score(rec)
        results.append(RankedResult(rec.doc_id, s, rec.sim, document_relevance(s, rec.sim, params.mode, params.alpha)))
    results.sort(key=lambda r: (-r.relevance, r.doc_id))
    return results

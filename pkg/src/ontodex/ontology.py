"""Application ontology: classes, attributes, typed relations, shortest paths
and fragment selection."""
from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .text_metrics import normalize


class OntologyError(ValueError):
    """Malformed or inconsistent ontology input."""


class RelationKind(str, Enum):
    ASSOCIATIVE = "associative"
    TAXONOMICAL = "taxonomical"
    HIERARCHICAL = "hierarchical"


@dataclass(frozen=True)
class OntologyAttribute:
    name: str
    owner: str
    description: str = ""


@dataclass(frozen=True)
class OntologyClass:
    name: str
    description: str = ""
    attributes: Tuple[OntologyAttribute, ...] = ()


@dataclass(frozen=True, order=True)
class Relation:
    source: str
    target: str
    kind: RelationKind

    def endpoints(self) -> frozenset:
        return frozenset((self.source, self.target))

    def to_json(self) -> dict:
        return {"from": self.source, "to": self.target, "kind": self.kind.value}

    @classmethod
    def from_json(cls, obj: dict) -> "Relation":
        return cls(normalize(obj["from"]), normalize(obj["to"]), RelationKind(obj["kind"]))


class Ontology:
    """Immutable, validated ontology.

    All names are stored normalized; lookups normalize their argument.
    Relations are treated as undirected, unweighted edges for every path metric.
    """

    def __init__(self, classes: Iterable[OntologyClass] = (), relations: Iterable[Relation] = ()):
        by_name: Dict[str, OntologyClass] = {}
        for cls in classes:
            name = normalize(cls.name)
            if not name:
                raise OntologyError("class with empty name")
            if name in by_name:
                raise OntologyError(f"duplicate class name {name!r}")
            attrs = []
            seen = set()
            for a in cls.attributes:
                aname = normalize(a.name)
                if not aname:
                    raise OntologyError(f"class {name!r} has an attribute with empty name")
                if aname in seen:
                    raise OntologyError(f"duplicate attribute {aname!r} in class {name!r}")
                seen.add(aname)
                attrs.append(OntologyAttribute(aname, name, a.description))
            by_name[name] = OntologyClass(name, cls.description, tuple(attrs))

        rels = []
        seen_rel = set()
        for r in relations:
            r = Relation(normalize(r.source), normalize(r.target), RelationKind(r.kind))
            for end in (r.source, r.target):
                if end not in by_name:
                    raise OntologyError(f"relation {r.source!r}->{r.target!r} refers to unknown class {end!r}")
            if r.source == r.target:
                raise OntologyError(f"self-relation on {r.source!r}")
            if r in seen_rel:
                raise OntologyError(f"duplicate relation {r.source!r}->{r.target!r} ({r.kind.value})")
            seen_rel.add(r)
            rels.append(r)

        self._classes = dict(sorted(by_name.items()))
        self._relations = tuple(sorted(rels))
        adj: Dict[str, set] = {name: set() for name in self._classes}
        for r in self._relations:
            adj[r.source].add(r.target)
            adj[r.target].add(r.source)
        self._adj = {k: tuple(sorted(v)) for k, v in adj.items()}

    @property
    def classes(self) -> Dict[str, OntologyClass]:
        return dict(self._classes)

    @property
    def relations(self) -> Tuple[Relation, ...]:
        return self._relations

    def class_names(self) -> List[str]:
        return list(self._classes)

    def __contains__(self, name: str) -> bool:
        return normalize(name) in self._classes

    def __len__(self) -> int:
        return len(self._classes)

    def get_class(self, name: str) -> OntologyClass:
        key = normalize(name)
        try:
            return self._classes[key]
        except KeyError:
            raise KeyError(f"unknown class {key!r}") from None

    def attributes(self) -> List[OntologyAttribute]:
        return [a for c in self._classes.values() for a in c.attributes]

    def neighbors(self, name: str) -> Tuple[str, ...]:
        return self._adj[self.get_class(name).name]

    def relations_between(self, a: str, b: str) -> List[Relation]:
        ends = frozenset((a, b))
        return [r for r in self._relations if r.endpoints() == ends]

    def distances_from(self, sources: Iterable[str]) -> Dict[str, int]:
        """Multi-source BFS hop distances to every reachable class."""
        dist: Dict[str, int] = {}
        queue = deque()
        for s in sources:
            key = self.get_class(s).name
            if key not in dist:
                dist[key] = 0
                queue.append(key)
        while queue:
            u = queue.popleft()
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def to_json(self) -> dict:
        return {
            "classes": [
                {
                    "name": c.name,
                    "description": c.description,
                    "attributes": [{"name": a.name, "description": a.description} for a in c.attributes],
                }
                for c in self._classes.values()
            ],
            "relations": [r.to_json() for r in self._relations],
        }

    @cached_property
    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Ontology):
            return NotImplemented
        return self._classes == other._classes and self._relations == other._relations

    def __hash__(self):
        return hash(self.digest)

    def __repr__(self):
        return f"Ontology(classes={len(self._classes)}, relations={len(self._relations)})"


def ontology_from_json(obj) -> Ontology:
    if not isinstance(obj, dict):
        raise OntologyError("ontology file must hold a JSON object")
    try:
        classes = [
            OntologyClass(
                c["name"],
                c.get("description", "") or "",
                tuple(
                    OntologyAttribute(a["name"], c["name"], a.get("description", "") or "")
                    for a in c.get("attributes", [])
                ),
            )
            for c in obj.get("classes", [])
        ]
        relations = [Relation(r["from"], r["to"], RelationKind(r["kind"])) for r in obj.get("relations", [])]
    except (KeyError, TypeError, AttributeError) as exc:
        raise OntologyError(f"malformed ontology entry: {exc!r}") from None
    except ValueError as exc:
        raise OntologyError(str(exc)) from None
    return Ontology(classes, relations)


def load_ontology(source) -> Ontology:
    """Parse an ontology from a binary/text stream, bytes or str."""
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise OntologyError(f"ontology parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return ontology_from_json(obj)


def shortest_path(ont: Ontology, a: str, b: str) -> Optional[List[str]]:
    """Minimum-hop path from ``a`` to ``b``, or None when unreachable.

    Among equal-length paths the lexicographically smallest sequence of
    class names is returned.
    """
    src = ont.get_class(a).name
    dst = ont.get_class(b).name
    # distances measured from the target let us walk forward greedily
    dist = ont.distances_from([dst])
    if src not in dist:
        return None
    path = [src]
    node = src
    while node != dst:
        node = min(v for v in ont.neighbors(node) if dist.get(v) == dist[node] - 1)
        path.append(node)
    return path


@dataclass(frozen=True)
class OntologyFragment:
    """A connected slice of the ontology: classes plus the relations kept
    between them. Attributes are those of the included classes."""

    classes: frozenset = frozenset()
    relations: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "classes", frozenset(self.classes))
        object.__setattr__(self, "relations", frozenset(self.relations))
        for r in self.relations:
            if r.source not in self.classes or r.target not in self.classes:
                raise OntologyError(f"fragment relation {r.source!r}->{r.target!r} leaves the fragment")

    def attributes(self, ont: Ontology) -> List[OntologyAttribute]:
        return [a for name in sorted(self.classes) for a in ont.get_class(name).attributes]

    def sorted_classes(self) -> List[str]:
        return sorted(self.classes)

    def sorted_relations(self) -> List[Relation]:
        return sorted(self.relations)

    def to_json(self) -> dict:
        return {
            "classes": self.sorted_classes(),
            "relations": [r.to_json() for r in self.sorted_relations()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OntologyFragment":
        return cls(
            frozenset(normalize(c) for c in obj["classes"]),
            frozenset(Relation.from_json(r) for r in obj["relations"]),
        )


def select_fragment(ont: Ontology, seed: Iterable[str]) -> Tuple[OntologyFragment, List[Tuple[str, str]]]:
    """Seed classes plus the selected shortest path between every seed pair.

    Returns the fragment and the list of seed pairs with no connecting path.
    Kept relations are those on a selected path plus direct seed-to-seed ones.
    """
    seeds = sorted({ont.get_class(s).name for s in seed})
    if not seeds:
        raise ValueError("fragment seed is empty")
    classes = set(seeds)
    edges = set()
    unreachable = []
    for a, b in combinations(seeds, 2):
        path = shortest_path(ont, a, b)
        if path is None:
            unreachable.append((a, b))
            continue
        classes.update(path)
        edges.update(frozenset(p) for p in zip(path, path[1:]))
    seed_set = set(seeds)
    relations = {
        r
        for r in ont.relations
        if r.endpoints() in edges or (r.source in seed_set and r.target in seed_set)
    }
    return OntologyFragment(frozenset(classes), frozenset(relations)), unreachable

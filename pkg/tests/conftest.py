import random
import string
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ontodex import Ontology, OntologyClass, Relation, RelationKind  # noqa: E402

TOY = Path(__file__).parent / "fixtures" / "toy"

_ACCEPTANCE_LINES = []


def make_ontology(names, edges, kinds=None):
    kinds = kinds or {}
    return Ontology(
        [OntologyClass(n) for n in names],
        [Relation(a, b, kinds.get((a, b), RelationKind.ASSOCIATIVE)) for a, b in edges],
    )


def random_connected_graph(rng: random.Random, max_nodes=10, min_nodes=1):
    n = rng.randint(min_nodes, max_nodes)
    names = rng.sample(string.ascii_lowercase, n)
    edges = set()
    for i in range(1, n):
        j = rng.randrange(i)
        edges.add(tuple(sorted((names[i], names[j]))))
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(names, 2) if n > 1 else (names[0], names[0])
        if a != b:
            edges.add(tuple(sorted((a, b))))
    return names, sorted(edges)


def random_graph(rng: random.Random, max_nodes=8, min_nodes=1, p=0.35):
    n = rng.randint(min_nodes, max_nodes)
    names = rng.sample(string.ascii_lowercase, n)
    edges = [(a, b) for i, a in enumerate(names) for b in names[i + 1:] if rng.random() < p]
    return names, edges


@pytest.fixture
def toy():
    return TOY


@pytest.fixture
def acceptance(request):
    def record(criterion, ok, detail=""):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}{': ' + detail if detail else ''}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Time index building and ranking on a synthetic wiki-like corpus.

    python scripts/bench_synthetic.py --docs 2000 --classes 60 --categories 400 --workers 1
"""
import argparse
import random
import string
import time

from ontodex.corpus import CategoryGraph, Corpus, Document
from ontodex.indexer import IndexParams, build_index, dumps_index
from ontodex.ontology import Ontology, OntologyAttribute, OntologyClass, Relation, RelationKind
from ontodex.relevance import AbstractContext, RankParams, rank_documents


def word(rng, lo=4, hi=9):
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(lo, hi)))


def perturb(rng, w):
    i = rng.randrange(len(w))
    return w[:i] + rng.choice(string.ascii_lowercase) + w[i + 1:]


def synthetic(rng, n_docs, n_classes, n_categories):
    class_names = sorted({word(rng) for _ in range(n_classes * 2)})[:n_classes]
    classes = [
        OntologyClass(n, " ".join(word(rng) for _ in range(5)), (OntologyAttribute(word(rng), n),))
        for n in class_names
    ]
    relations = set()
    for i in range(1, len(class_names)):
        relations.add(Relation(class_names[i], class_names[rng.randrange(i)], rng.choice(list(RelationKind))))
    ont = Ontology(classes, relations)

    # a share of categories are near-copies of class names so matching has work to do
    cats = [perturb(rng, rng.choice(class_names)) if rng.random() < 0.3 else word(rng) for _ in range(n_categories)]
    cats = sorted(set(cats))
    edges = {(c, rng.choice(cats)) for c in cats if rng.random() < 0.7}
    graph = CategoryGraph(cats, [(a, b) for a, b in edges if a != b])

    vocab = class_names + [word(rng) for _ in range(500)]
    docs = [
        Document(f"d{i:06d}", word(rng), tuple(rng.sample(cats, rng.randint(1, 4))), " ".join(rng.choice(vocab) for _ in range(80)))
        for i in range(n_docs)
    ]
    return ont, Corpus.build(docs, graph), class_names


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--classes", type=int, default=60)
    ap.add_argument("--categories", type=int, default=400)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    ont, corpus, class_names = synthetic(rng, args.docs, args.classes, args.categories)
    t0 = time.perf_counter()
    index = build_index(corpus, ont, IndexParams(0.5, 3, "local-max"), workers=args.workers)
    t1 = time.perf_counter()
    size = len(dumps_index(index))
    ctx = AbstractContext.of(ont, class_names[:2])
    for method in ("graph", "weight"):
        t2 = time.perf_counter()
        ranked = rank_documents(index, ont, ctx, RankParams(method))
        print(f"rank[{method}]: {time.perf_counter() - t2:.2f}s, top {ranked[0].doc_id} relevance={ranked[0].relevance:.4f}")
    matched = sum(1 for r in index.records if r.matches)
    print(f"build: {t1 - t0:.2f}s for {len(corpus)} docs ({matched} with matches), cs_max={index.cs_max}, "
          f"index {size / 1e6:.2f} MB, errors {len(index.report.errors)}")


if __name__ == "__main__":
    main()

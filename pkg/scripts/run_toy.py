"""Index the bundled toy corpus and print both rankings for its context.

    python scripts/run_toy.py [--k 0.5] [--dmax 3]
"""
import argparse
from pathlib import Path

from ontodex.corpus import Corpus, load_category_graph, load_corpus
from ontodex.indexer import IndexParams, build_index
from ontodex.ontology import load_ontology
from ontodex.relevance import RankParams, load_context, rank_documents

TOY = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "toy"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=float, default=0.5)
    ap.add_argument("--dmax", type=int, default=3)
    ap.add_argument("--theta", type=float, default=0.6)
    ap.add_argument("--lmax", type=int, default=2)
    args = ap.parse_args()

    ont = load_ontology((TOY / "ontology.json").read_bytes())
    corpus = Corpus.build(load_corpus((TOY / "corpus.jsonl").read_bytes()), load_category_graph((TOY / "categories.json").read_bytes()))
    ctx = load_context((TOY / "context.json").read_bytes(), ont)
    index = build_index(corpus, ont, IndexParams(args.k, args.dmax))

    print(f"{'doc':<12} {'sim':>8}  matches")
    for r in index.records:
        print(f"{r.doc_id:<12} {r.sim:8.4f}  " + ", ".join(f"{m.element.name}<-{m.matched_name}({m.distance})" for m in r.matches))
    for method in ("graph", "weight"):
        print(f"\n{method} method, context {sorted(ctx.classes)}")
        for i, res in enumerate(rank_documents(index, ont, ctx, RankParams(method, args.theta, args.lmax)), 1):
            print(f"  {i}. {res.doc_id:<12} s={res.s:.4f}  relevance={res.relevance:.4f}")


if __name__ == "__main__":
    main()

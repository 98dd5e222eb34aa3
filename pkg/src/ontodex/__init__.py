"""Ontology-driven indexing and context-sensitive ranking of wiki-style documents."""
from .corpus import CategoryGraph, Corpus, CsMaxMode, Document, candidate_names, cs_max, load_category_graph, load_corpus
from .indexer import (
    ElementMatch,
    ElementRef,
    Index,
    IndexParams,
    IndexRecord,
    build_index,
    compute_sim,
    element_weight,
    index_document,
    load_index,
    loads_index,
    match_elements,
    save_index,
)
from .ontology import (
    Ontology,
    OntologyAttribute,
    OntologyClass,
    OntologyFragment,
    Relation,
    RelationKind,
    load_ontology,
    select_fragment,
    shortest_path,
)
from .relevance import (
    AbstractContext,
    LabeledGraph,
    RankedResult,
    RankParams,
    WeightedContext,
    angular_similarity,
    context_weights,
    document_relevance,
    graph_similarity,
    match_nodes,
    rank_documents,
)
from .text_metrics import StopWordList, description_overlap, levenshtein, name_similarity, normalize

__version__ = "0.1.0"

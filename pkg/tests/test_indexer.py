import io
import math
import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import make_ontology
from oracles import sim_formula
from ontodex import load_ontology
from ontodex.corpus import CategoryGraph, Corpus, Document, load_category_graph, load_corpus
from ontodex.indexer import (
    ATTRIBUTE,
    CorpusStats,
    ElementRef,
    IndexFormatError,
    IndexParams,
    build_index,
    compute_sim,
    dumps_index,
    element_weight,
    index_document,
    load_index,
    loads_index,
    match_elements,
    ontology_elements,
    round12,
    save_index,
)


def test_params_validation():
    with pytest.raises(ValueError):
        IndexParams(k=1.5)
    with pytest.raises(ValueError):
        IndexParams(d_max=0)
    with pytest.raises(ValueError):
        IndexParams(cs_max_mode="sometimes")
    assert IndexParams(d_max=2.0).d_max == 2


def _elements(*names):
    return ontology_elements(make_ontology(names, []))


def test_match_exact():
    matches, d_sum = match_elements({"jazz"}, _elements("jazz"), 2)
    assert matches == [(ElementRef("jazz"), "jazz", 0)] and d_sum == 0


def test_match_none():
    assert match_elements({"jazz"}, _elements("rock"), 2) == ([], 0)


def test_match_prunes_by_distance():
    matches, d_sum = match_elements({"jazz", "muzic"}, _elements("music"), 2)
    assert matches == [(ElementRef("music"), "muzic", 1)] and d_sum == 1


def test_match_one_entry_per_pair_sorted():
    matches, d_sum = match_elements({"musics", "music"}, _elements("music", "musik"), 3)
    assert [(m[0].name, m[1], m[2]) for m in matches] == [
        ("music", "music", 0),
        ("music", "musics", 1),
        ("musik", "music", 1),
        ("musik", "musics", 2),
    ]
    assert d_sum == 4


def test_match_attributes_and_synonyms():
    ont = load_ontology(b'{"classes":[{"name":"Musician","attributes":[{"name":"genre"}]}]}')
    elements = ontology_elements(ont, {"musician": ["Player"]})
    matches, _ = match_elements({"genre", "player"}, elements, 2)
    assert (ElementRef("genre", ATTRIBUTE, "musician"), "genre", 0) in matches
    assert (ElementRef("musician"), "player", 0) in matches


@given(st.sets(st.text("abm", max_size=5), max_size=5), st.integers(1, 4))
def test_match_distances_below_dmax(cs, d_max):
    matches, d_sum = match_elements(cs, _elements("ab", "mab", "bbb", "a"), d_max)
    assert all(d < d_max for _, _, d in matches)
    assert d_sum == sum(d for _, _, d in matches)


def test_sim_empty_pairs():
    assert compute_sim(0, 0, IndexParams(), 10, 4) == 1.0


def test_sim_spot_value():
    p = IndexParams(k=0.5, d_max=3)
    assert sim_formula(2, 3, 0.5, 10, 4, 3) == pytest.approx(0.8625, abs=1e-15)
    assert compute_sim(2, 3, p, 10, 4) == pytest.approx(0.8625, abs=1e-12)


@pytest.mark.parametrize("d_sum", [0, 5, 17, 30])
def test_sim_k0_full_coverage(d_sum):
    assert compute_sim(10, d_sum, IndexParams(k=0.0, d_max=3), 5, 2) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize(
    "args",
    [(-1, 0, 1, 1), (1, -1, 1, 1), (0, 1, 1, 1), (5, 0, 2, 2), (2, 7, 10, 10), (1, 0, 0, 1)],
)
def test_sim_precondition_violations_raise(args):
    n_pair, d_sum, cs_max, n_ont = args
    with pytest.raises(ValueError):
        compute_sim(n_pair, d_sum, IndexParams(d_max=3), cs_max, n_ont)


valid_sim_args = st.tuples(
    st.floats(0, 1), st.integers(1, 6), st.integers(1, 30), st.integers(1, 30), st.integers(1, 400), st.integers(0, 10**6)
)


@given(valid_sim_args)
def test_sim_range(args):
    k, d_max, cs_max, n_ont, n_pair, d_seed = args
    assume(n_pair <= cs_max * n_ont)
    d_sum = d_seed % (d_max * n_pair + 1)
    s = compute_sim(n_pair, d_sum, IndexParams(k, d_max), cs_max, n_ont)
    assert 0.5 - 1e-12 <= s <= 1 + 1e-12


@given(st.floats(0.01, 1), st.integers(1, 5), st.integers(1, 20))
def test_sim_grows_with_distance_sum(k, d_max, n_pair):
    # larger d_sum shrinks the closeness term, which is subtracted
    p = IndexParams(k, d_max)
    sims = [compute_sim(n_pair, d, p, 20, 20) for d in range(d_max * n_pair + 1)]
    assert all(a <= b + 1e-15 for a, b in zip(sims, sims[1:]))


@given(st.floats(0, 0.99), st.integers(1, 5), st.integers(0, 5))
def test_sim_falls_with_pair_count(k, d_max, per_pair):
    per_pair = min(per_pair, d_max)
    p = IndexParams(k, d_max)
    sims = [compute_sim(n, n * per_pair, p, 10, 10) for n in range(1, 60)]
    assert all(b <= a + 1e-15 for a, b in zip(sims, sims[1:]))


def test_element_weight_single_token_document():
    doc = Document("d", "jazz")
    assert element_weight("jazz", doc, CorpusStats([doc])) == pytest.approx(math.log(2), abs=1e-15)


def test_element_weight_absent_name():
    doc = Document("d", "Rock", text="guitars and drums")
    assert element_weight("jazz", doc, CorpusStats([doc])) == 0.0


def test_element_weight_shared_idf():
    a = Document("a", "Jazz", text="jazz club")
    b = Document("b", "Jazz", text="jazz bar")
    c = Document("c", "Rock")
    stats = CorpusStats([a, b, c])
    assert element_weight("jazz", a, stats) == element_weight("jazz", b, stats)
    # tf = 2/3, idf = ln(1 + 3/2)
    assert element_weight("jazz", a, stats) == pytest.approx(2 / 3 * math.log(2.5), abs=1e-15)


def test_element_weight_multi_token_names():
    doc = Document("d", "Birth date", text="the birth date is unknown; birth records lost")
    stats = CorpusStats([doc])
    # phrase appears in the title and once in the text; 2 + 8 tokens
    assert element_weight("Birth_Date", doc, stats) == pytest.approx(2 / 10 * math.log(2), abs=1e-15)


TWO_CLASS = load_ontology(
    b'{"classes":[{"name":"Music","description":""},{"name":"Art","description":""}],'
    b'"relations":[{"from":"Music","to":"Art","kind":"taxonomical"}]}'
)


def test_index_document_toy():
    doc = Document("d", "Jazz", ("Music",), "jazz music is an art")
    corpus = Corpus.build([doc])
    p = IndexParams(k=0.5, d_max=2)
    rec = index_document(doc, TWO_CLASS, corpus.category_graph, p, 1, CorpusStats([doc]))
    assert [(m.element.name, m.matched_name, m.distance) for m in rec.matches] == [("music", "music", 0)]
    # one category in the corpus -> cs_max 1; ONT = {music, art}
    assert rec.sim == pytest.approx(sim_formula(1, 0, 0.5, 1, 2, 2), abs=1e-12)
    assert rec.sim == pytest.approx(0.625, abs=1e-12)
    assert rec.fragment.classes == {"music"}
    m = rec.matches[0]
    assert m.w == pytest.approx(round12(1 / 6 * math.log(2)))
    assert m.kd == 1.0  # empty description, name present


def test_index_document_nothing_matches():
    doc = Document("d", "Volcano", ("Geology",))
    rec = index_document(doc, TWO_CLASS, CategoryGraph(["Geology"]), IndexParams(), 1, CorpusStats([doc]))
    assert rec.matches == () and rec.sim == 1.0 and rec.fragment.classes == frozenset()


def test_index_document_title_equals_class():
    doc = Document("d", "Art")
    rec = index_document(doc, TWO_CLASS, CategoryGraph(), IndexParams(d_max=1), 1, CorpusStats([doc]))
    assert [m.element.name for m in rec.matches] == ["art"]
    assert rec.fragment.classes == {"art"}


def test_index_document_attribute_seeds_owner():
    ont = load_ontology(
        b'{"classes":[{"name":"Musician","attributes":[{"name":"Genre","description":"style of music"}]},'
        b'{"name":"Band"},{"name":"Hall"}],'
        b'"relations":[{"from":"Musician","to":"Band","kind":"associative"},{"from":"Band","to":"Hall","kind":"associative"}]}'
    )
    doc = Document("d", "Genre", ("Hall",), "a genre of music")
    rec = index_document(doc, ont, CategoryGraph(["Hall"]), IndexParams(d_max=1), 1, CorpusStats([doc]))
    assert rec.fragment.classes == {"musician", "band", "hall"}
    genre = [m for m in rec.matches if m.element.kind == ATTRIBUTE][0]
    # description tokens {style, music}, text tokens {genre, music}
    assert genre.kd == pytest.approx(round12(1 / 3))


def _toy_corpus(toy):
    docs = load_corpus((toy / "corpus.jsonl").read_bytes())
    graph = load_category_graph((toy / "categories.json").read_bytes())
    ont = load_ontology((toy / "ontology.json").read_bytes())
    return docs, graph, ont


def test_build_index_empty():
    index = build_index(Corpus.build([]), TWO_CLASS)
    assert index.records == ()
    assert loads_index(dumps_index(index)) == index


def test_build_index_sorted_and_deterministic(toy):
    docs, graph, ont = _toy_corpus(toy)
    a = build_index(Corpus.build(docs, graph), ont)
    assert [r.doc_id for r in a.records] == sorted(d.id for d in docs)
    rng = random.Random(7)
    for _ in range(5):
        shuffled = docs[:]
        rng.shuffle(shuffled)
        b = build_index(Corpus.build(shuffled, graph), ont, workers=3)
        assert dumps_index(b) == dumps_index(a)


def test_build_index_collects_per_document_errors():
    # global cs_max of 1 with a two-name CS overflows the n_pair bound
    ont = load_ontology(b'{"classes":[{"name":"ab"},{"name":"ac"}]}')
    docs = [Document("bad", "ab", ("ac",)), Document("ok", "zz")]
    index = build_index(Corpus.build(docs, CategoryGraph(["ac"])), ont, IndexParams(d_max=3))
    assert [r.doc_id for r in index.records] == ["ok"]
    assert index.report.errors and index.report.errors[0][0] == "bad"


def test_round_trip(toy, tmp_path):
    docs, graph, ont = _toy_corpus(toy)
    index = build_index(Corpus.build(docs, graph), ont)
    path = tmp_path / "index.jsonl"
    save_index(index, path)
    assert load_index(path) == index
    buf = io.StringIO()
    save_index(index, buf)
    assert load_index(io.StringIO(buf.getvalue())) == index


def test_numbers_have_twelve_significant_digits(toy):
    docs, graph, ont = _toy_corpus(toy)
    text = dumps_index(build_index(Corpus.build(docs, graph), ont))
    import re

    for num in re.findall(r'"(?:sim|w|kd)":([0-9.eE+-]+)', text):
        digits = num.split("e")[0].replace(".", "").lstrip("0")
        assert len(digits) <= 12


def test_load_rejects_wrong_version(toy):
    docs, graph, ont = _toy_corpus(toy)
    text = dumps_index(build_index(Corpus.build(docs, graph), ont)).replace('"version":1', '"version":2', 1)
    with pytest.raises(IndexFormatError, match="version"):
        loads_index(text)


def test_load_rejects_truncation(toy):
    docs, graph, ont = _toy_corpus(toy)
    text = dumps_index(build_index(Corpus.build(docs, graph), ont))
    with pytest.raises(IndexFormatError, match=r"line \d+, column \d+"):
        loads_index(text[: len(text) // 2])
    lines = text.splitlines(keepends=True)
    with pytest.raises(IndexFormatError, match="declares 5 records, found 4"):
        loads_index("".join(lines[:-1]))
    with pytest.raises(IndexFormatError, match="empty"):
        loads_index("")


def test_load_rejects_bad_records():
    header = '{"format":"ontodex-index","version":1,"params":{"k":0.5,"d_max":3,"cs_max_mode":"global","cs_max":1},' \
             '"ontology_hash":"x","corpus_hash":"y","records":1}\n'
    with pytest.raises(IndexFormatError, match="line 2: bad record"):
        loads_index(header + '{"doc_id":"a","sim":1}\n')
    with pytest.raises(IndexFormatError, match="not an ontodex-index"):
        loads_index('{"format":"other"}\n')

import io
import json
import shutil
import subprocess
import sys

import pytest

from ontodex.cli import main
from ontodex.indexer import load_index


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def built(toy, tmp_path):
    index = tmp_path / "index.jsonl"
    code, _, err = run(
        "build-index",
        "--ontology", str(toy / "ontology.json"),
        "--corpus", str(toy / "corpus.jsonl"),
        "--categories", str(toy / "categories.json"),
        "--index", str(index),
    )
    assert code == 0, err
    return index


def test_build_index_report(toy, built):
    assert len(load_index(built)) == 5
    code, _, err = run(
        "build-index",
        "--ontology", str(toy / "ontology.json"),
        "--corpus", str(toy / "corpus.jsonl"),
        "--index", str(built.with_name("no-cats.jsonl")),
    )
    assert code == 0
    assert "documents: 5" in err and "elapsed:" in err


def test_build_index_missing_ontology(toy, tmp_path):
    code, out, err = run("build-index", "--ontology", str(tmp_path / "nope.json"), "--corpus", str(toy / "corpus.jsonl"),
                         "--index", str(tmp_path / "i.jsonl"))
    assert code != 0 and "nope.json" in err and out == ""


def test_build_index_bad_k(toy, tmp_path):
    code, _, err = run("build-index", "--ontology", str(toy / "ontology.json"), "--corpus", str(toy / "corpus.jsonl"),
                       "--index", str(tmp_path / "i.jsonl"), "--k", "1.5")
    assert code != 0 and "k must lie in [0, 1]" in err


def test_build_index_nonzero_when_a_document_fails(tmp_path):
    (tmp_path / "o.json").write_text('{"classes":[{"name":"ab"},{"name":"ac"}]}')
    (tmp_path / "c.jsonl").write_text('{"id":"bad","title":"ab","categories":["ac"],"text":""}\n')
    code, _, err = run("build-index", "--ontology", str(tmp_path / "o.json"), "--corpus", str(tmp_path / "c.jsonl"),
                       "--index", str(tmp_path / "i.jsonl"))
    assert code == 1 and "error: bad:" in err


def test_build_index_corpus_parse_error_names_line(toy, tmp_path):
    (tmp_path / "c.jsonl").write_text('{"id":"a","title":"A"}\n{oops\n')
    code, _, err = run("build-index", "--ontology", str(toy / "ontology.json"), "--corpus", str(tmp_path / "c.jsonl"),
                       "--index", str(tmp_path / "i.jsonl"))
    assert code != 0 and "line 2" in err


def test_build_index_with_stopwords_and_synonyms(toy, tmp_path):
    (tmp_path / "stops.txt").write_text("the\na\n")
    (tmp_path / "syn.json").write_text('{"Volcano Science": ["Geology"]}')
    (tmp_path / "o.json").write_text('{"classes":[{"name":"Volcano Science"}]}')
    code, _, err = run("build-index", "--ontology", str(tmp_path / "o.json"), "--corpus", str(toy / "corpus.jsonl"),
                       "--categories", str(toy / "categories.json"), "--stopwords", str(tmp_path / "stops.txt"),
                       "--synonyms", str(tmp_path / "syn.json"), "--index", str(tmp_path / "i.jsonl"))
    assert code == 0, err
    rec = load_index(tmp_path / "i.jsonl").get("volcano")
    assert [(m.element.name, m.matched_name, m.distance) for m in rec.matches] == [("volcano science", "geology", 0)]


def test_select_fragment(toy, tmp_path):
    (tmp_path / "chain.json").write_text(
        '{"classes":[{"name":"A"},{"name":"B"},{"name":"C"}],'
        '"relations":[{"from":"A","to":"B","kind":"associative"},{"from":"B","to":"C","kind":"associative"}]}'
    )
    code, out, _ = run("select-fragment", "--ontology", str(tmp_path / "chain.json"), "--classes", "A", "--classes", "C")
    assert code == 0 and json.loads(out)["classes"] == ["a", "b", "c"]
    code, out, _ = run("select-fragment", "--ontology", str(tmp_path / "chain.json"), "--classes", "A")
    assert code == 0 and json.loads(out) == {"classes": ["a"], "relations": []}
    code, _, err = run("select-fragment", "--ontology", str(tmp_path / "chain.json"), "--classes", "Q")
    assert code != 0 and "unknown class" in err


def test_select_fragment_spans_long_path(toy):
    code, out, err = run("select-fragment", "--ontology", str(toy / "ontology.json"), "--classes", "Jazz", "--classes", "Concert")
    assert code == 0 and err == ""
    assert json.loads(out)["classes"] == ["concert", "instrument", "jazz", "music", "musician"]


def test_select_fragment_reports_unreachable(tmp_path):
    (tmp_path / "o.json").write_text('{"classes":[{"name":"A"},{"name":"D"}]}')
    code, out, err = run("select-fragment", "--ontology", str(tmp_path / "o.json"), "--classes", "A", "--classes", "D")
    assert code == 0
    assert json.loads(out)["classes"] == ["a", "d"]
    assert "no path between 'a' and 'd'" in err


def _rank(toy, index, *extra):
    return run("rank", "--ontology", str(toy / "ontology.json"), "--index", str(index),
               "--context", str(toy / "context.json"), *extra)


@pytest.mark.parametrize("method", ["graph", "weight"])
def test_rank_fixture(toy, built, method):
    code, out, _ = _rank(toy, built, "--method", method)
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert rows[0]["doc_id"] == "jazz" and rows[-1]["doc_id"] == "volcano"
    assert set(rows[0]) == {"doc_id", "s", "index_sim", "relevance"}


def test_rank_table_format(toy, built):
    code, out, _ = _rank(toy, built, "--format", "table", "--relevance-mode", "blend", "--alpha", "0.3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["rank", "doc_id", "s", "index_sim", "relevance"]
    assert len(lines) == 6


def test_rank_is_deterministic(toy, built):
    assert _rank(toy, built, "--method", "weight")[1] == _rank(toy, built, "--method", "weight")[1]


def test_rank_empty_index(toy, tmp_path):
    (tmp_path / "empty.jsonl").write_text("")
    code, _, _ = run("build-index", "--ontology", str(toy / "ontology.json"), "--corpus", str(tmp_path / "empty.jsonl"),
                     "--index", str(tmp_path / "i.jsonl"))
    assert code == 0
    code, out, _ = _rank(toy, tmp_path / "i.jsonl")
    assert code == 0 and out == ""


def test_rank_unknown_context_class(toy, built, tmp_path):
    (tmp_path / "ctx.json").write_text('{"classes":["Opera"]}')
    code, _, err = run("rank", "--ontology", str(toy / "ontology.json"), "--index", str(built), "--context", str(tmp_path / "ctx.json"))
    assert code != 0 and "opera" in err


def test_inspect_summary(built):
    code, out, _ = run("inspect", "--index", str(built))
    assert code == 0 and "records: 5" in out and "sim min/q1/median/q3/max" in out


def test_inspect_record(built):
    code, out, _ = run("inspect", "--index", str(built), "--doc-id", "jazz")
    assert code == 0
    sim = float(out.split("sim: ")[1].split()[0])
    assert sim == load_index(built).get("jazz").sim
    assert "fragment classes: jazz, music" in out


def test_inspect_unknown_doc(built):
    code, _, err = run("inspect", "--index", str(built), "--doc-id", "nope")
    assert code != 0 and "nope" in err


def test_inspect_truncated_index(built, tmp_path):
    text = built.read_text()
    bad = tmp_path / "bad.jsonl"
    bad.write_text(text[: len(text) - 40])
    code, _, err = run("inspect", "--index", str(bad))
    assert code != 0 and "line" in err


def test_help_documents_formats(capsys):
    with pytest.raises(SystemExit):
        main(["build-index", "--help"])
    text = capsys.readouterr().out
    for flag in ("--ontology", "--corpus", "--categories", "--stopwords", "--synonyms", "--k", "--dmax", "--cs-max-mode"):
        assert flag in text
    assert "ontodex-index" in text


@pytest.mark.skipif(shutil.which("ontodex") is None, reason="console script not installed")
def test_console_script(toy, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ontodex", "select-fragment", "--ontology", str(toy / "ontology.json"), "--classes", "Jazz"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["classes"] == ["jazz"]

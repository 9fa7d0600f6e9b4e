import json
import math
from pathlib import Path

import pytest

import fairmeta

ROOT = Path(__file__).resolve().parents[2]
SUITE = ROOT / "tests" / "fixtures" / "suite"


def test_canonical_text():
    assert fairmeta.canonicalize("  Lung   Tissue ") == "lung tissue"
    assert fairmeta.canonical_field_name("Tissue Type") == "tissue"
    assert fairmeta.tissue_label("PBMC") == "blood"
    assert fairmeta.tissue_label("lung cancer") == "lung"


def test_metrics_and_stats():
    counts = fairmeta.confusion(["a", "b", "c"], ["b", "c", "d", "e"])
    assert counts == fairmeta.ConfusionCounts(2, 1, 2)
    m = fairmeta.metrics(counts)
    assert m["recall"] == 0.5
    assert math.isclose(m["precision"], 2 / 3)
    r = fairmeta.paired_t_test([1, 2, 3, 4], [2, 3, 5, 6])
    assert math.isclose(r["t"], 3 * math.sqrt(3), rel_tol=1e-12)
    assert r["dof"] == 3
    with pytest.raises(fairmeta.DegenerateVariance):
        fairmeta.paired_t_test([1, 2, 3], [2, 3, 4])


def test_corpus_search_and_round_trip():
    path = SUITE / "corpora" / "biosample_lung.cedar.jsonl"
    corpus = fairmeta.Corpus.read(str(path))
    assert len(corpus) == 20
    assert corpus.condition == "cedar"
    assert fairmeta.Corpus.loads(corpus.dumps()).dumps() == path.read_text(encoding="utf-8")
    hits = corpus.search("tissue:lung")
    assert hits
    assert corpus.search("tissue:lung cancer") == []
    with pytest.raises(fairmeta.InvalidQuery):
        corpus.search("tissue")


def test_rule_backend_matches_fixture():
    baseline = fairmeta.Corpus.read(str(SUITE / "corpora" / "geo_ovarian.baseline.jsonl"))
    cedar = fairmeta.standardize_rule(baseline, "cedar",
                                      str(ROOT / "data" / "templates" / "biosample_human.json"),
                                      str(ROOT / "data" / "dictionary" / "biosample_human.txt"))
    expected = (SUITE / "corpora" / "geo_ovarian.cedar.jsonl").read_text(encoding="utf-8")
    assert cedar.dumps() == expected


def test_evaluate_suite_matches_golden():
    report = fairmeta.evaluate_suite(str(SUITE / "suite.toml"))
    assert report == (SUITE / "golden" / "report.json").read_text(encoding="utf-8")
    overall = {row["condition"]: row["recall"] for row in json.loads(report)["overall"]}
    assert overall["baseline"] < overall["dd"] < overall["cedar"]

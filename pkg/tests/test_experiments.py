import pytest

from spreadlab.experiments import (
    CriterionResult, copy_corpus, corpus, explicit_corpus, janson_instances, mixed_corpus,
    tfs_analytic, threshold_rows,
)
from spreadlab.hypergraph import spread_kappa


def test_corpus_reproducible():
    a = corpus(8, 5, 10, seed=1)
    assert a == corpus(8, 5, 10, seed=1)
    assert a != corpus(8, 5, 10, seed=2)
    assert all(len(G.gens) <= 5 and not G.trivial for G in a)
    with pytest.raises(ValueError):
        corpus(8, 0, 3, seed=1)
    with pytest.raises(ValueError):
        corpus(8, 5, -1, seed=1)


def test_mixed_corpus_shape():
    fam = mixed_corpus(30)
    assert fam == mixed_corpus(30)
    assert all(4 <= G.n <= 10 for G in fam)
    # odd indices draw all sets at one size
    for G in fam[1::2]:
        assert len({len(g) for g in G.gens}) == 1
    assert max(len(G.gens) for G in fam) >= 5


def test_named_corpora():
    cc = copy_corpus()
    assert len(cc["matching-K6"]) == 15 and len(cc["star4-K4"]) == 4
    ex = explicit_corpus()
    an = tfs_analytic()
    assert set(an) <= set(ex)
    assert spread_kappa(ex["singletons-5"]).kappa == 5


def test_threshold_rows_fields():
    rows = threshold_rows(corpus(5, 3, 2, seed=0))
    assert [r["index"] for r in rows] == [0, 1]
    assert {"q", "qf", "pc", "ell", "n", "k"} <= set(rows[0])


def test_janson_instances_fixed():
    a = janson_instances(5)
    assert [(H, al) for H, al in a] == janson_instances(5)
    assert all(H.n <= 16 for H, _ in a)


def test_criterion_line():
    r = CriterionResult(3, "demo", True, {"x": 0.5, "skip": [1, 2]})
    assert r.line() == "[PASS] criterion 3: demo (x=0.5)"
    assert CriterionResult(4, "demo", False).line().startswith("[FAIL]")

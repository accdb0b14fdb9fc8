"""Exit criteria, one test each, at the stated tolerances."""

import pytest

from oracles import brute_force_assignment2, brute_force_axial3
from spreadlab import experiments as ex

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def family():
    return ex.mixed_corpus(100)


@pytest.fixture(scope="module")
def rows(family):
    return ex.threshold_rows(family, ex.TOL)


def _brute(w):
    return brute_force_assignment2(w) if w.ndim == 2 else brute_force_axial3(w)[0]


def test_criterion_01_sandwich(rows, report_line):
    res = report_line(ex.criterion_sandwich(rows))
    assert len(rows) == 100
    assert res.passed, res.detail["failing"]


def test_criterion_02_single_set_closed_forms(report_line):
    assert report_line(ex.criterion_closed_forms()).passed


def test_criterion_03_spread_measure_duality(family, rows, report_line):
    res = report_line(ex.criterion_duality(family, rows))
    assert res.passed, res.detail["failing"]


def test_criterion_04_bad_pair_rate(report_line):
    res = report_line(ex.criterion_bad_pairs(ns=(7, 8), Cs=(8, 16), trials=10_000, seed=0))
    assert res.passed, res.detail


def test_criterion_04b_bad_pair_rate_admissible_C(report_line):
    res = report_line(ex.criterion_bad_pairs_admissible(trials=10_000))
    assert res.passed, res.detail


def test_criterion_04s_singletons_exhaustive(report_line):
    assert report_line(ex.singletons_check()).passed


def test_criterion_05_fragmentation(report_line):
    res = report_line(ex.criterion_fragmentation(C=ex.FRAG_C, runs=100, need=90))
    assert res.passed, res.detail


def test_criterion_06_ratio(rows, report_line):
    res = report_line(ex.criterion_ratio(rows, cap=100.0))
    assert res.passed, res.detail


def test_criterion_07_janson(report_line):
    assert report_line(ex.criterion_janson(count=50)).passed


def test_criterion_08_assignment_scaling(report_line):
    res = report_line(ex.criterion_assignment(seed=0, trials=100))
    assert res.passed, res.detail


def test_criterion_09_exact_solvers(report_line):
    res = report_line(ex.criterion_exact_solvers(count=100, brute=_brute))
    assert res.passed, res.detail


def test_criterion_10_spread_formula(report_line):
    res = report_line(ex.criterion_spread_formulas(n_max=5))
    assert res.passed, res.detail


def test_criterion_11_degree_bounded_ratio(report_line):
    res = report_line(ex.criterion_dsp(d=3, max_vertices=9))
    assert res.passed, res.detail


def test_criterion_12_normalized_weight(report_line):
    res = report_line(ex.criterion_tfs(trials=400, seed=11))
    assert res.passed, res.detail

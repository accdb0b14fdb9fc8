from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_min_cover, measure_violations_all, scipy_cover_lp
from spreadlab.exthresh import (
    FractionalCover, InfeasibleWitness, SpreadMeasure, closed_sets, closure_of,
    extract_spread_measure, min_cover_cost, q_expectation_threshold, qf_fractional,
    spread_bound, spread_violations, weak_cover_lp,
)
from spreadlab.hypergraph import InstanceError, min_generators
from spreadlab.measures import p_c

families = st.integers(2, 7).flatmap(lambda n: st.lists(
    st.sets(st.integers(0, n - 1), min_size=1, max_size=4), min_size=1, max_size=6,
).map(lambda es: min_generators(es, n)))
probs = st.fractions(Fraction(1, 50), Fraction(49, 50), max_denominator=50)

TRIANGLE = min_generators([{1, 2}, {1, 3}, {2, 3}], 4)


def test_min_cover_examples():
    G = min_generators([{0, 1, 2}], 3)
    sol = min_cover_cost(G, Fraction(1, 2))
    assert sol.cost == Fraction(1, 8) and sol.cover == ((0, 1, 2),) and sol.optimal
    pair = min_generators([{1}, {2}], 3)
    assert min_cover_cost(pair, Fraction(1, 5)).cost == Fraction(2, 5)
    assert min_cover_cost(pair, Fraction(3, 5)).cost == 1  # the empty set
    # all three 2-sets: 3 p^2 = 0.27 beats {1},{2,3}: p + p^2 = 0.39
    sol = min_cover_cost(TRIANGLE, Fraction(3, 10))
    assert sol.cost == Fraction(27, 100)
    assert sol.cost == brute_min_cover(TRIANGLE.gens, Fraction(3, 10))


@settings(max_examples=80, deadline=None)
@given(families, probs)
def test_min_cover_matches_set_cover_dp(G, p):
    sol = min_cover_cost(G, p)
    assert sol.cost == brute_min_cover(G.gens, p)
    # the reported cover is a cover with that cost
    assert sum(p ** len(S) for S in sol.cover) == sol.cost
    for g in G.gens:
        assert any(set(S) <= set(g) for S in sol.cover)


def test_closed_sets_are_intersections():
    cs = closed_sets(TRIANGLE)
    assert set(cs) == {0b0110, 0b1010, 0b1100, 0b0010, 0b0100, 0b1000, 0}
    for S in cs:
        assert closure_of(TRIANGLE, S) == S


def test_weak_cover_examples():
    G = min_generators([{0, 1, 2}], 3)
    assert weak_cover_lp(G, Fraction(1, 2))[0] == Fraction(1, 8)
    pair = min_generators([{1}, {2}], 3)
    val, cover = weak_cover_lp(pair, Fraction(1, 5))
    assert val == Fraction(2, 5) and cover.feasible(pair)
    assert weak_cover_lp(TRIANGLE, Fraction(3, 10))[0] == Fraction(27, 100)


@settings(max_examples=40, deadline=None)
@given(families, probs)
def test_weak_cover_support_equivalence(G, p):
    closed = weak_cover_lp(G, p, support="closed")[0]
    assert closed == weak_cover_lp(G, p, support="subsets")[0]
    assert closed == weak_cover_lp(G, p, support="all")[0]
    assert float(closed) == pytest.approx(scipy_cover_lp(G.gens, G.n, float(p)), abs=1e-9)
    assert closed <= min_cover_cost(G, p).cost


def test_weak_cover_float_mode():
    G = min_generators([{0, 1}, {1, 2}, {2, 3}, {0, 3}], 4)
    exact = weak_cover_lp(G, Fraction(2, 5), mode="exact")[0]
    approx = weak_cover_lp(G, 0.4, mode="float")[0]
    assert approx == pytest.approx(float(exact), abs=1e-9)


def test_threshold_examples():
    for k in range(1, 5):
        G = min_generators([set(range(k))], k)
        assert q_expectation_threshold(G) == pytest.approx(2 ** (-1 / k), abs=1e-4)
        assert qf_fractional(G) == pytest.approx(2 ** (-1 / k), abs=1e-4)
    pair = min_generators([{1}, {2}], 3)
    assert q_expectation_threshold(pair) == pytest.approx(0.25, abs=1e-4)
    assert qf_fractional(pair) == pytest.approx(0.25, abs=1e-4)
    with pytest.raises(InstanceError):
        q_expectation_threshold(min_generators([set()], 2))
    with pytest.raises(InstanceError):
        qf_fractional(min_generators([set()], 2))


def test_bracket_contract():
    lo, hi = qf_fractional(TRIANGLE, 1e-3, bracket=True)
    assert hi - lo <= 1e-3
    assert weak_cover_lp(TRIANGLE, lo)[0] <= Fraction(1, 2) < weak_cover_lp(TRIANGLE, hi)[0]
    lo, hi = q_expectation_threshold(TRIANGLE, 1e-3, bracket=True)
    assert min_cover_cost(TRIANGLE, lo).cost <= Fraction(1, 2) < min_cover_cost(TRIANGLE, hi).cost


@settings(max_examples=40, deadline=None)
@given(families)
def test_sandwich(G):
    q = q_expectation_threshold(G)
    qf = qf_fractional(G)
    pc = p_c(G).p
    assert q <= qf + 2e-4
    assert qf <= pc + 2e-4


def test_measure_examples():
    k = 3
    G = min_generators([set(range(k))], k)
    q = Fraction(4, 5)
    nu = extract_spread_measure(G, q)
    assert isinstance(nu, SpreadMeasure) and nu.support == ((0, 1, 2),) and nu.mass == (1,)
    n = 5
    sing = min_generators([{i} for i in range(n)], n)
    qf = Fraction(qf_fractional(sing))
    nu = extract_spread_measure(sing, qf + Fraction(1, 5000))
    assert isinstance(nu, SpreadMeasure)
    q = qf + Fraction(1, 5000)
    assert sum(nu.mass) == 1 and all(m <= spread_bound(q, 1, "power") for m in nu.mass)
    wit = extract_spread_measure(sing, 0)
    assert isinstance(wit, InfeasibleWitness) and wit.value < 1
    assert wit.cover.feasible(sing)


@settings(max_examples=40, deadline=None)
@given(families)
def test_measure_at_qf_passes_every_subset(G):
    q = Fraction(qf_fractional(G)) + Fraction(1, 5000)
    nu = extract_spread_measure(G, q)
    assert isinstance(nu, SpreadMeasure)
    assert sum(nu.mass) == 1 and all(m > 0 for m in nu.mass)
    assert measure_violations_all(G.n, nu.support, nu.mass,
                                  lambda s: spread_bound(q, s, "power")) == 0
    assert spread_violations(G, nu, all_subsets=True) == []


@settings(max_examples=30, deadline=None)
@given(families)
def test_doubled_variant_brackets_qf(G):
    lo, hi = qf_fractional(G, 1e-3, bracket=True)
    nu = extract_spread_measure(G, hi, "doubled")
    assert isinstance(nu, SpreadMeasure)
    assert measure_violations_all(G.n, nu.support, nu.mass,
                                  lambda s: spread_bound(hi, s, "doubled")) == 0
    below = lo * Fraction(9, 10)
    res = extract_spread_measure(G, below, "doubled")
    assert isinstance(res, InfeasibleWitness)
    # the witness is a fractional cover whose doubled cost is below one
    cost = sum(w * spread_bound(below, len(S), "doubled") for S, w in res.cover.weights.items())
    assert cost == res.value < 1 and res.cover.feasible(G)


def test_violation_reporting():
    sing = min_generators([{0}, {1}], 2)
    bad = SpreadMeasure(Fraction(1, 10), ((0,), (1,)), (Fraction(1, 2), Fraction(1, 2)))
    assert spread_violations(sing, bad) == [(0,), (1,)]
    assert spread_violations(sing, SpreadMeasure(Fraction(1, 10), ((0,),), (Fraction(1, 2),))) == [()]


def test_fractional_cover_feasibility():
    fc = FractionalCover({(1,): Fraction(1, 2)}, Fraction(1, 2), Fraction(1, 4))
    assert not fc.feasible(min_generators([{1}], 2))

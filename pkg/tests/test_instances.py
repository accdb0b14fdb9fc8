import math
from fractions import Fraction
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from oracles import berge_cycle_exists, brute_embedding_probability, brute_phi, brute_rho
from spreadlab.hypergraph import EnumerationCapError, InstanceError, spread_kappa
from spreadlab.instances import (
    connected_graphs, copy_hypergraph, count_embeddings, dpartite_spread_formula, dsp2_bound,
    dsp_checks, embedding_probability, forest_rho, gen_dpartite_matchings, gen_factor,
    gen_loose_hamilton, gen_matchings, gen_tree, is_forest, p_star, pattern, phi,
    random_antichain, spread_of_copies,
)

small_edge_lists = st.integers(3, 6).flatmap(lambda m: st.lists(
    st.sets(st.integers(0, m - 1), min_size=2, max_size=3).map(lambda s: tuple(sorted(s))),
    min_size=1, max_size=6, unique=True,
))


def double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2))


def test_matching_counts():
    for m in range(1, 6):
        assert len(gen_matchings(2, 2 * m)) == double_factorial(2 * m - 1)
    assert len(gen_matchings(3, 6)) == 10
    H = gen_matchings(2, 6)
    assert H.n == 15 and H.is_uniform() and H.ell == 3
    with pytest.raises(InstanceError):
        gen_matchings(2, 5)
    with pytest.raises(EnumerationCapError):
        gen_matchings(2, 14)


def test_dpartite_counts_and_spread():
    for d, n in ((2, 3), (2, 4), (3, 2), (3, 3)):
        H = gen_dpartite_matchings(d, n)
        assert len(H) == math.factorial(n) ** (d - 1) and H.n == n**d
        assert len(set(H.edges)) == len(H)
        assert spread_kappa(H).kappa == pytest.approx(dpartite_spread_formula(d, n), rel=1e-12)
    with pytest.raises(InstanceError):
        gen_dpartite_matchings(1, 3)


def test_copy_hypergraph_matches_generators():
    pm = gen_factor(2, 6)
    assert copy_hypergraph(pm) == gen_matchings(2, 6)
    assert len(copy_hypergraph(gen_tree("path", 4))) == math.factorial(4) // 2
    assert len(copy_hypergraph(gen_tree("star", 4))) == 4
    assert len(copy_hypergraph(gen_factor(3, 6))) == 10
    assert len(copy_hypergraph(pattern(2, 2, [(0, 1)]), 4)) == 6
    with pytest.raises(InstanceError):
        copy_hypergraph(pm, 4)


def test_copy_spread_by_subsets():
    # over every subgraph, q* is the reciprocal spread of the copy hypergraph
    for H in (gen_tree("star", 4), gen_tree("path", 4), gen_factor(2, 6)):
        q, wit, pr = spread_of_copies(H, size_cap=len(H.edges), connected=False)
        assert q == pytest.approx(1 / spread_kappa(copy_hypergraph(H)).kappa, rel=1e-12)
        assert pr == embedding_probability(H.sub(wit), H)
    q, wit, pr = spread_of_copies(gen_factor(2, 6))
    assert q == pytest.approx(0.2) and len(wit) == 1 and pr == Fraction(1, 5)


def test_pattern_generators():
    assert gen_tree("path", 5).edges == ((0, 1), (1, 2), (2, 3), (3, 4))
    assert gen_tree("dary", 10, 3).degree_bound <= 3
    T = gen_tree("random", 12, 3, seed=5)
    assert len(T.edges) == 11 and T.degree_bound <= 3 and nx.is_tree(T.nx_graph())
    assert T == gen_tree("random", 12, 3, seed=5)
    C = gen_loose_hamilton(3, 6)
    assert C.edges == ((0, 1, 2), (0, 4, 5), (2, 3, 4))
    with pytest.raises(InstanceError):
        gen_loose_hamilton(3, 5)
    with pytest.raises(InstanceError):
        gen_tree("spiral", 4)
    with pytest.raises(InstanceError):
        pattern(2, 3, [(0, 0)])


def test_embedding_examples():
    edge = pattern(2, 2, [(0, 1)])
    pm6 = gen_factor(2, 6)
    assert embedding_probability(edge, pm6) == Fraction(1, 5)
    assert count_embeddings(edge, pm6) == 6
    tri = pattern(2, 3, [(0, 1), (1, 2), (0, 2)])
    assert embedding_probability(tri, pm6) == 0


@pytest.mark.parametrize("S_edges,H_edges,n", [
    ([(0, 1)], [(0, 1), (2, 3), (4, 5)], 6),
    ([(0, 1), (1, 2)], [(0, 1), (1, 2), (2, 3), (3, 0)], 5),
    ([(0, 1), (2, 3)], [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], 5),
    ([(0, 1), (1, 2), (0, 2)], list(combinations(range(4), 2)), 6),
    ([(0, 1, 2)], [(0, 1, 2), (2, 3, 4)], 6),
])
def test_embedding_matches_permutation_average(S_edges, H_edges, n):
    r = len(S_edges[0])
    S = pattern(r, max(v for e in S_edges for v in e) + 1, S_edges)
    H0 = pattern(r, n, H_edges)
    assert embedding_probability(S, H0, n) == brute_embedding_probability(S_edges, H_edges, n)


@settings(max_examples=80, deadline=None)
@given(small_edge_lists)
def test_forest_matches_berge_cycle_search(edges):
    assert is_forest(edges) == (not berge_cycle_exists(edges))
    rho, wit = forest_rho(edges)
    assert rho == brute_rho(edges) and is_forest(list(wit)) and len(wit) == rho


@settings(max_examples=30, deadline=None)
@given(small_edge_lists)
def test_phi_matches_all_subfamilies(edges):
    assert phi(edges).phi == brute_phi(edges)
    assert phi(edges, connected_only=False).phi == brute_phi(edges)


def test_phi_examples():
    tri = [(0, 1), (1, 2), (0, 2)]
    assert phi(tri).phi == Fraction(1, 3) and phi(tri).rho == 2
    two = tri + [(3, 4), (4, 5), (3, 5)]
    assert phi(two).phi == Fraction(1, 3) and phi(two).rho == 4
    assert phi(gen_tree("path", 6).edges).phi == 0
    assert not is_forest([(0, 1), (0, 1)])
    with pytest.raises(InstanceError):
        phi([])


@pytest.mark.parametrize("d", [2, 3])
def test_connected_graph_counts_against_atlas(d):
    want = {}
    for g in nx.graph_atlas_g()[1:]:
        if nx.is_connected(g) and max(dict(g.degree()).values(), default=0) <= d:
            want[g.number_of_nodes()] = want.get(g.number_of_nodes(), 0) + 1
    got = {}
    for g in connected_graphs(7, d):
        got[g.number_of_nodes()] = got.get(g.number_of_nodes(), 0) + 1
    assert got == want


def test_dsp_extremal_cases():
    assert dsp2_bound(3) == Fraction(8, 15)
    rep = dsp_checks(2, max_vertices=6, dsp1_max_vertices=4)
    assert rep.dsp2_violations == 0 and rep.extremal_attained
    assert rep.min_ratio == rep.bound == Fraction(3, 4)
    rep = dsp_checks(4, max_vertices=6, dsp1_max_vertices=3)
    assert rep.dsp2_violations == 0 and rep.extremal_attained and rep.min_ratio == rep.bound
    assert rep.dsp1_violations == 0


def test_p_star():
    assert p_star(2, 100) == pytest.approx(
        math.factorial(2) ** (1 / 3) * 100 ** (-2 / 3) * math.log(100) ** (1 / 3))
    with pytest.raises(ValueError):
        p_star(0, 10)


def test_random_antichain():
    a = random_antichain(8, 5, 3, seed=1)
    assert a == random_antichain(8, 5, 3, seed=1)
    assert len(a.gens) <= 5 and all(1 <= len(g) <= 3 for g in a.gens)
    b = random_antichain(8, 5, 3, seed=1, min_size=3)
    assert all(len(g) == 3 for g in b.gens)
    with pytest.raises(ValueError):
        random_antichain(8, 0, 3, seed=1)
    with pytest.raises(ValueError):
        random_antichain(8, 5, 3, seed=1, min_size=4)

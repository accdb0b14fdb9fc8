import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_kappa
from spreadlab.hypergraph import (
    EnumerationCapError, Hypergraph, InstanceError, ell_bound, generators_of, is_kappa_spread,
    load_hypergraph, make_hypergraph, min_generators, spread_kappa, uniformize,
    uniformize_min_multiplicity, up_closure_contains,
)
from spreadlab.instances import gen_dpartite_matchings


def hypergraphs(max_n=6, max_edges=7):
    return st.integers(1, max_n).flatmap(lambda n: st.lists(
        st.sets(st.integers(0, n - 1), min_size=1), min_size=1, max_size=max_edges,
    ).map(lambda es: make_hypergraph(n, es)))


def test_make_hypergraph_examples():
    H = make_hypergraph(3, [{0, 1}, {1, 2}])
    assert len(H) == 2 and H.n == 3
    assert make_hypergraph(2, [{0}, {0}]).edges == ((0,), (0,))
    with pytest.raises(InstanceError):
        make_hypergraph(2, [{5}])
    with pytest.raises(InstanceError):
        make_hypergraph(2, [[]])


def test_json_round_trip(tmp_path):
    H = make_hypergraph(4, [(0, 3), (1,), (1,)])
    p = tmp_path / "h.json"
    p.write_text(json.dumps(H.to_json()))
    assert load_hypergraph(p) == H
    p.write_text("{oops")
    with pytest.raises(InstanceError, match="invalid JSON"):
        load_hypergraph(p)
    p.write_text('{"edges": [[0]]}')
    with pytest.raises(InstanceError):
        load_hypergraph(p)


def test_up_closure_contains():
    H = make_hypergraph(4, [(1, 2)])
    assert up_closure_contains(H, {1, 2, 3})
    assert not up_closure_contains(H, {1, 3})
    assert not up_closure_contains(Hypergraph(4, ()), {0, 1, 2, 3})


def test_min_generators_examples():
    assert min_generators([{1}, {1, 2}]).gens == ((1,),)
    assert min_generators([{1, 2}, {2, 3}]).gens == ((1, 2), (2, 3))
    assert min_generators([{1}, {1}]).gens == ((1,),)
    assert min_generators([set(), {1}]).trivial
    assert not min_generators([{1}, {0, 2}]).trivial
    with pytest.raises(InstanceError):
        min_generators([{4}], n=3)


def test_ell_bound():
    assert ell_bound(min_generators([{1}])) == 1
    assert ell_bound(min_generators([{1}, {2, 3}])) == 2
    from spreadlab.instances import gen_matchings
    assert ell_bound(generators_of(gen_matchings(2, 6))) == 3


@given(st.lists(st.sets(st.integers(0, 6), min_size=1), min_size=1, max_size=8))
def test_min_generators_is_antichain_with_same_upset(edges):
    G = min_generators(edges, 7)
    masks = G.masks
    for i, a in enumerate(masks):
        for j, b in enumerate(masks):
            assert i == j or a & ~b != 0
    H = make_hypergraph(7, edges)
    for T in range(1 << 7):
        tset = [v for v in range(7) if T >> v & 1]
        assert up_closure_contains(H, tset) == up_closure_contains(G.as_hypergraph(), tset)


def test_spread_examples():
    sing = make_hypergraph(5, [(i,) for i in range(5)])
    cert = spread_kappa(sing)
    assert cert.kappa == 5 and cert.count == 1 and len(cert.witness) == 1
    assert spread_kappa(make_hypergraph(4, [(0, 1, 2, 3)])).kappa == 1
    perm3 = gen_dpartite_matchings(2, 3)
    cert = spread_kappa(perm3)
    assert len(perm3) == 6
    assert cert.ratio_table[1] == pytest.approx(3)
    assert cert.ratio_table[2] == pytest.approx(math.sqrt(6))
    assert cert.kappa == pytest.approx(6 ** (1 / 3)) and len(cert.witness) == 3


@settings(max_examples=80, deadline=None)
@given(hypergraphs())
def test_spread_matches_all_subset_enumeration(H):
    cert = spread_kappa(H)
    kappa, c, s = brute_force_kappa(H)
    # (N/c1)^(1/s1) == (N/c)^(1/s)  iff  N^s c^s1 == N^s1 c1^s
    N, c1, s1 = len(H), cert.count, len(cert.witness)
    assert N**s * c**s1 == N**s1 * c1**s
    assert cert.kappa == pytest.approx(kappa, rel=1e-12)
    assert s1 <= s  # ties go to the smallest size


@settings(max_examples=40, deadline=None)
@given(hypergraphs())
def test_is_kappa_spread_threshold(H):
    k = spread_kappa(H).kappa
    assert is_kappa_spread(H, 1)[0]
    ok, wit = is_kappa_spread(H, k * (1 + 1e-9))
    assert not ok and wit is not None


def test_is_kappa_spread_examples():
    sing = make_hypergraph(5, [(i,) for i in range(5)])
    assert is_kappa_spread(sing, 5) == (True, None)
    ok, wit = is_kappa_spread(sing, 5.01)
    assert not ok and len(wit) == 1


def test_spread_errors():
    with pytest.raises(InstanceError):
        spread_kappa(Hypergraph(3, ()))
    with pytest.raises(EnumerationCapError):
        spread_kappa(make_hypergraph(30, [tuple(range(30))]), cap=1000)


def test_uniformize_examples():
    U = uniformize(make_hypergraph(1, [(0,)]), 2, 2)
    assert U.edges == ((0, 1), (0, 2)) and U.n == 3
    H = make_hypergraph(4, [(0, 1), (2, 3)])
    assert uniformize(H, 2, 1) == H
    with pytest.raises(InstanceError):
        uniformize(H, 1, 1)
    sing = make_hypergraph(3, [(0,), (1,), (2,)])
    out = uniformize(sing, 2, 8)
    assert out.is_uniform() and len(out) == 24
    assert spread_kappa(out).exact_ge(spread_kappa(sing))


def test_uniformize_min_multiplicity():
    sing = make_hypergraph(3, [(0,), (1,), (2,)])
    M, U = uniformize_min_multiplicity(sing, 2)
    assert spread_kappa(U).exact_ge(spread_kappa(sing))
    if M > 1:
        assert not spread_kappa(uniformize(sing, 2, M - 1)).exact_ge(spread_kappa(sing))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from oracles import brute_force_axial3
from spreadlab import _pykernels, kernels

BACKENDS = kernels.backends()
masks_st = st.lists(st.integers(0, (1 << 12) - 1), min_size=1, max_size=40)


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_popcount(name):
    a = np.array([0, 1, 3, 255, (1 << 63) + 1], dtype=np.uint64)
    assert BACKENDS[name].popcount(a).tolist() == [0, 1, 2, 8, 2]


@settings(max_examples=60, deadline=None)
@given(masks_st)
def test_first_subset_index_definition(masks):
    arr = np.array(masks, dtype=np.uint64)
    want = [next(i for i, a in enumerate(masks) if a & ~b == 0) for b in masks]
    for mod in BACKENDS.values():
        assert mod.first_subset_index(arr).tolist() == want


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, (1 << 8) - 1), min_size=1, max_size=6))
def test_profiles_by_enumeration(gens):
    n = 8
    arr = np.array(gens, dtype=np.uint64)
    want = [0] * (n + 1)
    for T in range(1 << n):
        if any(g & ~T == 0 for g in gens):
            want[bin(T).count("1")] += 1
    for mod in BACKENDS.values():
        assert mod.upset_profile(arr, n).tolist() == want
    # the union profile's polynomial agrees with the upset profile at a few rational points
    from fractions import Fraction
    for mod in BACKENDS.values():
        coeffs = mod.union_profile(arr, n).tolist()
        for p in (Fraction(1, 3), Fraction(3, 4)):
            lhs = sum(a * p**k for k, a in enumerate(coeffs))
            rhs = sum(c * p**k * (1 - p) ** (n - k) for k, c in enumerate(want))
            assert lhs == rhs


@pytest.mark.parametrize("seed", range(5))
def test_axial3_dp_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 4
    w = rng.exponential(size=(n, n, n))
    want, _ = brute_force_axial3(w)
    for mod in BACKENDS.values():
        val, js, ks = mod.axial3_dp(w)
        assert sorted(js) == list(range(n)) and sorted(ks) == list(range(n))
        assert sum(w[i, js[i], ks[i]] for i in range(n)) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 7, 40, 120])
def test_hungarian_matches_scipy(n):
    w = np.random.default_rng(n).exponential(size=(n, n))
    r, c = linear_sum_assignment(w)
    want = w[r, c].sum()
    for mod in BACKENDS.values():
        cols, u, v = mod.hungarian(w)
        assert sorted(cols.tolist()) == list(range(n))
        assert w[np.arange(n), cols].sum() == pytest.approx(want, rel=1e-12)
        assert (w - u[:, None] - v[None, :]).min() >= -1e-9


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
def test_backends_bit_identical():
    rng = np.random.default_rng(0)
    masks = rng.integers(0, 1 << 20, size=500).astype(np.uint64)
    cy = BACKENDS["cython"]
    assert np.array_equal(cy.first_subset_index(masks), _pykernels.first_subset_index(masks))
    gens = masks[:10]
    assert np.array_equal(cy.upset_profile(gens, 20), _pykernels.upset_profile(gens, 20))
    assert np.array_equal(cy.union_profile(gens, 20), _pykernels.union_profile(gens, 20))
    w = rng.exponential(size=(6, 6, 6))
    a, b = cy.axial3_dp(w), _pykernels.axial3_dp(w)
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])

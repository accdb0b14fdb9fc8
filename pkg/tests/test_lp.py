from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from spreadlab.lp import EXACT_VAR_CAP, LPError, _check_farkas, lp_solve


def test_examples():
    r = lp_solve([1], A_ub=[[-1]], b_ub=[-3])
    assert r.optimal and r.fun == 3 and r.x == [3]
    r = lp_solve([0], A_ub=[[1], [-1]], b_ub=[0, -1])
    assert r.status == "infeasible"
    assert _check_farkas([[1], [-1]], [0, -1], [], [], r.farkas_ub, r.farkas_eq)


def test_unbounded_ray():
    c = [-1, 0]
    A = [[1, -1]]
    r = lp_solve(c, A_ub=A, b_ub=[1])
    assert r.status == "unbounded"
    ray = r.ray
    assert all(v >= 0 for v in ray)
    assert sum(ci * vi for ci, vi in zip(c, ray)) < 0
    assert sum(a * v for a, v in zip(A[0], ray)) <= 0


def test_degenerate_tie_is_deterministic():
    c = [-1, -1, -1]
    A = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
    runs = {(lp_solve(c, A, [1, 1, 1]).basis) for _ in range(3)}
    assert len(runs) == 1
    assert lp_solve(c, A, [1, 1, 1]).fun == Fraction(-3, 2)


@pytest.mark.parametrize("seed", range(60))
def test_random_against_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 6)), int(rng.integers(1, 7))
    A = rng.integers(-3, 4, (m, n))
    b = rng.integers(-2, 5, m)
    c = rng.integers(-2, 5, n)
    Ae = rng.integers(-2, 3, (1, n))
    be = rng.integers(0, 3, 1)
    r = lp_solve(c.tolist(), A.tolist(), b.tolist(), Ae.tolist(), be.tolist())
    s = linprog(c, A_ub=A, b_ub=b, A_eq=Ae, b_eq=be, method="highs")
    want = {0: "optimal", 2: "infeasible", 3: "unbounded"}[s.status]
    assert r.status == want
    if want == "optimal":
        assert float(r.fun) == pytest.approx(s.fun, abs=1e-9)
        # exact strong duality and dual sign convention
        assert sum(y * v for y, v in zip(r.duals_ub, b)) + sum(y * v for y, v in zip(r.duals_eq, be)) == r.fun
        assert all(y <= 0 for y in r.duals_ub)
        x = r.x
        assert all(v >= 0 for v in x)
        assert all(sum(a * v for a, v in zip(row, x)) <= bb for row, bb in zip(A.tolist(), b))


def test_fraction_coefficients():
    p = Fraction(1, 3)
    # min p y1 + p y2 + y0  s.t. y1 + y0 >= 1, y2 + y0 >= 1
    r = lp_solve([1, p, p], A_ub=[[-1, -1, 0], [-1, 0, -1]], b_ub=[-1, -1])
    assert r.fun == Fraction(2, 3)
    assert sum(-y for y in r.duals_ub) == Fraction(2, 3)


def test_float_mode_and_gap():
    r = lp_solve([1, 1], A_ub=[[-1, -2]], b_ub=[-2], mode="float")
    assert r.optimal and r.fun == pytest.approx(1.0) and r.gap < 1e-9
    r = lp_solve([0], A_ub=[[1], [-1]], b_ub=[0, -1], mode="float")
    assert r.status == "infeasible" and r.farkas_ub is not None


def test_caps_and_errors():
    with pytest.raises(LPError):
        lp_solve([0] * (EXACT_VAR_CAP + 1), A_ub=[[0] * (EXACT_VAR_CAP + 1)], b_ub=[0])
    with pytest.raises(ValueError):
        lp_solve([1, 2], A_ub=[[1]], b_ub=[1])
    with pytest.raises(ValueError):
        lp_solve([1], mode="magic")

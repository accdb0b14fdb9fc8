"""Expectation thresholds: integral covers (q), fractional covers (q_f) and
the spread measures dual to fractional covers.

Cover members may be taken to be *closed* sets, i.e. intersections of
generators. Replacing a member ``S`` by the intersection of all generators
containing it covers exactly the same generators and costs no more, because
``p^|S|`` does not increase when ``S`` grows. The empty set, which covers
everything at cost 1, is always a candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from spreadlab.hypergraph import (
    Edge,
    EnumerationCapError,
    InstanceError,
    MinGenerators,
    mask_to_tuple,
)
from spreadlab.lp import lp_solve

HALF = Fraction(1, 2)
CANDIDATE_CAP = 10**5
LP_VAR_CAP = 10**4
EXACT_LP_MAX_N = 12
VARIANTS = ("power", "doubled")


@dataclass(frozen=True)
class CoverSolution:
    cover: tuple[Edge, ...]
    cost: Fraction | float
    optimal: bool


@dataclass(frozen=True)
class FractionalCover:
    weights: dict[Edge, Fraction | float]
    p: Fraction | float
    cost_at: Fraction | float

    def feasible(self, G: MinGenerators) -> bool:
        return all(
            sum((w for S, w in self.weights.items() if set(S) <= set(T)), 0) >= 1 for T in G.gens
        )


@dataclass(frozen=True)
class SpreadMeasure:
    q: Fraction | float
    support: tuple[Edge, ...]
    mass: tuple[Fraction | float, ...]
    variant: str = "power"

    def to_json(self) -> dict:
        return {
            "q": float(self.q),
            "variant": self.variant,
            "support": [list(s) for s in self.support],
            "mass": [float(m) for m in self.mass],
        }


@dataclass(frozen=True)
class InfeasibleWitness:
    """A fractional cover ``y`` with ``sum y_S b_S < 1``; no spread measure can exist."""

    q: Fraction | float
    cover: FractionalCover
    value: Fraction | float
    variant: str = "power"


def _check_nontrivial(G: MinGenerators) -> None:
    if G.trivial:
        raise InstanceError("trivial family (empty generator): every p is too large")


def closed_sets(G: MinGenerators, cap: int = CANDIDATE_CAP) -> list[int]:
    """All intersections of nonempty subfamilies of generators, plus the empty set.

    Sorted by size descending, then by lexicographic vertex tuple.
    """
    seen = set(G.masks)
    frontier = list(seen)
    while frontier:
        new = []
        for s in frontier:
            for g in G.masks:
                t = s & g
                if t not in seen:
                    seen.add(t)
                    new.append(t)
                    if len(seen) > cap:
                        raise EnumerationCapError(f"more than {cap} candidate cover sets")
        frontier = new
    seen.add(0)
    return sorted(seen, key=lambda m: (-m.bit_count(), mask_to_tuple(m)))


def _pow(p, k: int):
    return p**k


def min_cover_cost(G: MinGenerators, p, cap: int = CANDIDATE_CAP,
                   node_cap: int = 10**7) -> CoverSolution:
    """Cheapest family ``C`` with every generator containing a member of ``C``.

    Cost is ``sum p^|S|``; exact for ``Fraction`` input.
    """
    cands = closed_sets(G, cap)
    k = len(G)
    gm = G.masks
    covers = [sum(1 << i for i, g in enumerate(gm) if c & ~g == 0) for c in cands]
    cost = [_pow(p, c.bit_count()) for c in cands]
    by_gen = [[j for j in range(len(cands)) if covers[j] >> i & 1] for i in range(k)]
    for lst in by_gen:
        lst.sort(key=lambda j: cost[j])  # stable: ties keep the size/lex order
    order = sorted(range(k), key=lambda i: (len(by_gen[i]), i))
    gen_cost = [_pow(p, g.bit_count()) for g in gm]
    full = (1 << k) - 1
    one = cost[cands.index(0)]

    all_gens = sum(gen_cost[1:], gen_cost[0])
    if all_gens < one:
        best_cost, best = all_gens, [cands.index(g) for g in gm]
    else:
        best_cost, best = one, [cands.index(0)]
    nodes = 0
    exhausted = True

    def lower_bound(unc: int):
        used = 0
        lb = 0
        for i in order:
            if unc >> i & 1 and gm[i] & used == 0:
                used |= gm[i]
                lb += gen_cost[i]
        return lb if lb < one else one

    def dfs(unc: int, acc, chosen: list[int]) -> None:
        nonlocal best_cost, best, nodes, exhausted
        if unc == 0:
            if acc < best_cost:
                best_cost, best = acc, list(chosen)
            return
        nodes += 1
        if nodes > node_cap:
            exhausted = False
            return
        if acc + lower_bound(unc) >= best_cost:
            return
        i = next(i for i in order if unc >> i & 1)
        for j in by_gen[i]:
            if acc + cost[j] >= best_cost:
                break
            chosen.append(j)
            dfs(unc & ~covers[j], acc + cost[j], chosen)
            chosen.pop()

    dfs(full, 0 * one, [])
    cover = tuple(sorted((mask_to_tuple(cands[j]) for j in best), key=lambda e: (len(e), e)))
    return CoverSolution(cover, best_cost, exhausted)


def _bisect_max(pred, tol: float) -> tuple[Fraction, Fraction]:
    """Dyadic bisection for ``max {p in [0,1] : pred(p)}`` with ``pred`` monotone
    decreasing. Returns ``(lo, hi)`` with ``pred(lo)`` true and ``hi - lo <= tol``."""
    lo, hi = Fraction(0), Fraction(1)
    if pred(hi):
        return hi, hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def q_expectation_threshold(G: MinGenerators, tol: float = 1e-4, half=HALF,
                            bracket: bool = False):
    """Largest ``p`` (to ``tol``, from below) at which ``<G>`` is ``p``-small."""
    _check_nontrivial(G)
    lo, hi = _bisect_max(lambda p: min_cover_cost(G, p).cost <= half, tol)
    return (lo, hi) if bracket else float(lo)


def _lp_mode(G: MinGenerators, mode: str) -> str:
    if mode == "auto":
        return "exact" if G.n <= EXACT_LP_MAX_N else "float"
    return mode


def _support_masks(G: MinGenerators, support: str) -> list[int]:
    if support == "closed":
        return closed_sets(G, LP_VAR_CAP)
    if support == "subsets":
        out = {0}
        for g in G.gens:
            for r in range(1, len(g) + 1):
                for S in combinations(g, r):
                    out.add(sum(1 << v for v in S))
                    if len(out) > LP_VAR_CAP:
                        raise EnumerationCapError(f"more than {LP_VAR_CAP} LP variables")
        return sorted(out, key=lambda m: (-m.bit_count(), mask_to_tuple(m)))
    if support == "all":
        if 1 << G.n > LP_VAR_CAP:
            raise EnumerationCapError(f"2^{G.n} LP variables exceed {LP_VAR_CAP}")
        return sorted(range(1 << G.n), key=lambda m: (-m.bit_count(), mask_to_tuple(m)))
    raise ValueError(f"unknown support {support!r}")


def _cover_lp(G: MinGenerators, masks: list[int], costs: list, mode: str):
    A = [[-1 if m & ~g == 0 else 0 for m in masks] for g in G.masks]
    b = [-1] * len(G)
    return lp_solve(costs, A_ub=A, b_ub=b, mode=mode)


def weak_cover_lp(G: MinGenerators, p, mode: str = "auto",
                  support: str = "closed") -> tuple[Fraction | float, FractionalCover]:
    """``min sum g(S) p^|S|`` over fractional covers ``g`` of the generators."""
    mode = _lp_mode(G, mode)
    masks = _support_masks(G, support)
    pp = Fraction(p) if mode == "exact" else float(p)
    costs = [pp ** m.bit_count() for m in masks]
    res = _cover_lp(G, masks, costs, mode)
    if not res.optimal:
        raise RuntimeError(f"cover LP returned {res.status}")
    if mode == "float" and res.gap > 1e-9:
        raise RuntimeError(f"float LP duality gap {res.gap:.3g} exceeds 1e-9")
    weights = {mask_to_tuple(m): w for m, w in zip(masks, res.x) if w}
    return res.fun, FractionalCover(weights, pp, res.fun)


def qf_fractional(G: MinGenerators, tol: float = 1e-4, half=HALF, mode: str = "auto",
                  bracket: bool = False):
    """Largest ``p`` (to ``tol``, from below) at which ``<G>`` is weakly ``p``-small."""
    _check_nontrivial(G)
    lo, hi = _bisect_max(lambda p: weak_cover_lp(G, p, mode)[0] <= half, tol)
    return (lo, hi) if bracket else float(lo)


def spread_bound(q, size: int, variant: str):
    """Allowed mass on ``<S>`` for ``|S| = size``."""
    if size == 0:
        return 1
    if variant == "power":
        return (2 * q) ** size
    if variant == "doubled":
        return 2 * q**size
    raise ValueError(f"unknown variant {variant!r}")


def extract_spread_measure(G: MinGenerators, q, variant: str = "power", mode: str = "auto"):
    """A probability measure on generators with ``nu(<S>) <= b(S)`` for all ``S``,
    or an :class:`InfeasibleWitness`.

    ``b(S) = (2q)^|S|`` for ``variant="power"`` and ``2 q^|S|`` for
    ``variant="doubled"``. Solved as the covering LP
    ``min sum b(S) y_S`` s.t. every generator is fractionally covered; the
    optimum equals 1 exactly when a measure exists, and the measure is read
    off the covering rows' multipliers.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    mode = _lp_mode(G, mode)
    qq = Fraction(q) if mode == "exact" else float(q)
    # One column per closure class, carrying the class's smallest bound.
    rep: dict[int, tuple] = {}
    for S in _support_masks(G, "subsets"):
        cl = closure_of(G, S)
        key = (spread_bound(qq, S.bit_count(), variant), mask_to_tuple(S))
        if cl not in rep or key < rep[cl][0]:
            rep[cl] = (key, S)
    masks = sorted((S for _, S in rep.values()), key=lambda m: (-m.bit_count(), mask_to_tuple(m)))
    costs = [spread_bound(qq, m.bit_count(), variant) for m in masks]
    res = _cover_lp(G, masks, costs, mode)
    if not res.optimal:
        raise RuntimeError(f"dual LP returned {res.status}")
    value = res.fun
    feasible = value >= 1 if mode == "exact" else value >= 1 - 1e-9
    if not feasible:
        weights = {mask_to_tuple(m): w for m, w in zip(masks, res.x) if w}
        return InfeasibleWitness(qq, FractionalCover(weights, qq, value), value, variant)
    nu = [-y for y in res.duals_ub]
    if mode == "float":
        nu = [max(0.0, v) for v in nu]
        tot = sum(nu)
        nu = [v / tot for v in nu]
    support = tuple(g for g, v in zip(G.gens, nu) if v)
    mass = tuple(v for v in nu if v)
    measure = SpreadMeasure(qq, support, mass, variant)
    bad = spread_violations(G, measure)
    if bad:
        raise RuntimeError(f"extracted measure violates {len(bad)} spread constraints")
    return measure


def closure_of(G: MinGenerators, S: int) -> int:
    """Intersection of all generators containing ``S`` (``-1`` if there are none)."""
    out = -1
    for g in G.masks:
        if S & ~g == 0:
            out &= g
    return out


def spread_violations(G: MinGenerators, nu: SpreadMeasure, all_subsets: bool = False,
                      tol: float = 1e-9) -> list[Edge]:
    """Sets ``S`` with ``nu(<S>) > b(S)``.

    Sets not inside any support element have measure 0, so only subsets of
    support elements are checked unless ``all_subsets`` asks for all of ``2^[n]``.
    """
    if sum(nu.mass) != 1 and not (isinstance(nu.mass[0], float) and abs(sum(nu.mass) - 1) <= tol):
        return [()]
    if any(m < 0 for m in nu.mass):
        return [()]
    smasks = [sum(1 << v for v in s) for s in nu.support]
    if all_subsets:
        if G.n > 20:
            raise EnumerationCapError("all-subsets check needs n <= 20")
        universe = range(1 << G.n)
    else:
        uni = set()
        for s in nu.support:
            for r in range(len(s) + 1):
                for c in combinations(s, r):
                    uni.add(sum(1 << v for v in c))
        universe = sorted(uni)
    exact = not isinstance(nu.mass[0], float)
    bad = []
    for S in universe:
        load = sum((m for m, t in zip(nu.mass, smasks) if S & ~t == 0), 0)
        bound = spread_bound(nu.q, S.bit_count(), nu.variant)
        if (load > bound) if exact else (load > bound + tol):
            bad.append(mask_to_tuple(S))
    return bad

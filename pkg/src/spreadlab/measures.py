"""Product measure of increasing families, the uniform-size model, and p_c."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import stats

from spreadlab import kernels
from spreadlab.hypergraph import EnumerationCapError, Hypergraph, InstanceError, MinGenerators
from spreadlab.rng import trial_rng, wilson_interval

EXACT_CAP = 20
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ThresholdEstimate:
    """A probability with its confidence bounds (bounds equal ``p`` when exact)."""

    p: float
    method: str
    ci_low: float
    ci_high: float
    trials: int = 0
    seed: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.ci_low <= self.p <= self.ci_high <= 1.0):
            raise ValueError(f"inconsistent estimate {self}")

    @classmethod
    def exact(cls, p: float) -> "ThresholdEstimate":
        p = float(p)
        return cls(p, "exact", p, p)


@lru_cache(maxsize=256)
def _upset_counts(G: MinGenerators) -> tuple[int, ...]:
    gens = np.array(G.masks, dtype=np.uint64)
    return tuple(int(c) for c in kernels.upset_profile(gens, G.n))


@lru_cache(maxsize=256)
def _union_coeffs(G: MinGenerators) -> tuple[int, ...]:
    if G.n <= 64:
        gens = np.array(G.masks, dtype=np.uint64)
        return tuple(int(c) for c in kernels.union_profile(gens, G.n))
    coeffs = [0] * (G.n + 1)
    unions = [0]
    signs = [-1]
    for g in G.masks:
        unions += [u | g for u in unions]
        signs += [-s for s in signs]
    for u, s in zip(unions[1:], signs[1:]):
        coeffs[u.bit_count()] += s
    return tuple(coeffs)


def exact_evaluator(G: MinGenerators, exact_cap: int = EXACT_CAP) -> Callable:
    """``p -> mu_p(<G>)`` by size profile (n <= cap) or inclusion-exclusion (|G| <= cap).

    Fractions in give Fractions out.
    """
    if G.n <= exact_cap:
        counts = _upset_counts(G)
        n = G.n

        def mu(p):
            q = 1 - p
            return sum(c * p**k * q ** (n - k) for k, c in enumerate(counts) if c)

        return mu
    if len(G) <= exact_cap:
        coeffs = _union_coeffs(G)

        def mu(p):
            exact = isinstance(p, (Fraction, int))
            pp = Fraction(p)
            val = sum(a * pp**k for k, a in enumerate(coeffs) if a)
            return val if exact else float(val)

        return mu
    raise EnumerationCapError(
        f"exact mu_p needs n <= {exact_cap} or at most {exact_cap} generators "
        f"(got n={G.n}, {len(G)} generators); use mu_p_mc"
    )


def mu_p_exact(G: MinGenerators, p, exact_cap: int = EXACT_CAP):
    return exact_evaluator(G, exact_cap)(p)


def hitting_thresholds(G: MinGenerators, trials: int, seed: int) -> np.ndarray:
    """Per trial, the least ``p`` at which the coupled ``X_p`` enters ``<G>``.

    Trial ``t`` draws ``u ~ U[0,1)^n`` and takes ``X_p = {x : u_x < p}``; the
    family is hit iff ``p`` exceeds ``min_g max_{x in g} u_x``.
    """
    inc = np.zeros((len(G), G.n), dtype=bool)
    for i, g in enumerate(G.gens):
        inc[i, list(g)] = True
    empty = ~inc.any(axis=1)
    out = np.empty(trials)
    for t in range(trials):
        u = trial_rng(seed, t).random(G.n)
        per_gen = np.where(inc, u, -np.inf).max(axis=1)
        per_gen[empty] = -np.inf
        out[t] = per_gen.min()
    return out


def mu_p_mc(G: MinGenerators, p: float, trials: int, seed: int) -> ThresholdEstimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tau = hitting_thresholds(G, trials, seed)
    hits = int(np.count_nonzero(tau < p))
    lo, hi = wilson_interval(hits, trials)
    return ThresholdEstimate(hits / trials, "monte-carlo", min(lo, hits / trials),
                             max(hi, hits / trials), trials, seed)


def _nearest_int(m) -> int:
    return int(math.floor(m + 0.5))


def prob_Xm_hits(H: Hypergraph, m, trials: int = 10_000, seed: int = 0,
                 exact_limit: int = 10**6, exact_cap: int = EXACT_CAP) -> ThresholdEstimate:
    """``P(X_m in <H>)`` for a uniform ``m``-subset ``X_m`` of ``[n]``."""
    m = _nearest_int(m)
    n = H.n
    if not 0 <= m <= n:
        raise ValueError(f"m={m} outside [0, {n}]")
    masks = H.masks
    if not masks:
        return ThresholdEstimate.exact(0.0)
    if n <= exact_cap:
        counts = kernels.upset_profile(np.array(masks, dtype=np.uint64), n)
        return ThresholdEstimate.exact(Fraction(int(counts[m]), math.comb(n, m)))
    if math.comb(n, m) <= exact_limit:
        hit = 0
        for T in combinations(range(n), m):
            t = 0
            for v in T:
                t |= 1 << v
            hit += any(e & ~t == 0 for e in masks)
        return ThresholdEstimate.exact(Fraction(hit, math.comb(n, m)))
    hit = 0
    for i in range(trials):
        T = trial_rng(seed, i).choice(n, size=m, replace=False)
        t = 0
        for v in T:
            t |= 1 << int(v)
        hit += any(e & ~t == 0 for e in masks)
    lo, hi = wilson_interval(hit, trials)
    ph = hit / trials
    return ThresholdEstimate(ph, "monte-carlo", min(lo, ph), max(hi, ph), trials, seed)


def p_c(G: MinGenerators, tol: float = 1e-4, trials: int = 4000, seed: int = 0,
        exact_cap: int = EXACT_CAP, max_iter: int = 60) -> ThresholdEstimate:
    """The ``p`` with ``mu_p(<G>) = 1/2``."""
    if G.trivial:
        raise InstanceError("trivial family (empty generator): mu_p = 1 for every p")
    try:
        mu = exact_evaluator(G, exact_cap)
    except EnumerationCapError:
        return _p_c_mc(G, trials, seed)
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mu(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    return ThresholdEstimate.exact(0.5 * (lo + hi))


def _p_c_mc(G: MinGenerators, trials: int, seed: int) -> ThresholdEstimate:
    # mu_hat(p) = #{tau < p} / T is monotone in p, so inverting the order
    # statistics is the same as bisecting on the coupled estimate.
    tau = np.sort(hitting_thresholds(G, trials, seed))
    T = len(tau)
    k_star = math.ceil(T / 2)
    k_lo = next(k for k in range(1, T + 1) if wilson_interval(k, T)[1] >= 0.5)
    k_hi = next((k for k in range(1, T + 1) if wilson_interval(k, T)[0] > 0.5), None)
    est = float(np.clip(tau[k_star - 1], 0.0, 1.0))
    low = float(np.clip(tau[k_lo - 1], 0.0, est))
    high = 1.0 if k_hi is None else float(np.clip(tau[k_hi - 1], est, 1.0))
    return ThresholdEstimate(est, "monte-carlo", low, high, T, seed)


@dataclass(frozen=True)
class CouplingCheck:
    p: float
    m: int
    mu: float
    size_tail: float
    hit_m: float
    hit_m_se: float

    @property
    def rhs(self) -> float:
        return self.size_tail * self.hit_m

    def holds(self, n_se: float = 3.0) -> bool:
        return self.mu >= self.rhs - n_se * self.size_tail * self.hit_m_se


def coupling_check(G: MinGenerators, m, trials: int = 10_000, seed: int = 0) -> CouplingCheck:
    """Both sides of ``mu_p(F) >= P(|X_p| >= m) P(X_m in F)`` at ``p = 2m/n``."""
    m = _nearest_int(m)
    n = G.n
    p = min(1.0, 2 * m / n)
    H = G.as_hypergraph()
    hit = prob_Xm_hits(H, m, trials=trials, seed=seed)
    se = 0.0
    if hit.method != "exact":
        se = math.sqrt(max(hit.p * (1 - hit.p), 1e-300) / hit.trials)
    try:
        mu = float(mu_p_exact(G, p))
    except EnumerationCapError:
        est = mu_p_mc(G, p, trials, seed + 1)
        mu = est.p
        se = math.hypot(se, math.sqrt(max(mu * (1 - mu), 1e-300) / trials))
    tail = float(stats.binom.sf(m - 1, n, p))
    return CouplingCheck(p, m, mu, tail, hit.p, se)

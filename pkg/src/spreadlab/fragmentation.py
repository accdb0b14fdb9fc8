"""The fragmentation process: chi, good/bad pairs, iterated random rounds,
and the Janson-type bounds used for the final round.

Members of a hypergraph are handled as integer bitmasks in list order; the
list order is the tie-breaking order used to choose ``psi(S ∪ W)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from spreadlab import kernels
from spreadlab.hypergraph import (
    Edge,
    EnumerationCapError,
    Hypergraph,
    InstanceError,
    generators_of,
    mask_to_tuple,
    spread_kappa,
    up_closure_contains,
)
from spreadlab.measures import exact_evaluator
from spreadlab.rng import mean_interval, random_subset, trial_rng

EXACT_W_CAP = 10**6


def _m(edge) -> int:
    out = 0
    for v in edge:
        out |= 1 << int(v)
    return out


def _masks_array(masks) -> np.ndarray:
    return np.array(masks, dtype=np.uint64)


def _psi_index(masks: list[int], w: int) -> np.ndarray:
    """``psi[j]`` = first ``i`` with ``masks[i] ⊆ masks[j] ∪ w``."""
    if not masks:
        return np.empty(0, dtype=np.int64)
    rest = [m & ~w for m in masks]
    if max(rest).bit_length() <= 64:
        return kernels.first_subset_index(_masks_array(rest))
    out = np.empty(len(rest), dtype=np.int64)
    for j, d in enumerate(rest):
        out[j] = next(i for i in range(j + 1) if rest[i] & ~d == 0)
    return out


def chi(H_prev: Hypergraph, S_index: int, W) -> Edge:
    """``psi(S ∪ W) ∖ W`` for ``S = H_prev.edges[S_index]``."""
    w = _m(W)
    masks = H_prev.masks
    z = masks[S_index] | w
    first = next(i for i in range(S_index + 1) if masks[i] & ~z == 0)
    return mask_to_tuple(masks[first] & ~w)


def classify_pairs(H: Hypergraph, W, r_prime: float) -> tuple[list[tuple[int, Edge]], int]:
    """Good pairs as ``(edge index, chi)`` in edge order, plus the number of bad pairs."""
    w = _m(W)
    masks = list(H.masks)
    psi = _psi_index(masks, w)
    good = []
    bad = 0
    for j in range(len(masks)):
        c = masks[int(psi[j])] & ~w
        if c.bit_count() <= r_prime:
            good.append((j, mask_to_tuple(c)))
        else:
            bad += 1
    return good, bad


def bad_count(masks: list[int], w: int, r_prime: float) -> int:
    psi = _psi_index(masks, w)
    rest = np.array([(m & ~w).bit_count() for m in masks], dtype=np.int64)
    return int(np.count_nonzero(rest[psi] > r_prime))


def is_pathological(H_s: Hypergraph, S, Z, B: float, p: float, kappa: float,
                    total: int, r: int, r_prime: float) -> tuple[bool, Edge | None]:
    """Whether some ``T ⊆ S`` with ``|T| > r'`` has too many ``S' ∈ H_s`` in ``[T, Z]``.

    ``H_s`` holds the members of size ``s = |S|`` of a hypergraph with ``total``
    edges. "Too many" means more than ``B^r total kappa^-t p^(s-t)``.
    """
    S = tuple(sorted(S))
    z = _m(Z)
    if _m(S) & ~z:
        raise ValueError("Z must contain S")
    s = len(S)
    inside = [m for m in H_s.masks if m & ~z == 0]
    for t in range(math.floor(r_prime) + 1, s + 1):
        bound = B**r * total * kappa ** (-t) * p ** (s - t)
        for T in combinations(S, t):
            tm = _m(T)
            count = sum(1 for m in inside if tm & ~m == 0)
            if count > bound:
                return True, T
    return False, None


@dataclass(frozen=True)
class BadPairReport:
    rate: float
    ci_low: float
    ci_high: float
    se: float
    bound: float
    trials: int
    w_size: int
    r: int
    r_prime: float
    method: str

    def within_bound(self, n_se: float = 3.0) -> bool:
        return self.rate <= self.bound + n_se * self.se


def _pair_params(H: Hypergraph, C: float, gamma: float, kappa: float | None):
    if kappa is None:
        kappa = spread_kappa(H).kappa
    if kappa < C:
        raise InstanceError(
            f"hypergraph is only {kappa:.6g}-spread but C={C} needs kappa >= C (p = C/kappa <= 1)"
        )
    r = H.ell
    p = C / kappa
    return kappa, p, r, (1 - gamma) * r


def bad_pair_rate_mc(H: Hypergraph, C: float, trials: int, seed: int, gamma: float = 0.1,
                     kappa: float | None = None, pool=None) -> BadPairReport:
    """Monte Carlo ``E[#bad pairs]/|H|`` for ``W`` uniform of size ``⌊np⌋``, ``p = C/kappa``.

    ``W`` is drawn from ``pool`` (all of ``[n]`` by default).
    """
    kappa, p, r, rp = _pair_params(H, C, gamma, kappa)
    n = H.n
    pool = np.arange(n) if pool is None else np.asarray(sorted(pool))
    w_size = min(math.floor(n * p), len(pool))
    masks = list(H.masks)
    N = len(masks)
    rates = np.empty(trials)
    for t in range(trials):
        W = random_subset(trial_rng(seed, t), pool, w_size)
        rates[t] = bad_count(masks, _m(W), rp) / N
    mean, lo, hi = mean_interval(rates)
    se = float(rates.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    # per-pair binomial error, the looser of the two
    se_bin = math.sqrt(max(mean * (1 - mean), 0.0) / trials)
    se = max(se, se_bin)
    return BadPairReport(mean, max(0.0, lo), min(1.0, hi), se, C ** (-r / 3), trials, w_size,
                         r, rp, "monte-carlo")


def bad_pair_rate_exact(H: Hypergraph, C: float, gamma: float = 0.1,
                        kappa: float | None = None, cap: int = EXACT_W_CAP) -> BadPairReport:
    """Exact ``E[#bad]/|H|`` by enumerating every ``W`` of size ``⌊np⌋``."""
    kappa, p, r, rp = _pair_params(H, C, gamma, kappa)
    n = H.n
    w_size = math.floor(n * p)
    total = math.comb(n, w_size)
    if total > cap:
        raise EnumerationCapError(f"C({n},{w_size}) = {total} exceeds {cap}")
    masks = list(H.masks)
    bad = 0
    for W in combinations(range(n), w_size):
        bad += bad_count(masks, _m(W), rp)
    rate = Fraction(bad, total * len(masks))
    return BadPairReport(float(rate), float(rate), float(rate), 0.0, C ** (-r / 3), total,
                         w_size, r, rp, "exact")


def singletons_bad_rate(n: int, w_size: int) -> Fraction:
    """Closed form for ``n`` singleton edges with ``r' < 1``: ``S = {x}`` is bad
    exactly when ``x ∉ W`` and ``x < min W``, so the rate is ``E[min W]/n``."""
    if w_size == 0:
        return Fraction(1)
    return Fraction(n - w_size, (w_size + 1) * n)


# ---------------------------------------------------------------------------
# the iterated process


def rounds_for(ell: int, gamma: float, weighted: bool = False) -> int:
    """Round budget: ``(1-gamma)^m`` reaches ``sqrt(log ell)/ell`` (or ``log ell/ell``
    for the weight-ordered variant)."""
    if ell <= 1:
        return 0
    target = (math.log(ell) if weighted else math.sqrt(math.log(ell))) / ell
    return max(0, math.ceil(math.log(target) / math.log(1 - gamma) - 1e-12))


@dataclass
class FragConfig:
    gamma: float = 0.1
    C: float | None = None
    C0: float = 8.0
    q_final: float | None = None
    m: int | None = None
    seed: int = 0
    dedup: bool = False

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.C is None:
            self.C = self.C0
        if self.C <= 0:
            raise ValueError("C must be positive")

    @property
    def B(self) -> float:
        return math.sqrt(self.C)


@dataclass
class RoundRecord:
    i: int
    size_prev: int
    size: int
    r: float
    w_size: int
    good: int
    bad: int
    success: bool
    clamped: bool
    spread_floor: float  # (1 - delta)^m |H|
    half_H: float


@dataclass
class FragmentationTrace:
    n: int
    ell: int
    kappa: float
    p: float
    m: int
    delta: float
    q_final: float
    rounds: list[RoundRecord]
    final_w_size: int
    final_clamped: bool
    janson_success: bool
    overall: bool
    W: tuple[int, ...]
    blocks: list[tuple[int, ...]]
    witness: Edge | None = None
    backpointer_ok: bool | None = None
    flags: list[str] = field(default_factory=list)
    weighted: dict | None = None

    @property
    def all_rounds_successful(self) -> bool:
        return all(r.success for r in self.rounds)

    def records(self) -> list[dict]:
        """One JSON-ready dict per round, then one for the final phase."""
        out = [{"kind": "round", **asdict(r)} for r in self.rounds]
        out.append({
            "kind": "final", "w_size": self.final_w_size, "clamped": self.final_clamped,
            "janson_success": self.janson_success, "overall": self.overall,
            "W": list(self.W), "witness": list(self.witness) if self.witness else None,
            "backpointer_ok": self.backpointer_ok, "m": self.m, "p": self.p,
            "q_final": self.q_final, "kappa": self.kappa, "flags": self.flags,
        })
        return out


def _dedup(masks: list[int], origin: list[int]) -> tuple[list[int], list[int]]:
    seen = set()
    out_m, out_o = [], []
    for m, o in zip(masks, origin):
        if m not in seen:
            seen.add(m)
            out_m.append(m)
            out_o.append(o)
    return out_m, out_o


def run_fragmentation(H: Hypergraph, cfg: FragConfig, weights=None,
                      kappa: float | None = None) -> FragmentationTrace:
    """One seeded run of the rounds ``W_1, ..., W_m`` and the final draw ``W_{m+1}``.

    With ``weights`` given, the rounds are the consecutive blocks of vertices in
    increasing weight order (the weight-ordered variant), with its own ``m``
    and final ``q``.
    """
    if len(H) == 0:
        raise InstanceError("empty hypergraph")
    n, ell = H.n, H.ell
    if kappa is None:
        kappa = spread_kappa(H).kappa
    C, gamma = cfg.C, cfg.gamma
    p = C / kappa
    flags: list[str] = []
    if not 0 < p < 1:
        raise InstanceError(f"p = C/kappa = {p:.6g} is not in (0, 1); lower C")
    weighted = weights is not None
    m = cfg.m if cfg.m is not None else rounds_for(ell, gamma, weighted)
    delta = 1 / (2 * m) if m > 0 else 0.5
    if weighted:
        q_final = cfg.q_final if cfg.q_final is not None else (
            math.log(C) * math.log(ell) ** 2 / kappa if ell > 1 else 1 / kappa)
    else:
        q_final = cfg.q_final if cfg.q_final is not None else max(math.log(ell), 1.0) / kappa
    if kappa < 2 / gamma * cfg.C0 * math.log(max(ell, 2)):
        flags.append("kappa-below-asymptotic-range")
    if p > 1 / cfg.C0:
        flags.append("p-above-1/C0")

    w_step = math.floor(n * p)
    if w_step == 0 and m > 0:
        raise InstanceError(f"floor(n p) = 0 for n={n}, p={p:.6g}: rounds would be empty")

    if weighted:
        xi = np.asarray(weights, dtype=float)
        if xi.shape != (n,):
            raise ValueError("need one weight per vertex")
        order = np.lexsort((np.arange(n), xi))
        a = [min(n, math.floor(i * p * n)) for i in range(m + 1)]
        a.append(min(n, math.floor((m * p + q_final) * n)))
        eps = [2 * i * p for i in range(m + 1)] + [2 * (m * p + q_final)]
    else:
        rng = trial_rng(cfg.seed, 0)

    masks = list(H.masks)
    origin = list(range(len(masks)))
    history: list[list[int]] = [masks]
    free = np.arange(n)
    blocks: list[tuple[int, ...]] = []
    rounds: list[RoundRecord] = []
    N0 = len(masks)
    floor_size = (1 - delta) ** m * N0
    for i in range(1, m + 1):
        r_i = max((1 - gamma) ** i * ell, 1.0)
        if weighted:
            W = np.sort(order[a[i - 1]:a[i]])
            clamped = a[i] - a[i - 1] < w_step
        else:
            clamped = w_step > len(free)
            W = random_subset(rng, free, w_step)
        w = _m(W)
        psi = _psi_index(masks, w)
        new_m, new_o = [], []
        for j in range(len(masks)):
            k = int(psi[j])
            c = masks[k] & ~w
            if c.bit_count() <= r_i:
                new_m.append(c)
                new_o.append(origin[k])
        prev = len(masks)
        good = len(new_m)
        if cfg.dedup:
            new_m, new_o = _dedup(new_m, new_o)
        rounds.append(RoundRecord(
            i=i, size_prev=prev, size=len(new_m), r=r_i, w_size=len(W),
            good=good, bad=prev - good,
            success=len(new_m) >= (1 - delta) * prev, clamped=clamped,
            spread_floor=floor_size, half_H=N0 / 2,
        ))
        if clamped:
            flags.append(f"round-{i}-clamped")
        masks, origin = new_m, new_o
        history.append(masks)
        blocks.append(tuple(int(x) for x in W))
        free = np.setdiff1d(free, W, assume_unique=True)

    if weighted:
        W_last = np.sort(order[a[m]:a[m + 1]])
        want = a[m + 1] - a[m]
        final_clamped = False
    else:
        want = math.floor(n * q_final)
        final_clamped = want > len(free)
        W_last = random_subset(rng, free, want)
    if final_clamped:
        flags.append("final-clamped")
    wl = _m(W_last)
    blocks.append(tuple(int(x) for x in W_last))
    hit = next((j for j, s in enumerate(masks) if s & ~wl == 0), None)
    W_all = tuple(sorted(v for b in blocks for v in b))
    trace = FragmentationTrace(
        n=n, ell=ell, kappa=kappa, p=p, m=m, delta=delta, q_final=q_final, rounds=rounds,
        final_w_size=len(W_last), final_clamped=final_clamped, janson_success=hit is not None,
        overall=hit is not None, W=W_all, blocks=blocks, flags=flags,
    )
    if hit is not None:
        E = H.masks[origin[hit]]
        trace.witness = mask_to_tuple(E)
        trace.backpointer_ok = _check_backpointer(E, blocks, history)
        if not up_closure_contains(H, W_all):
            raise AssertionError("successful run whose W contains no edge")
    if weighted:
        trace.weighted = _weighted_report(H, xi, blocks, eps, trace)
    return trace


def _check_backpointer(E: int, blocks, history) -> bool:
    """``E ∖ (W_1 ∪ ... ∪ W_i)`` lies in ``H_i`` for every round, and ``E ⊆ W``."""
    acc = 0
    for i, Hi in enumerate(history[1:], start=1):
        acc |= _m(blocks[i - 1])
        if (E & ~acc) not in set(Hi):
            return False
    acc |= _m(blocks[-1])
    return E & ~acc == 0


def _weighted_report(H: Hypergraph, xi: np.ndarray, blocks, eps, trace) -> dict:
    obs = all(all(xi[x] <= eps[i] for x in b) for i, b in enumerate(blocks, start=1))
    xi_H = min(float(sum(xi[list(e)])) for e in H.edges)
    rep = {"eps": eps, "weights_within_staircase": obs, "xi_H": xi_H,
           "successful": trace.overall and obs, "staircase_bound": None}
    if trace.overall and trace.witness is not None:
        S = set(trace.witness)
        bound = sum(eps[i] * len(S & set(b)) for i, b in enumerate(blocks, start=1))
        rep["staircase_bound"] = bound
        if obs and xi_H > bound + 1e-12:
            raise AssertionError(f"xi_H={xi_H} exceeds the staircase bound {bound}")
    return rep


# ---------------------------------------------------------------------------
# Janson phase


def janson_bound(r: int, kappa: float, alpha: float) -> float:
    """``exp[-1 / sum_t C(r,t) (alpha kappa)^-t]``."""
    ak = alpha * kappa
    if ak <= 0:
        raise ValueError("alpha * kappa must be positive")
    s = sum(math.comb(r, t) * ak ** (-t) for t in range(1, r + 1))
    return math.exp(-1 / s)


def janson_corollary(r: int, kappa: float, alpha: float) -> float | None:
    """``2 exp[-alpha kappa / (2r)]``, valid when ``alpha kappa >= 2r``."""
    ak = alpha * kappa
    if ak < 2 * r:
        return None
    return 2 * math.exp(-ak / (2 * r))


@dataclass(frozen=True)
class JansonCheck:
    exact: float
    bound: float
    r: int
    kappa: float
    alpha: float

    @property
    def holds(self) -> bool:
        return self.exact <= self.bound


def janson_exact_vs_bound(G: Hypergraph, alpha, exact_cap: int = 20) -> JansonCheck:
    """Exact ``P(Y_alpha ∉ <G>)`` beside the bound for ``G``'s own ``r`` and spread."""
    if G.n > exact_cap:
        raise EnumerationCapError(f"exact failure probability needs n <= {exact_cap}")
    kappa = spread_kappa(G).kappa
    r = G.ell
    mu = exact_evaluator(generators_of(G), exact_cap)(alpha)
    exact = float(1 - mu)
    bound = janson_bound(r, kappa, float(alpha)) if alpha > 0 else 1.0
    return JansonCheck(exact, bound, r, kappa, float(alpha))


def staircase(ell: int, kappa: float, C: float, gamma: float) -> dict:
    """Parameters of the weight-ordered process and the threshold ``(3C/gamma) ell/kappa``."""
    p = C / kappa
    m = rounds_for(ell, gamma, weighted=True)
    q = math.log(C) * math.log(ell) ** 2 / kappa if ell > 1 else 0.0
    eps = [2 * i * p for i in range(m + 1)] + [2 * (m * p + q)]
    return {"threshold": 3 * C / gamma * ell / kappa, "p": p, "m": m, "q": q, "eps": eps}

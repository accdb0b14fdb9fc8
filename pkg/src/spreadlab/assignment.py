"""Random minimum-weight problems: axial assignments and explicit hypergraphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import stats

from spreadlab import kernels
from spreadlab.fragmentation import staircase
from spreadlab.hypergraph import Hypergraph, InstanceError, spread_kappa
from spreadlab.rng import mean_interval, pmap, trial_rng, wilson_interval

HUNGARIAN_MAX_N = 2000
DP_MAX_N = 10
DISTS = ("exp1", "uniform01")


@dataclass
class AssignmentInstance:
    d: int
    n: int
    weights: np.ndarray
    dist: str = "exp1"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n,) * self.d:
            raise InstanceError(f"weights need shape {(self.n,) * self.d}, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InstanceError("weights must be finite and nonnegative")
        self.weights = w


@dataclass(frozen=True)
class MinWeightResult:
    value: float
    argmin: tuple[tuple[int, ...], ...] | tuple[int, ...]
    method: str


def draw(rng: np.random.Generator, dist: str, shape) -> np.ndarray:
    if dist == "exp1":
        return rng.exponential(1.0, size=shape)
    if dist == "uniform01":
        return rng.random(size=shape)
    raise ValueError(f"unknown distribution {dist!r}")


def random_instance(d: int, n: int, dist: str, rng: np.random.Generator) -> AssignmentInstance:
    return AssignmentInstance(d, n, draw(rng, dist, (n,) * d), dist)


def solve_axial(inst: AssignmentInstance) -> MinWeightResult:
    """Exact minimum axial assignment. ``argmin`` lists one cell per first coordinate."""
    d, n, w = inst.d, inst.n, inst.weights
    if d == 2:
        if n > HUNGARIAN_MAX_N:
            raise InstanceError(f"d=2 is capped at n <= {HUNGARIAN_MAX_N}")
        cols, u, v = kernels.hungarian(w)
        cells = tuple((i, int(cols[i])) for i in range(n))
        value = math.fsum(w[c] for c in cells)
        scale = max(1.0, float(np.abs(w).max()))
        slack = w - u[:, None] - v[None, :]
        if slack.min() < -1e-9 * scale * n or abs(math.fsum(u) + math.fsum(v) - value) > 1e-9 * scale * n:
            raise AssertionError("Hungarian potentials do not certify optimality")
        return MinWeightResult(value, cells, "hungarian")
    if d == 3:
        if n > DP_MAX_N:
            raise InstanceError(f"d=3 is capped at n <= {DP_MAX_N}")
        _, js, ks = kernels.axial3_dp(w)
        cells = tuple((i, int(js[i]), int(ks[i])) for i in range(n))
        return MinWeightResult(math.fsum(w[c] for c in cells), cells, "dp")
    raise InstanceError(f"no exact solver for d={d}")


def xi_min_explicit(H: Hypergraph, weights) -> MinWeightResult:
    """``min over edges S of sum_{x in S} weights[x]``; ties go to the lexicographically least edge."""
    if len(H) == 0:
        raise InstanceError("empty hypergraph")
    w = np.asarray(weights, dtype=float)
    best = None
    for e in sorted(set(H.edges)):
        val = math.fsum(w[list(e)])
        if best is None or val < best[0]:
            best = (val, e)
    return MinWeightResult(best[0], best[1], "enumeration")


@dataclass(frozen=True)
class ZEstimate:
    mean: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int
    values: tuple[float, ...]


def _axial_trial(d: int, n: int, dist: str, seed: int, t: int) -> float:
    return solve_axial(random_instance(d, n, dist, trial_rng(seed, t))).value


def _explicit_trial(H: Hypergraph, dist: str, seed: int, t: int) -> float:
    return xi_min_explicit(H, draw(trial_rng(seed, t), dist, H.n)).value


def estimate_Z(source, dist: str | None = None, trials: int = 100, seed: int = 0) -> ZEstimate:
    """Mean of the minimum weight over ``trials`` independent weight draws.

    ``source`` is a ``(d, n)`` pair for axial assignments or an explicit hypergraph.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(source, Hypergraph):
        fn = partial(_explicit_trial, source, dist or "uniform01", seed)
    else:
        d, n = source
        if (d == 2 and n > HUNGARIAN_MAX_N) or (d == 3 and n > DP_MAX_N) or d not in (2, 3):
            raise InstanceError(f"no exact solver for d={d}, n={n}")
        fn = partial(_axial_trial, d, n, dist or "exp1", seed)
    vals = pmap(fn, range(trials))
    mean, lo, hi = mean_interval(vals)
    return ZEstimate(mean, lo, hi, trials, seed, tuple(vals))


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float
    means: dict[int, float]


def scaling_fit(d: int, n_list, trials: int, seed: int, dist: str = "exp1") -> ScalingFit:
    """Least-squares line through ``(log n, log mean)``."""
    ns = sorted(set(int(n) for n in n_list))
    if len(ns) < 2:
        raise ValueError("a fit needs at least two distinct n")
    means = {n: estimate_Z((d, n), dist, trials, seed + n).mean for n in ns}
    fit = stats.linregress(np.log(ns), np.log([means[n] for n in ns]))
    return ScalingFit(float(fit.slope), float(fit.intercept), float(fit.stderr), means)


@dataclass(frozen=True)
class TfsReport:
    mean_normalized: float
    max_normalized: float
    ci_low: float
    ci_high: float
    kappa: float
    ell: int
    trials: int


def tfs_bound_report(H: Hypergraph, trials: int, seed: int, dist: str = "uniform01") -> TfsReport:
    """``E[xi_H] kappa/ell`` and ``max xi_H kappa/ell`` over seeded weight draws."""
    kappa = spread_kappa(H).kappa
    ell = H.ell
    est = estimate_Z(H, dist, trials, seed)
    k = kappa / ell
    return TfsReport(est.mean * k, max(est.values) * k, est.ci_low * k, est.ci_high * k,
                     kappa, ell, trials)


@dataclass(frozen=True)
class TailReport:
    threshold: float
    frequency: float
    ci_low: float
    ci_high: float
    analytic: float
    trials: int


def tail_frequency(H: Hypergraph, C: float, gamma: float, trials: int, seed: int,
                   dist: str = "uniform01") -> TailReport:
    """Empirical ``P(xi_H > (3C/gamma) ell/kappa)`` beside ``exp[-(log ell log C)/4]``.

    The analytic value is asymptotic and is reported, not asserted.
    """
    kappa = spread_kappa(H).kappa
    ell = H.ell
    thr = 3 * C / gamma * ell / kappa
    est = estimate_Z(H, dist, trials, seed)
    hits = sum(v > thr for v in est.values)
    lo, hi = wilson_interval(hits, trials)
    analytic = math.exp(-math.log(ell) * math.log(C) / 4) if ell > 1 and C > 1 else 1.0
    return TailReport(thr, hits / trials, lo, hi, analytic, trials)


def staircase_diag(ell: int, kappa: float, C: float, gamma: float) -> dict:
    """The threshold ``(3C/gamma) ell/kappa`` and the weight staircase ``eps_i``."""
    if min(ell, kappa, C, gamma) <= 0:
        raise ValueError("parameters must be positive")
    return staircase(ell, kappa, C, gamma)

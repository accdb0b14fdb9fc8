"""Hypergraphs, increasing families given by minimal generators, and spread.

Vertices are ``0..n-1``. Edges are stored as sorted tuples; the list position
of an edge is its rank in the fixed total order used by the fragmentation
process, so repeated edges stay distinguishable.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np

Edge = tuple[int, ...]

SPREAD_ENUM_CAP = 10**7


class InstanceError(ValueError):
    """Malformed hypergraph or family input."""


class EnumerationCapError(RuntimeError):
    """An exact enumeration would exceed its configured cap."""


def _canon(edge: Iterable[int]) -> Edge:
    return tuple(sorted(set(int(v) for v in edge)))


def _mask(edge: Iterable[int]) -> int:
    m = 0
    for v in edge:
        m |= 1 << v
    return m


def mask_to_tuple(mask: int) -> Edge:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def ell(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(_mask(e) for e in self.edges)

    def u64(self) -> np.ndarray:
        if self.n > 64:
            raise ValueError("uint64 masks need n <= 64")
        return np.array(self.masks, dtype=np.uint64)

    def is_uniform(self) -> bool:
        return len({len(e) for e in self.edges}) <= 1

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, obj: dict) -> "Hypergraph":
        try:
            return make_hypergraph(int(obj["n"]), obj["edges"], allow_empty=True)
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"instance JSON needs integer 'n' and list 'edges': {exc}") from exc


def make_hypergraph(n: int, edges: Iterable[Iterable[int]], allow_empty: bool = False) -> Hypergraph:
    if n < 0:
        raise InstanceError("n must be nonnegative")
    out = []
    for e in edges:
        c = _canon(e)
        if not c and not allow_empty:
            raise InstanceError("empty edge (pass allow_empty=True to permit it)")
        if c and (c[0] < 0 or c[-1] >= n):
            raise InstanceError(f"edge {list(c)} has a vertex outside [0, {n})")
        out.append(c)
    return Hypergraph(n, tuple(out))


def load_hypergraph(path: str | Path) -> Hypergraph:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise InstanceError(f"{path}: expected a JSON object")
    return Hypergraph.from_json(obj)


def up_closure_contains(H: Hypergraph, T: Iterable[int]) -> bool:
    """Whether ``T`` contains some edge of ``H``."""
    t = _mask(T)
    return any(m & ~t == 0 for m in H.masks)


@dataclass(frozen=True)
class MinGenerators:
    """Antichain of minimal elements of an increasing family on ``[n]``."""

    n: int
    gens: tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.gens)

    @property
    def trivial(self) -> bool:
        """The family is all of ``2^[n]`` (the empty set is a generator)."""
        return any(len(g) == 0 for g in self.gens)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(_mask(g) for g in self.gens)

    def as_hypergraph(self) -> Hypergraph:
        return Hypergraph(self.n, self.gens)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(g) for g in self.gens]}


def min_generators(edges: Iterable[Iterable[int]], n: int | None = None) -> MinGenerators:
    """Inclusion-minimal members of ``edges``, duplicates removed.

    Output order is by size, then lexicographic.
    """
    canon = sorted(set(_canon(e) for e in edges), key=lambda e: (len(e), e))
    if not canon:
        raise InstanceError("min_generators needs a nonempty list")
    kept: list[Edge] = []
    kept_masks: list[int] = []
    for e in canon:
        m = _mask(e)
        if any(k & ~m == 0 for k in kept_masks):
            continue
        kept.append(e)
        kept_masks.append(m)
    top = max((e[-1] for e in kept if e), default=-1)
    if n is None:
        n = top + 1
    elif top >= n:
        raise InstanceError(f"generator vertex {top} outside [0, {n})")
    return MinGenerators(n, tuple(kept))


def generators_of(H: Hypergraph) -> MinGenerators:
    return min_generators(H.edges, H.n)


def ell_bound(G: MinGenerators) -> int:
    return max(len(g) for g in G.gens)


@dataclass(frozen=True)
class SpreadCertificate:
    """Largest ``kappa`` for which ``H`` is kappa-spread, with the witness set."""

    kappa: float
    witness: Edge
    ratio_table: dict[int, float]
    count: int
    total: int
    counts: dict[int, tuple[int, Edge]] = field(repr=False)

    def exact_ge(self, other: "SpreadCertificate") -> bool:
        """``self.kappa >= other.kappa`` decided in integer arithmetic."""
        return _ratio_cmp((self.total, self.count, len(self.witness)),
                          (other.total, other.count, len(other.witness))) >= 0

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "witness": list(self.witness),
            "ratio_table": {str(s): r for s, r in sorted(self.ratio_table.items())},
        }


def _ratio_cmp(a: tuple[int, int, int], b: tuple[int, int, int]) -> int:
    """Sign of ``(Na/ca)^(1/sa) - (Nb/cb)^(1/sb)``."""
    na, ca, sa = a
    nb, cb, sb = b
    lhs = na**sb * cb**sa
    rhs = nb**sa * ca**sb
    return (lhs > rhs) - (lhs < rhs)


def _size_table_numpy(H: Hypergraph) -> dict[int, tuple[int, Edge]]:
    by_size: dict[int, list[Edge]] = {}
    for e in H.edges:
        if e:
            by_size.setdefault(len(e), []).append(e)
    chunks = []
    for k, group in by_size.items():
        verts = np.array(group, dtype=np.uint64)
        bits = np.left_shift(np.uint64(1), verts)
        subs = np.zeros((len(group), 1), dtype=np.uint64)
        for c in range(k):
            subs = np.concatenate([subs, subs | bits[:, c : c + 1]], axis=1)
        chunks.append(subs[:, 1:].ravel())
    allsubs = np.concatenate(chunks)
    uniq, cnt = np.unique(allsubs, return_counts=True)
    sizes = np.bitwise_count(uniq).astype(np.int64)
    table: dict[int, tuple[int, Edge]] = {}
    for s in np.unique(sizes):
        sel = sizes == s
        c = int(cnt[sel].max())
        cands = uniq[sel][cnt[sel] == c]
        witness = min(mask_to_tuple(int(m)) for m in cands)
        table[int(s)] = (c, witness)
    return table


def _size_table_python(H: Hypergraph) -> dict[int, tuple[int, Edge]]:
    counter: Counter[Edge] = Counter()
    for e in H.edges:
        for r in range(1, len(e) + 1):
            counter.update(combinations(e, r))
    best: dict[int, tuple[int, Edge]] = {}
    for S, c in counter.items():
        s = len(S)
        cur = best.get(s)
        if cur is None or c > cur[0] or (c == cur[0] and S < cur[1]):
            best[s] = (c, S)
    return best


def spread_kappa(H: Hypergraph, cap: int = SPREAD_ENUM_CAP) -> SpreadCertificate:
    """Exact spread: the minimum over nonempty ``S`` of ``(|H| / |H ∩ <S>|)^(1/|S|)``.

    Only subsets of edges have a nonzero count, so those are enumerated.
    Ties go to the smallest ``|S|``, then the lexicographically least ``S``.
    """
    if len(H) == 0:
        raise InstanceError("spread of an empty hypergraph is undefined")
    work = sum(1 << len(e) for e in H.edges)
    if work > cap:
        raise EnumerationCapError(
            f"spread enumeration needs {work} subset visits (cap {cap}); "
            "use a smaller instance or estimate the spread by sampling subsets"
        )
    if not any(H.edges):
        raise InstanceError("hypergraph has only empty edges")
    table = _size_table_numpy(H) if H.n <= 64 else _size_table_python(H)
    N = len(H)
    best_s = None
    for s in sorted(table):
        if best_s is None or _ratio_cmp((N, table[s][0], s), (N, table[best_s][0], best_s)) < 0:
            best_s = s
    c, witness = table[best_s]
    ratios = {s: (N / cs) ** (1.0 / s) for s, (cs, _) in table.items()}
    return SpreadCertificate(
        kappa=ratios[best_s], witness=witness, ratio_table=ratios,
        count=c, total=N, counts=table,
    )


def is_kappa_spread(H: Hypergraph, kappa: float) -> tuple[bool, Edge | None]:
    """``(True, None)`` if every ``|H ∩ <S>| <= kappa^-|S| |H|``, else ``(False, S)``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    cert = spread_kappa(H)
    k = Fraction(kappa)
    for s in sorted(cert.counts):
        c, witness = cert.counts[s]
        if c * k**s > cert.total:
            return False, witness
    return True, None


def uniformize(H: Hypergraph, ell: int, M: int) -> Hypergraph:
    """Replace every edge by ``M`` copies padded to size ``ell`` with fresh vertices."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if any(len(e) > ell for e in H.edges):
        raise InstanceError(f"ell={ell} is smaller than the largest edge")
    nxt = H.n
    out: list[Edge] = []
    for e in H.edges:
        pad = ell - len(e)
        for _ in range(M):
            out.append(e + tuple(range(nxt, nxt + pad)))
            nxt += pad
    return Hypergraph(nxt, tuple(out))


def uniformize_min_multiplicity(H: Hypergraph, ell: int, max_M: int = 256) -> tuple[int, Hypergraph]:
    """Smallest ``M`` whose uniformization is at least as spread as ``H``."""
    base = spread_kappa(H)
    for M in range(1, max_M + 1):
        G = uniformize(H, ell, M)
        if spread_kappa(G).exact_ge(base):
            return M, G
    raise RuntimeError(f"no M <= {max_M} preserves the spread")


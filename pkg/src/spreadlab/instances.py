"""Application instances: matching and assignment hypergraphs, pattern graphs
and their copies, forest statistics, and the degree-bounded copy estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product

import networkx as nx
import numpy as np

from spreadlab.hypergraph import EnumerationCapError, Hypergraph, InstanceError
from spreadlab.rng import trial_rng

MATCHING_CAPS = {2: 12, 3: 9}
DPARTITE_CAPS = {2: 8, 3: 5}
COPY_CAP = 10**5
EMB_NODE_CAP = 10**7
FOREST_CAP = 20
PHI_CAP = 15


# ---------------------------------------------------------------------------
# explicit hypergraphs


def _r_subsets(n: int, r: int) -> dict[tuple[int, ...], int]:
    return {e: i for i, e in enumerate(combinations(range(n), r))}


def _perfect_matchings(verts: tuple[int, ...], r: int):
    if not verts:
        yield ()
        return
    first, rest = verts[0], verts[1:]
    for mates in combinations(rest, r - 1):
        block = (first, *mates)
        left = tuple(v for v in rest if v not in mates)
        for tail in _perfect_matchings(left, r):
            yield (block, *tail)


def gen_matchings(r: int, n: int) -> Hypergraph:
    """Perfect matchings of the complete ``r``-graph on ``[n]``.

    Ground set: the ``r``-subsets of ``[n]`` in lexicographic order.
    """
    if r < 1 or n % r:
        raise InstanceError(f"r={r} must divide n={n}")
    cap = MATCHING_CAPS.get(r, 0)
    if r > 1 and n > cap:
        raise EnumerationCapError(f"perfect matchings for r={r} are capped at n <= {cap}")
    idx = _r_subsets(n, r)
    edges = [tuple(sorted(idx[b] for b in pm)) for pm in _perfect_matchings(tuple(range(n)), r)]
    return Hypergraph(len(idx), tuple(edges))


def cell_index(coords, n: int) -> int:
    out = 0
    for c in coords:
        out = out * n + c
    return out


def gen_dpartite_matchings(d: int, n: int) -> Hypergraph:
    """Axial assignments of ``[n]^d``: one edge per ``(d-1)``-tuple of permutations.

    Cell ``(i_1, ..., i_d)`` is vertex ``sum i_k n^(d-k)``.
    """
    if d < 2:
        raise InstanceError("d must be >= 2")
    cap = DPARTITE_CAPS.get(d, 0)
    if n > cap:
        raise EnumerationCapError(f"d={d} assignments are capped at n <= {cap}")
    perms = list(permutations(range(n)))
    edges = []
    for sig in product(perms, repeat=d - 1):
        edges.append(tuple(sorted(cell_index((i, *(s[i] for s in sig)), n) for i in range(n))))
    return Hypergraph(n**d, tuple(edges))


def dpartite_spread_formula(d: int, n: int) -> float:
    """``min_s (n!/(n-s)!)^((d-1)/s)``."""
    return min((math.perm(n, s)) ** ((d - 1) / s) for s in range(1, n + 1))


# ---------------------------------------------------------------------------
# pattern graphs


@dataclass(frozen=True)
class PatternGraph:
    r: int
    m: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            if len(e) != self.r or len(set(e)) != self.r:
                raise InstanceError(f"edge {e} is not an {self.r}-set")
            if min(e) < 0 or max(e) >= self.m:
                raise InstanceError(f"edge {e} leaves [0, {self.m})")
            if e in seen:
                raise InstanceError(f"repeated edge {e}")
            seen.add(e)

    @property
    def degree_bound(self) -> int:
        deg = [0] * self.m
        for e in self.edges:
            for v in e:
                deg[v] += 1
        return max(deg, default=0)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted({v for e in self.edges for v in e}))

    def nx_graph(self) -> nx.Graph:
        if self.r != 2:
            raise ValueError("only 2-graphs convert to networkx graphs")
        g = nx.Graph()
        g.add_nodes_from(range(self.m))
        g.add_edges_from(self.edges)
        return g

    def sub(self, edges) -> "PatternGraph":
        return PatternGraph(self.r, self.m, tuple(sorted(edges)))


def pattern(r: int, m: int, edges) -> PatternGraph:
    return PatternGraph(r, m, tuple(sorted(tuple(sorted(e)) for e in edges)))


def gen_tree(shape: str, n: int, d: int = 2, seed: int = 0) -> PatternGraph:
    """Trees on ``n`` vertices: ``path``, ``star``, ``dary`` (BFS-filled, max degree
    ``d``) or ``random`` (seeded, max degree ``d``)."""
    if n < 1:
        raise InstanceError("need n >= 1")
    if shape == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif shape == "star":
        edges = [(0, i) for i in range(1, n)]
    elif shape == "dary":
        if d < 2 and n > 2:
            raise InstanceError("a tree with more than 2 vertices needs d >= 2")
        edges = []
        deg = [0] * n
        parent = 0
        for v in range(1, n):
            while deg[parent] >= d:
                parent += 1
            edges.append((parent, v))
            deg[parent] += 1
            deg[v] += 1
    elif shape == "random":
        if d < 2 and n > 2:
            raise InstanceError("a tree with more than 2 vertices needs d >= 2")
        rng = trial_rng(seed, 0)
        deg = [0] * n
        edges = []
        for v in range(1, n):
            open_ = [u for u in range(v) if deg[u] < d]
            u = int(open_[rng.integers(len(open_))])
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    else:
        raise InstanceError(f"unknown tree shape {shape!r}")
    T = pattern(2, n, edges)
    if shape in ("dary", "random") and T.degree_bound > d:
        raise AssertionError("degree bound violated")
    return T


def gen_loose_hamilton(r: int, n: int) -> PatternGraph:
    """Loose Hamilton cycle: consecutive edges share exactly one vertex."""
    if r < 2 or n % (r - 1) or n // (r - 1) < 2:
        raise InstanceError(f"loose Hamilton cycle needs (r-1) | n and n >= 2(r-1); got r={r}, n={n}")
    k = n // (r - 1)
    edges = [tuple(sorted((i * (r - 1) + j) % n for j in range(r))) for i in range(k)]
    return pattern(r, n, edges)


def gen_factor(clique_size: int, n: int) -> PatternGraph:
    """``n / clique_size`` vertex-disjoint cliques (a graph)."""
    if clique_size < 2 or n % clique_size:
        raise InstanceError(f"clique size {clique_size} must divide n={n}")
    edges = []
    for b in range(0, n, clique_size):
        edges += combinations(range(b, b + clique_size), 2)
    return pattern(2, n, edges)


def copy_hypergraph(H: PatternGraph, n: int | None = None, cap: int = COPY_CAP) -> Hypergraph:
    """All copies of ``H`` in the complete ``r``-graph on ``[n]`` (ground set: its ``r``-sets)."""
    n = H.m if n is None else n
    if n < H.m:
        raise InstanceError("n is smaller than the pattern")
    if math.factorial(n) > 50 * cap:
        raise EnumerationCapError(f"{n}! permutations exceed the enumeration budget")
    idx = _r_subsets(n, H.r)
    seen: set[tuple[int, ...]] = set()
    out = []
    for sigma in permutations(range(n)):
        img = tuple(sorted(idx[tuple(sorted(sigma[v] for v in e))] for e in H.edges))
        if img not in seen:
            seen.add(img)
            out.append(img)
            if len(out) > cap:
                raise EnumerationCapError(f"more than {cap} copies")
    return Hypergraph(len(idx), tuple(sorted(out)))


# ---------------------------------------------------------------------------
# embeddings


def count_embeddings(S: PatternGraph, H0: PatternGraph, node_cap: int = EMB_NODE_CAP) -> int:
    """Injective maps of the non-isolated vertices of ``S`` sending every edge to an edge of ``H0``."""
    if S.r != H0.r:
        raise InstanceError("uniformities differ")
    verts = list(S.vertices)
    if not verts:
        return 1
    # order vertices so each (after the first of a component) touches an earlier one
    order: list[int] = []
    seen: set[int] = set()
    inc = {v: [e for e in S.edges if v in e] for v in verts}
    for root in verts:
        if root in seen:
            continue
        stack = [root]
        seen.add(root)
        while stack:
            v = stack.pop(0)
            order.append(v)
            for e in inc[v]:
                for u in e:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
    pos = {v: i for i, v in enumerate(order)}
    # edges checked at the step their last vertex is placed
    due: list[list[tuple[int, ...]]] = [[] for _ in order]
    for e in S.edges:
        due[max(pos[v] for v in e)].append(e)
    target = {frozenset(e) for e in H0.edges}
    nbrs: dict[int, set[int]] = {v: set() for v in range(H0.m)}
    for e in H0.edges:
        for a in e:
            nbrs[a].update(u for u in e if u != a)
    earlier_nbr = []
    for i, v in enumerate(order):
        prev = [u for e in inc[v] for u in e if u != v and pos[u] < i]
        earlier_nbr.append(prev[0] if prev else None)
    phi: dict[int, int] = {}
    used: set[int] = set()
    nodes = 0
    count = 0

    def rec(i: int) -> None:
        nonlocal nodes, count
        if i == len(order):
            count += 1
            return
        nodes += 1
        if nodes > node_cap:
            raise EnumerationCapError(f"embedding search exceeded {node_cap} nodes")
        v = order[i]
        anchor = earlier_nbr[i]
        cands = sorted(nbrs[phi[anchor]]) if anchor is not None else range(H0.m)
        for x in cands:
            if x in used:
                continue
            phi[v] = x
            if all(frozenset(phi[u] for u in e) in target for e in due[i]):
                used.add(x)
                rec(i + 1)
                used.discard(x)
            del phi[v]

    rec(0)
    return count


def embedding_probability(S: PatternGraph, H0: PatternGraph, n: int | None = None) -> Fraction:
    """``P(sigma(S) ⊆ H0)`` for a uniform permutation ``sigma`` of ``[n]``."""
    n = H0.m if n is None else n
    w = len(S.vertices)
    if w > 12:
        raise EnumerationCapError("embedding probability is capped at 12 pattern vertices")
    if w > n:
        return Fraction(0)
    emb = count_embeddings(S, H0)
    return Fraction(emb * math.factorial(n - w), math.factorial(n))


def _edge_connected(edges) -> bool:
    edges = list(edges)
    if not edges:
        return False
    comp = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j, e in enumerate(edges):
            if j not in comp and set(e) & set(edges[i]):
                comp.add(j)
                frontier.append(j)
    return len(comp) == len(edges)


def connected_edge_subsets(H, size_cap: int, cap: int = COPY_CAP):
    """Nonempty edge subsets of size ``<= size_cap`` whose edges form one component."""
    E = list(H.edges if isinstance(H, PatternGraph) else H)
    adj = [[j for j in range(len(E)) if j != i and set(E[i]) & set(E[j])] for i in range(len(E))]
    seen: set[frozenset[int]] = set()
    layer = [frozenset([i]) for i in range(len(E))]
    seen.update(layer)
    out = list(layer)
    for _ in range(size_cap - 1):
        nxt = []
        for sub in layer:
            border = {j for i in sub for j in adj[i]} - sub
            for j in border:
                t = sub | {j}
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
                    if len(seen) > cap:
                        raise EnumerationCapError(f"more than {cap} connected subgraphs")
        out += nxt
        layer = nxt
    return [tuple(E[i] for i in sorted(s)) for s in out]


def all_edge_subsets(H: PatternGraph, size_cap: int, cap: int = COPY_CAP):
    E = list(H.edges)
    out = []
    for k in range(1, min(size_cap, len(E)) + 1):
        for c in combinations(E, k):
            out.append(c)
            if len(out) > cap:
                raise EnumerationCapError(f"more than {cap} subgraphs")
    return out


def spread_of_copies(H: PatternGraph, n: int | None = None, size_cap: int = 4,
                     connected: bool = True) -> tuple[float, tuple, Fraction]:
    """``q* = max_S P(sigma(S) ⊆ H)^(1/|S|)`` over subgraphs ``S`` of ``H``.

    Returns ``(q*, witness edges, witness probability)``.
    """
    subs = connected_edge_subsets(H, size_cap) if connected else all_edge_subsets(H, size_cap)
    cache: dict[tuple, Fraction] = {}
    best = (-1.0, (), Fraction(0))
    for S in subs:
        key = _iso_key(H.r, S)
        if key not in cache:
            cache[key] = embedding_probability(H.sub(S), H, n)
        pr = cache[key]
        val = float(pr) ** (1 / len(S))
        if val > best[0]:
            best = (val, S, pr)
    return best


def _iso_key(r: int, edges) -> tuple:
    # exact canonical form: minimum relabelled edge list over vertex orders
    verts = sorted({v for e in edges for v in e})
    if len(verts) > 8:
        return (r, tuple(sorted(edges)))
    best = None
    for perm in permutations(range(len(verts))):
        lab = dict(zip(verts, perm))
        key = tuple(sorted(tuple(sorted(lab[v] for v in e)) for e in edges))
        if best is None or key < best:
            best = key
    return (r, best)


# ---------------------------------------------------------------------------
# forests


class _DSU:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        self.parent[self.find(a)] = self.find(b)


def is_forest(edges) -> bool:
    """No cycle ``v_1 e_1 v_2 ... v_k e_k`` with distinct vertices and edges (k >= 2).

    Equivalent to an acyclic vertex-edge incidence graph: adding ``e`` closes a
    cycle exactly when two of its vertices are already connected.
    """
    dsu = _DSU()
    for e in edges:
        roots = [dsu.find(v) for v in e]
        if len(set(roots)) < len(roots):
            return False
        for v in e[1:]:
            dsu.union(e[0], v)
    return True


def forest_rho(F: PatternGraph | list, cap: int = FOREST_CAP) -> tuple[int, tuple]:
    """Largest forest in ``F`` and one that attains it."""
    E = list(F.edges if isinstance(F, PatternGraph) else F)
    if len(E) > cap:
        raise EnumerationCapError(f"exact forest search is capped at {cap} edges")
    best: list = []

    def rec(i: int, chosen: list, parent: dict) -> None:
        nonlocal best
        if len(chosen) + (len(E) - i) <= len(best):
            return
        if i == len(E):
            best = list(chosen)
            return
        e = E[i]

        def find(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        roots = [find(v) for v in e]
        if len(set(roots)) == len(roots):
            saved = dict(parent)
            for rt in roots[1:]:
                parent[rt] = roots[0]
            chosen.append(e)
            rec(i + 1, chosen, parent)
            chosen.pop()
            parent.clear()
            parent.update(saved)
        rec(i + 1, chosen, parent)

    rec(0, [], {})
    return len(best), tuple(best)


@dataclass(frozen=True)
class ForestStats:
    rho: int
    phi: Fraction
    witness_subfamily: tuple


def _components(E) -> list[list]:
    dsu = _DSU()
    for e in E:
        for v in e[1:]:
            dsu.union(e[0], v)
    groups: dict[int, list] = {}
    for e in E:
        groups.setdefault(dsu.find(e[0]), []).append(e)
    return list(groups.values())


def phi(F: PatternGraph | list, cap: int = PHI_CAP, connected_only: bool = True) -> ForestStats:
    """``max over nonempty F' ⊆ F of 1 - rho(F')/|F'|``.

    For ``F'`` with vertex-disjoint parts both ``rho`` and ``|F'|`` add up, so
    ``rho(F')/|F'|`` is a mediant of the parts' ratios and never beats the best
    part; hence only subfamilies with one component need to be searched.
    """
    E = list(F.edges if isinstance(F, PatternGraph) else F)
    if not E:
        raise InstanceError("phi needs at least one edge")
    if len(E) > cap:
        raise EnumerationCapError(f"phi is capped at {cap} edges")
    rho_F = sum(forest_rho(c)[0] for c in _components(E))
    if connected_only:
        subs = connected_edge_subsets(E, len(E), cap=2**cap)
    else:
        subs = [c for k in range(1, len(E) + 1) for c in combinations(E, k)]
    best = (Fraction(-1), ())
    for sub in subs:
        val = 1 - Fraction(forest_rho(sub)[0], len(sub))
        key = tuple(sorted(sub))
        if val > best[0] or (val == best[0] and (len(key), key) < (len(best[1]), best[1])):
            best = (val, key)
    return ForestStats(rho_F, best[0], best[1])


# ---------------------------------------------------------------------------
# degree-bounded copies


def p_star(d: int, n: int) -> float:
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and n >= 2")
    c_d = math.factorial(d) ** (2 / (d * (d + 1)))
    return c_d * n ** (-2 / (d + 1)) * math.log(n) ** (2 / (d * (d + 1)))


def dsp2_bound(d: int) -> Fraction:
    return Fraction(2 * (d + 1), (d + 2) * d)


def connected_graphs(max_vertices: int, max_degree: int) -> list[nx.Graph]:
    """Connected graphs with at most ``max_vertices`` vertices and maximum degree
    at most ``max_degree``, one per isomorphism class."""
    if max_vertices > 9:
        raise EnumerationCapError("connected graph enumeration is capped at 9 vertices")
    g1 = nx.Graph()
    g1.add_node(0)
    out = [g1]
    layer = [g1]
    for w in range(1, max_vertices):
        buckets: dict[str, list[nx.Graph]] = {}
        nxt = []
        for g in layer:
            open_ = [v for v in g if g.degree(v) < max_degree]
            for k in range(1, min(max_degree, len(open_)) + 1):
                for nb in combinations(open_, k):
                    h = g.copy()
                    h.add_edges_from((w, u) for u in nb)
                    key = nx.weisfeiler_lehman_graph_hash(h, iterations=3)
                    bucket = buckets.setdefault(key, [])
                    if any(nx.is_isomorphic(h, o) for o in bucket):
                        continue
                    bucket.append(h)
                    nxt.append(h)
        out += nxt
        layer = nxt
    return out


@dataclass
class DspReport:
    d: int
    bound: Fraction
    graphs: int
    excluded: int
    min_ratio: Fraction
    minimizers: list[tuple[int, int]]  # (w, s)
    dsp2_violations: int
    extremal: tuple[int, Fraction] | None  # (w, s) = (d+2, (d+2)d/2)
    extremal_ratio: Fraction | None
    extremal_attained: bool
    dsp1_checked: int
    dsp1_violations: int
    dsp1_worst: float  # max of P / (e^2 d/n)^f


def _is_clique_component(g: nx.Graph, size: int) -> bool:
    return g.number_of_nodes() == size and g.number_of_edges() == size * (size - 1) // 2


def sample_hosts(d: int, n: int, count: int = 3, seed: int = 0) -> list[PatternGraph]:
    """Host graphs on ``[n]`` with maximum degree ``<= d``."""
    hosts = []
    if (d * n) % 2 == 0 and d < n:
        for k in range(count):
            g = nx.random_regular_graph(d, n, seed=seed + k)
            hosts.append(pattern(2, n, g.edges()))
    hosts.append(gen_tree("dary", n, d) if d >= 2 else pattern(2, n, [(0, 1)]))
    return hosts


def dsp_checks(d: int, max_vertices: int = 9, n_host: int = 12, host_count: int = 3,
               dsp1_max_vertices: int = 7, seed: int = 0) -> DspReport:
    """Check ``f/s >= 2(d+1)/((d+2)d)`` on every connected graph of maximum degree
    ``<= d`` with at most ``max_vertices`` vertices (skipping ``K_{d+1}``), and
    ``P(sigma(S) ⊆ H0) < (e^2 d/n)^f`` against sample hosts."""
    bound = dsp2_bound(d)
    graphs = connected_graphs(max_vertices, d)
    hosts = sample_hosts(d, n_host, host_count, seed)
    excluded = 0
    min_ratio = None
    minimizers = []
    violations = 0
    d1_checked = d1_viol = 0
    worst = 0.0
    rate = math.e**2 * d / n_host
    for g in graphs:
        s = g.number_of_edges()
        if s == 0:
            continue
        if _is_clique_component(g, d + 1):
            excluded += 1
            continue
        w = g.number_of_nodes()
        f = w - 1
        ratio = Fraction(f, s)
        if ratio < bound:
            violations += 1
        if min_ratio is None or ratio < min_ratio:
            min_ratio, minimizers = ratio, [(w, s)]
        elif ratio == min_ratio:
            minimizers.append((w, s))
        if w <= dsp1_max_vertices:
            S = pattern(2, w, g.edges())
            for H0 in hosts:
                pr = embedding_probability(S, H0, n_host)
                d1_checked += 1
                rel = float(pr) / rate**f
                worst = max(worst, rel)
                if not float(pr) < rate**f:
                    d1_viol += 1
    w_ext = d + 2
    s_ext = Fraction(w_ext * d, 2)
    ext_ratio = Fraction(w_ext - 1) / s_ext
    attained = s_ext.denominator == 1 and any(
        g.number_of_nodes() == w_ext and g.number_of_edges() == s_ext for g in graphs)
    return DspReport(d, bound, len(graphs), excluded, min_ratio, sorted(set(minimizers)),
                     violations, (w_ext, s_ext), ext_ratio, attained, d1_checked, d1_viol, worst)


def random_antichain(n: int, k: int, ell: int, seed: int, index: int = 0, min_size: int = 1):
    """``k`` random sets of sizes ``min_size..ell`` over ``[n]``, minimalized."""
    from spreadlab.hypergraph import min_generators

    if k < 1:
        raise ValueError("k must be >= 1")
    hi = min(ell, n)
    if not 1 <= min_size <= hi:
        raise ValueError("need 1 <= min_size <= min(ell, n)")
    rng = trial_rng(seed, index)
    sets = []
    for _ in range(k):
        size = int(rng.integers(min_size, hi + 1))
        sets.append(np.sort(rng.choice(n, size=size, replace=False)).tolist())
    return min_generators(sets, n)

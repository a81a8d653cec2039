"""Exact homomorphism counting and the Sidorenko inequality check.

Counts are Python integers and densities are :class:`fractions.Fraction`;
nothing in this module compares floating-point values.  The one place a float
array appears is :func:`count_homomorphisms_matrix`, which uses float64 BLAS
products only when every intermediate is provably an integer below ``2**53``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .errors import PreconditionError
from .graph import Graph, WeightedGraph, cycle_graph

_FLOAT_EXACT = 1 << 53
_INT64_SAFE = 1 << 62


def iter_homomorphisms(
    h: Graph, g: Graph, fixed: Mapping[int, int] | None = None
) -> Iterator[tuple[int, ...]]:
    """Yield ``Hom(H, G)`` as image tuples in lexicographic order.

    With ``fixed``, only homomorphisms agreeing with the given partial map are
    produced (the set ``G_h(H)`` of extensions).
    """
    fixed = dict(fixed or {})
    for v, x in fixed.items():
        if not (0 <= v < h.n and 0 <= x < g.n):
            raise PreconditionError(f"partial map entry {v} -> {x} out of range")
    for v, x in fixed.items():
        for u in h.adj[v]:
            if u in fixed and not g.has_edge(x, fixed[u]):
                return
    n = h.n
    # neighbors whose image is known when vertex i is placed: earlier vertices and fixed ones
    known = [[u for u in h.adj[i] if u < i or u in fixed] for i in range(n)]
    img = [fixed.get(i, -1) for i in range(n)]
    nbrs = [g.neighbors(x) for x in range(g.n)]
    everything = range(g.n)

    def rec(i: int):
        if i == n:
            yield tuple(img)
            return
        if i in fixed:
            if all(g.has_edge(img[i], img[u]) for u in known[i] if u < i):
                yield from rec(i + 1)
            return
        ks = known[i]
        if ks:
            cands = set(nbrs[img[ks[0]]])
            for u in ks[1:]:
                cands &= nbrs[img[u]]
            cands = sorted(cands)
        else:
            cands = everything
        for x in cands:
            img[i] = x
            yield from rec(i + 1)
        img[i] = -1

    yield from rec(0)


def is_homomorphism(h: Graph, g: Graph, image) -> bool:
    if len(image) != h.n or any(not 0 <= x < g.n for x in image):
        return False
    return all(g.has_edge(image[u], image[v]) for u, v in h.edges)


def _assignment_order(h: Graph, comp: list[int]) -> list[int]:
    """Connected, greedy descending-degree order of one component."""
    start = min(comp, key=lambda v: (-h.degree(v), v))
    order, placed = [start], {start}
    weight = {v: 0 for v in comp}
    for u in h.adj[start]:
        weight[u] += 1
    while len(order) < len(comp):
        v = min(
            (v for v in comp if v not in placed),
            key=lambda v: (-weight[v], -h.degree(v), v),
        )
        order.append(v)
        placed.add(v)
        for u in h.adj[v]:
            weight[u] += 1
    return order


def _count_component(h: Graph, g: Graph, comp: list[int]) -> int:
    order = _assignment_order(h, comp)
    k = len(order)
    pos = {v: i for i, v in enumerate(order)}
    back = [[pos[u] for u in h.adj[v] if pos[u] < i] for i, v in enumerate(order)]
    last_use = [max([pos[u] for u in h.adj[v]], default=i) for i, v in enumerate(order)]
    frontier = [tuple(j for j in range(i) if last_use[j] >= i) for i in range(k)]
    nbrs = [g.neighbors(x) for x in range(g.n)]
    everything = range(g.n)
    images = [0] * k
    memo: dict = {}

    def rec(i: int) -> int:
        key = (i, tuple(images[j] for j in frontier[i]))
        hit = memo.get(key)
        if hit is not None:
            return hit
        bi = back[i]
        if bi:
            cands = nbrs[images[bi[0]]]
            for j in bi[1:]:
                cands = cands & nbrs[images[j]]
                if not cands:
                    break
        else:
            cands = everything
        if i == k - 1:
            total = len(cands)
        else:
            total = 0
            for x in cands:
                images[i] = x
                total += rec(i + 1)
        memo[key] = total
        return total

    return rec(0)


def count_homomorphisms_backtrack(h: Graph, g: Graph) -> int:
    """Memoized backtracking, one connected component of ``H`` at a time.

    The memo key is the level plus the images of already-placed vertices that
    still have unplaced neighbors, which is all the future depends on.
    """
    total = 1
    for comp in h.components():
        if g.n == 0:
            return 0
        total *= _count_component(h, g, comp)
        if total == 0:
            return 0
    return total


def _elimination_order(nvars: int, pairs: list[tuple[int, int]]) -> list[int]:
    """Greedy min-fill (ties: min degree, then index) order on the interaction graph."""
    nb = [set() for _ in range(nvars)]
    for u, v in pairs:
        nb[u].add(v)
        nb[v].add(u)
    alive = set(range(nvars))
    order = []
    while alive:
        def cost(x):
            ns = list(nb[x])
            fill = sum(1 for i in range(len(ns)) for j in range(i) if ns[j] not in nb[ns[i]])
            return (fill, len(ns), x)

        x = min(alive, key=cost)
        ns = list(nb[x])
        for i in range(len(ns)):
            for j in range(i):
                nb[ns[i]].add(ns[j])
                nb[ns[j]].add(ns[i])
        for y in ns:
            nb[y].discard(x)
        alive.discard(x)
        order.append(x)
    return order


def _contract(nvars: int, pairs: list[tuple[int, int]], a: np.ndarray):
    """Sum over all assignments of the product of ``a[x_u, x_v]`` over ``pairs``."""
    factors: list[tuple[tuple[int, ...], np.ndarray]] = [((u, v), a) for u, v in pairs]
    for x in _elimination_order(nvars, pairs):
        touching = [f for f in factors if x in f[0]]
        factors = [f for f in factors if x not in f[0]]
        out = tuple(sorted({y for vs, _ in touching for y in vs if y != x}))
        local = {y: i for i, y in enumerate(sorted({y for vs, _ in touching for y in vs}))}
        ops = []
        for vs, arr in touching:
            ops += [arr, [local[y] for y in vs]]
        arr = np.einsum(*ops, [local[y] for y in out], optimize="greedy")
        factors.append((out, arr))
    result = 1
    for _, arr in factors:
        result = result * arr[()] if isinstance(arr, np.ndarray) else result * arr
    return result


def _cone_vertex(h: Graph, comp: list[int]) -> int | None:
    """A vertex adjacent to the rest of ``comp`` whose removal leaves a cycle, if any.

    Contracting around such a vertex would need a tensor of order >= 3, while
    conditioning on its image only needs matrices.
    """
    if len(comp) < 4:
        return None
    for u in sorted(comp):
        if h.degree(u) == len(comp) - 1:
            rest = len(comp) - 1
            inner = sum(1 for a, b in h.edges if a != u and b != u and a in h.adj[u] and b in h.adj[u])
            if inner >= rest:  # more edges than a forest on the rest can hold
                return u
    return None


def _count_by_cone(h: Graph, comp: list[int], u: int, adj: np.ndarray) -> int:
    """``sum over images x of u`` of ``|Hom(H[comp - u], X[N(x)])|``."""
    rest, _ = h.induced([v for v in comp if v != u])
    total = 0
    for x in range(adj.shape[0]):
        nb = np.flatnonzero(adj[x])
        if len(nb):
            total += count_homomorphisms_matrix(rest, adj[np.ix_(nb, nb)])
    return total


def count_homomorphisms_matrix(h: Graph, adj: np.ndarray) -> int:
    """``|Hom(H, X)|`` for a target given by its 0/1 adjacency matrix.

    Each component of ``H`` is contracted by variable elimination in min-fill
    order.  The dtype is chosen from the bound ``N**|component|`` on every
    intermediate value: float64 (exact below 2**53, BLAS products), int64, or
    Python ints.
    """
    nx = adj.shape[0]
    total = 1
    for comp in h.components():
        if len(comp) == 1:
            total *= nx
            continue
        if nx == 0:
            return 0
        cone = _cone_vertex(h, comp)
        if cone is not None:
            total *= _count_by_cone(h, comp, cone, adj)
            if total == 0:
                return 0
            continue
        index = {v: i for i, v in enumerate(comp)}
        bound = nx ** len(comp)
        if bound < _FLOAT_EXACT:
            a = adj.astype(np.float64)
        elif bound < _INT64_SAFE:
            a = adj.astype(np.int64)
        else:
            a = adj.astype(np.int64).astype(object)
        pairs = [(index[u], index[v]) for u, v in h.edges if u in index]
        val = _contract(len(comp), pairs, a)
        total *= int(round(val)) if a.dtype == np.float64 else int(val)
        if total == 0:
            return 0
    return total


def _graph_from_matrix(adj: np.ndarray) -> Graph:
    us, vs = np.nonzero(np.triu(adj, 1))
    return Graph(adj.shape[0], zip(us.tolist(), vs.tolist()))


def count_homomorphisms(h: Graph, g: Graph, method: str = "auto") -> int:
    """Exact ``|Hom(H, G)|``.

    ``method`` is ``"backtrack"``, ``"matrix"`` (tensor contraction), or
    ``"auto"``, which contracts when ``H`` is large relative to ``G``.
    ``Hom(empty, G) = 1``; a nonempty ``H`` into an empty ``G`` gives 0.
    """
    if method == "backtrack":
        return count_homomorphisms_backtrack(h, g)
    if method == "matrix":
        return count_homomorphisms_matrix(h, g.adjacency_matrix())
    if method != "auto":
        raise ValueError(f"unknown counting method {method!r}")
    if h.n > 12 and g.n > 0 and max(map(len, h.components())) > 12:
        return count_homomorphisms_matrix(h, g.adjacency_matrix())
    return count_homomorphisms_backtrack(h, g)


def count_tree_homomorphisms(t: Graph, g: Graph) -> int:
    """``|Hom(T, G)|`` for a tree by the bottom-up neighbor-sum product."""
    if not t.is_tree():
        raise PreconditionError("count_tree_homomorphisms needs a tree")
    parent = [-1] * t.n
    order = [0]
    seen = {0}
    for v in order:
        for u in t.adj[v]:
            if u not in seen:
                seen.add(u)
                parent[u] = v
                order.append(u)
    vec = [[1] * g.n for _ in range(t.n)]
    for v in reversed(order[1:]):
        child = vec[v]
        up = [sum(child[y] for y in g.adj[x]) for x in range(g.n)]
        pv = vec[parent[v]]
        for x in range(g.n):
            pv[x] *= up[x]
    return sum(vec[0])


def cycle_hom_trace(k: int, g: Graph) -> int:
    """``trace(A**k)``, the number of closed walks of length ``k`` (= ``|Hom(C_k, G)|``)."""
    if k < 3:
        raise PreconditionError(f"cycle length must be >= 3, got {k}")
    a = g.adjacency_matrix().astype(object)
    result = None
    base = a
    e = k
    while e:
        if e & 1:
            result = base if result is None else result @ base
        e >>= 1
        if e:
            base = base @ base
    return int(sum(result[i, i] for i in range(g.n)))


def cycle_hom_count(length: int, g: Graph) -> int:
    """Brute-force route to ``|Hom(C_length, G)|`` used to cross-check traces."""
    return count_homomorphisms_backtrack(cycle_graph(length), g)


def sidorenko_rhs(h: Graph, g: Graph) -> Fraction:
    """``|V(G)|^|V(H)| * (2|E(G)| / |V(G)|^2)^|E(H)|`` as an exact rational."""
    if g.n < 1:
        raise PreconditionError("Sidorenko bound needs |V(G)| >= 1")
    return Fraction(g.n) ** h.n * Fraction(2 * g.m, g.n * g.n) ** h.m


@dataclass(frozen=True)
class SidorenkoReport:
    lhs: int
    rhs: Fraction
    holds: bool
    ratio: Fraction | None

    def to_dict(self) -> dict:
        return {
            "lhs": str(self.lhs),
            "rhs": _frac_str(self.rhs),
            "holds": self.holds,
            "ratio": None if self.ratio is None else _frac_str(self.ratio),
        }


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def sidorenko_check(h: Graph, g: Graph, method: str = "auto") -> SidorenkoReport:
    rhs = sidorenko_rhs(h, g)
    lhs = count_homomorphisms(h, g, method)
    return SidorenkoReport(lhs, rhs, lhs >= rhs, Fraction(lhs) / rhs if rhs > 0 else None)


def weighted_hom_count(h: Graph, w: WeightedGraph) -> Fraction:
    """``sum over all maps x of prod over edges ij of W(x_i, x_j)``, exactly."""
    total = Fraction(1)
    n = w.n
    rows = [[(y, val) for y, val in enumerate(w.weight[x]) if val] for x in range(n)]
    dense = w.weight
    for comp in h.components():
        if n == 0:
            return Fraction(0)
        order = _assignment_order(h, comp)
        k = len(order)
        pos = {v: i for i, v in enumerate(order)}
        back = [[pos[u] for u in h.adj[v] if pos[u] < i] for i, v in enumerate(order)]
        last_use = [max([pos[u] for u in h.adj[v]], default=i) for i, v in enumerate(order)]
        frontier = [tuple(j for j in range(i) if last_use[j] >= i) for i in range(k)]
        images = [0] * k
        memo: dict = {}

        def rec(i: int) -> Fraction:
            key = (i, tuple(images[j] for j in frontier[i]))
            hit = memo.get(key)
            if hit is not None:
                return hit
            bi = back[i]
            acc = Fraction(0)
            if bi:
                first, rest = bi[0], bi[1:]
                for x, wx in rows[images[first]]:
                    f = wx
                    for j in rest:
                        f *= dense[images[j]][x]
                        if not f:
                            break
                    if not f:
                        continue
                    images[i] = x
                    acc += f if i == k - 1 else f * rec(i + 1)
            else:
                for x in range(n):
                    images[i] = x
                    acc += 1 if i == k - 1 else rec(i + 1)
            memo[key] = acc
            return acc

        total *= rec(0)
        if not total:
            return Fraction(0)
    return total

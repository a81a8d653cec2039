"""Graph data model, text format, and the graph constructions used throughout.

Vertices are always the dense range ``0..n-1``.  Every construction defines a
deterministic labeling so that exact labeled outputs can be asserted:

* ``subdivision`` appends the vertex for edge ``i`` (in sorted edge order) as ``n + i``;
* ``k2t_replacement`` appends the ``t`` middle vertices of edge ``i`` as ``n + i*t + j``;
* ``cartesian_product`` maps ``(x1, x2)`` to ``x1 * |V(H2)| + x2``;
* ``psi_graph`` numbers ``Hom(K, G)`` in lexicographic order of image arrays.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import GraphError
from .rng import bernoulli_below, draw_u64, stream

Edge = tuple[int, int]


class Graph:
    """Finite simple undirected graph on ``0..n-1``. Immutable."""

    __slots__ = ("n", "edges", "adj", "_nbr_sets")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise GraphError(f"vertex count must be nonnegative, got {n}")
        seen: set[Edge] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in seen:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.n = n
        self.edges: tuple[Edge, ...] = tuple(sorted(seen))
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in nbrs)
        self._nbr_sets = tuple(frozenset(a) for a in self.adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    def neighbors(self, v: int) -> frozenset[int]:
        return self._nbr_sets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def adjacency_matrix(self, dtype=np.int64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", tuple[int, ...]]:
        """Induced subgraph relabeled to ``0..k-1`` in ascending order of ``vertices``.

        Returns the subgraph and the tuple of original labels.
        """
        labels = tuple(sorted(set(vertices)))
        index = {v: i for i, v in enumerate(labels)}
        sub = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph(len(labels), sub), labels

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                x = queue.popleft()
                comp.append(x)
                for y in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
            out.append(sorted(comp))
        return out

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def is_tree(self) -> bool:
        return self.n >= 1 and self.m == self.n - 1 and self.is_connected()

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={list(self.edges)})"


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric ``[0, 1]``-valued weight matrix of exact rationals; diagonal allowed."""

    n: int
    weight: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.weight) != self.n or any(len(r) != self.n for r in self.weight):
            raise GraphError("weight matrix must be n x n")
        for i in range(self.n):
            for j in range(self.n):
                w = self.weight[i][j]
                if w != self.weight[j][i]:
                    raise GraphError(f"weight not symmetric at ({i}, {j})")
                if not 0 <= w <= 1:
                    raise GraphError(f"weight {w} at ({i}, {j}) outside [0, 1]")

    @classmethod
    def from_rows(cls, rows) -> "WeightedGraph":
        w = tuple(tuple(Fraction(x) for x in row) for row in rows)
        return cls(len(w), w)

    def __call__(self, u: int, v: int) -> Fraction:
        return self.weight[u][v]


# -- named families ---------------------------------------------------------

def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise GraphError(msg)


def empty_graph(n: int) -> Graph:
    _need(n >= 0, "empty graph needs n >= 0")
    return Graph(n)


def complete_graph(k: int) -> Graph:
    _need(k >= 1, "complete graph needs k >= 1")
    return Graph(k, combinations(range(k), 2))


def complete_bipartite(s: int, t: int) -> Graph:
    _need(s >= 1 and t >= 1, "complete bipartite graph needs s, t >= 1")
    return Graph(s + t, [(i, s + j) for i in range(s) for j in range(t)])


def path_graph(n: int) -> Graph:
    """Path on ``n`` vertices (``n - 1`` edges)."""
    _need(n >= 1, "path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    _need(n >= 3, "cycle length must be >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    """``K_{1,leaves}`` with center 0."""
    _need(leaves >= 1, "star needs at least one leaf")
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def tree_from_prufer(seq: Sequence[int]) -> Graph:
    n = len(seq) + 2
    _need(all(0 <= x < n for x in seq), "Prufer entries out of range")
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return Graph(n, edges)


def gnp(n: int, p, seed: int) -> Graph:
    """Erdos-Renyi ``G(n, p)``: pair ``(u, v)``, ``u < v``, is an edge iff its draw is below ``p``.

    Pair ``i`` in lexicographic order uses word ``i`` of the Philox stream keyed
    by ``seed``, so the outcome for a pair does not depend on evaluation order.
    """
    _need(n >= 1, "G(n, p) needs n >= 1")
    p = Fraction(p)
    _need(0 <= p <= 1, "p must lie in [0, 1]")
    pairs = list(combinations(range(n), 2))
    draws = draw_u64(stream(seed, 0), size=len(pairs)) if pairs else []
    return Graph(n, [e for e, d in zip(pairs, draws) if bernoulli_below(int(d), p)])


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    return Graph(g1.n + g2.n, list(g1.edges) + [(u + g1.n, v + g1.n) for u, v in g2.edges])


_FAMILIES = {
    "complete": (complete_graph, (int,)),
    "biclique": (complete_bipartite, (int, int)),
    "complete-bipartite": (complete_bipartite, (int, int)),
    "path": (path_graph, (int,)),
    "cycle": (cycle_graph, (int,)),
    "star": (star_graph, (int,)),
    "empty": (empty_graph, (int,)),
    "gnp": (gnp, (int, Fraction, int)),
}


def build_named_graph(family: str, *params) -> Graph:
    """Build a graph from a family name and parameters.

    ``family`` may also be a full ``name:params`` spec such as ``"cycle:4"``,
    ``"biclique:2,3"``, ``"gnp:16,1/2,7"``, ``"tree:0,0,1"`` (Prufer code) or
    ``"file:path/to/graph.txt"``.
    """
    if not params and ":" in family:
        family, _, rest = family.partition(":")
        if family == "file":
            with open(rest) as fh:
                return parse_graph(fh.read())
        params = tuple(x for x in rest.split(",") if x.strip() != "")
    if family == "tree":
        return tree_from_prufer([int(x) for x in params])
    if family not in _FAMILIES:
        raise GraphError(f"unknown graph family {family!r}")
    fn, types = _FAMILIES[family]
    if len(params) != len(types):
        raise GraphError(f"{family} takes {len(types)} parameter(s), got {len(params)}")
    try:
        args = [t(x) for t, x in zip(types, params)]
    except (TypeError, ValueError) as exc:
        raise GraphError(f"bad parameters for {family}: {params}") from exc
    return fn(*args)


# -- constructions ----------------------------------------------------------

def subdivision(h: Graph) -> Graph:
    return k2t_replacement(h, 1)


def k2t_replacement(h: Graph, t: int) -> Graph:
    """Replace every edge by ``K_{2,t}`` whose 2-side is the edge's endpoints."""
    if t < 1:
        raise GraphError(f"K_(2,t) replacement needs t >= 1, got {t}")
    return mixed_replacement(h, [t] * h.m)


def mixed_replacement(h: Graph, ts: Sequence[int]) -> Graph:
    """Replace edge ``i`` (sorted edge order) by ``K_{2,ts[i]}``."""
    if len(ts) != h.m:
        raise GraphError("need one multiplicity per edge")
    if any(t < 1 for t in ts):
        raise GraphError("replacement multiplicities must be >= 1")
    edges, nxt = [], h.n
    for (u, v), t in zip(h.edges, ts):
        for _ in range(t):
            edges.append((u, nxt))
            edges.append((v, nxt))
            nxt += 1
    return Graph(nxt, edges)


def cartesian_product(h1: Graph, h2: Graph) -> Graph:
    n2 = h2.n
    edges = [(a * n2 + x, b * n2 + x) for a, b in h1.edges for x in range(n2)]
    edges += [(x * n2 + a, x * n2 + b) for x in range(h1.n) for a, b in h2.edges]
    return Graph(h1.n * n2, edges)


def psi_matrix(k: Graph, g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Vertices and adjacency of ``psi_K(G)`` as arrays.

    Returns ``(homs, adj)``: ``homs[i]`` is the i-th homomorphism ``K -> G`` in
    lexicographic order and ``adj`` is the boolean adjacency matrix.
    """
    from .homs import iter_homomorphisms

    homs = np.array(list(iter_homomorphisms(k, g)), dtype=np.int64).reshape(-1, k.n)
    a = g.adjacency_matrix(dtype=bool)
    adj = np.ones((len(homs), len(homs)), dtype=bool)
    for v in range(k.n):
        col = homs[:, v]
        adj &= a[np.ix_(col, col)]
    return homs, adj


def psi_graph(k: Graph, g: Graph) -> Graph:
    """The graph on ``Hom(K, G)`` where ``h1 ~ h2`` iff ``h1(v) ~ h2(v)`` for all ``v``."""
    homs, adj = psi_matrix(k, g)
    us, vs = np.nonzero(np.triu(adj, 1))
    return Graph(len(homs), zip(us.tolist(), vs.tolist()))


# -- structure --------------------------------------------------------------

def is_bipartite(h: Graph) -> tuple[bool, list[int] | None]:
    """``(True, coloring)`` with a proper 0/1 coloring, or ``(False, None)``."""
    color = [-1] * h.n
    for s in range(h.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in h.adj[x]:
                if color[y] < 0:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return False, None
    return True, color


def find_isomorphism(g1: Graph, g2: Graph) -> list[int] | None:
    """Brute-force isomorphism search with degree pruning; returns ``phi`` with ``phi[v1] = v2``."""
    if g1.n != g2.n or g1.m != g2.m or sorted(g1.degrees()) != sorted(g2.degrees()):
        return None
    n = g1.n
    order = sorted(range(n), key=lambda v: -g1.degree(v))
    phi = [-1] * n
    used = [False] * n

    def extend(i: int) -> bool:
        if i == n:
            return True
        v = order[i]
        for w in range(n):
            if used[w] or g2.degree(w) != g1.degree(v):
                continue
            if any(g1.has_edge(v, order[j]) != g2.has_edge(w, phi[order[j]]) for j in range(i)):
                continue
            phi[v], used[w] = w, True
            if extend(i + 1):
                return True
            phi[v], used[w] = -1, False
        return False

    return phi if extend(0) else None


def is_isomorphic(g1: Graph, g2: Graph) -> bool:
    return find_isomorphism(g1, g2) is not None


# -- text format ------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"``; ``#`` lines are comments."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append((lineno, [int(tok) for tok in line.split()]))
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer token in {raw!r}") from None
    if not rows:
        raise GraphError("missing header line 'n m'")
    lineno, header = rows[0]
    if len(header) != 2 or header[0] < 0 or header[1] < 0:
        raise GraphError(f"line {lineno}: malformed header {header}")
    n, m = header
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges, found {len(body)}")
    edges = []
    for lineno, row in body:
        if len(row) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {row}")
        edges.append(tuple(row))
    return Graph(n, edges)


def serialize_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"

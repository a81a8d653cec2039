"""Tree decompositions, strong tree decompositions, and their search.

A decomposition is a list of bags (vertex subsets of ``H``) plus a tree on the
bag indices.  ``validate_decomposition`` checks the three classical axioms;
``validate_strong`` adds the two strong conditions: bag-induced subgraphs are
edge-disjoint trees, and tree-adjacent bags have isomorphic minimal subtrees
around their intersection via a map fixing the intersection pointwise.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, DecompositionError, PreconditionError
from .graph import Graph

TreeAdjacency = Mapping[int, Iterable[int]]


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[tuple[int, ...], ...]
    tree_edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        bags = tuple(tuple(sorted(set(b))) for b in self.bags)
        edges = tuple(sorted((min(a, b), max(a, b)) for a, b in self.tree_edges))
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "tree_edges", edges)
        k = len(bags)
        if k == 0:
            raise DecompositionError("decomposition needs at least one bag")
        if any(not b for b in bags):
            raise DecompositionError("bags must be nonempty")
        if len(edges) != k - 1 or len(set(edges)) != len(edges):
            raise DecompositionError(f"{k} bags need exactly {k - 1} distinct tree edges")
        if any(not (0 <= a < k and 0 <= b < k) or a == b for a, b in edges):
            raise DecompositionError("tree edge refers to a missing bag or is a loop")
        if len(_tree_components(k, edges)) != 1:
            raise DecompositionError("tree edges do not connect all bags")

    def neighbors(self, i: int) -> list[int]:
        return sorted([b for a, b in self.tree_edges if a == i] + [a for a, b in self.tree_edges if b == i])

    def tree_path(self, i: int, j: int) -> list[int]:
        """Bag indices on the unique tree path from ``i`` to ``j`` (inclusive)."""
        prev = {i: None}
        queue = deque([i])
        while queue:
            x = queue.popleft()
            for y in self.neighbors(x):
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        path = [j]
        while path[-1] != i:
            path.append(prev[path[-1]])
        return path[::-1]

    def bfs_order(self, root: int = 0, reverse_children: bool = False) -> list[tuple[int, int | None]]:
        """``(bag, parent)`` pairs in BFS order from ``root``, children by ascending index."""
        out = [(root, None)]
        seen = {root}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            kids = [y for y in self.neighbors(x) if y not in seen]
            if reverse_children:
                kids.reverse()
            for y in kids:
                seen.add(y)
                out.append((y, x))
                queue.append(y)
        return out

    def to_json(self) -> str:
        return json.dumps({"bags": [list(b) for b in self.bags],
                           "tree_edges": [list(e) for e in self.tree_edges]})

    @classmethod
    def from_json(cls, text: str) -> "TreeDecomposition":
        try:
            obj = json.loads(text)
            return cls(tuple(tuple(int(v) for v in b) for b in obj["bags"]),
                       tuple((int(a), int(b)) for a, b in obj["tree_edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DecompositionError):
                raise
            raise DecompositionError(f"malformed decomposition JSON: {exc}") from exc


def _tree_components(k: int, edges) -> list[set[int]]:
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    comps: dict[int, set[int]] = {}
    for x in range(k):
        comps.setdefault(find(x), set()).add(x)
    return list(comps.values())


@dataclass
class Check:
    ok: bool
    witness: object = None


@dataclass
class DecompositionDiagnostics:
    axiom_cover_vertices: Check
    axiom_cover_edges: Check
    axiom_path_connectivity: Check
    strong_edge_disjoint_trees: Check | None = None
    strong_iso_condition: Check | None = None
    empty_intersections: list[tuple[int, int]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        checks = [self.axiom_cover_vertices, self.axiom_cover_edges, self.axiom_path_connectivity,
                  self.strong_edge_disjoint_trees, self.strong_iso_condition]
        return all(c.ok for c in checks if c is not None)

    def to_dict(self) -> dict:
        def enc(c):
            return None if c is None else {"ok": c.ok, "witness": _jsonable(c.witness)}

        return {
            "valid": self.valid,
            "axiom_cover_vertices": enc(self.axiom_cover_vertices),
            "axiom_cover_edges": enc(self.axiom_cover_edges),
            "axiom_path_connectivity": enc(self.axiom_path_connectivity),
            "strong_edge_disjoint_trees": enc(self.strong_edge_disjoint_trees),
            "strong_iso_condition": enc(self.strong_iso_condition),
            "empty_intersections": [list(p) for p in self.empty_intersections],
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in seq]
    return x


def validate_decomposition(h: Graph, d: TreeDecomposition) -> DecompositionDiagnostics:
    for b in d.bags:
        if any(not 0 <= v < h.n for v in b):
            raise DecompositionError(f"bag {list(b)} has vertices outside 0..{h.n - 1}")
    sets = [set(b) for b in d.bags]
    covered = set().union(*sets)
    missing = sorted(set(range(h.n)) - covered)
    cover_v = Check(not missing, missing[0] if missing else None)

    uncovered = next((e for e in h.edges if not any(e[0] in s and e[1] in s for s in sets)), None)
    cover_e = Check(uncovered is None, uncovered)

    path_check = Check(True)
    for i, j in combinations(range(len(sets)), 2):
        inter = sets[i] & sets[j]
        if not inter:
            continue
        for z in d.tree_path(i, j)[1:-1]:
            lost = inter - sets[z]
            if lost:
                path_check = Check(False, {"X": i, "Y": j, "Z": z, "vertex": min(lost)})
                break
        if not path_check.ok:
            break
    return DecompositionDiagnostics(cover_v, cover_e, path_check)


def tree_adjacency(h: Graph, vertices: Iterable[int]) -> dict[int, set[int]]:
    """Adjacency map of ``H[vertices]`` keyed by original labels."""
    vs = set(vertices)
    return {v: {u for u in h.adj[v] if u in vs} for v in sorted(vs)}


def _is_tree_adj(adj: TreeAdjacency) -> bool:
    vs = list(adj)
    if not vs:
        return False
    m = sum(len(list(adj[v])) for v in vs) // 2
    if m != len(vs) - 1:
        return False
    seen = {vs[0]}
    queue = deque([vs[0]])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(vs)


def minimal_subtree(tree: Graph | TreeAdjacency, subset: Iterable[int]) -> frozenset[int]:
    """Smallest connected vertex set of ``tree`` containing ``subset``.

    An empty ``subset`` yields the single lowest-labeled vertex.
    """
    adj = {v: set(tree.adj[v]) for v in range(tree.n)} if isinstance(tree, Graph) else \
        {v: set(ns) for v, ns in tree.items()}
    if not _is_tree_adj(adj):
        raise PreconditionError("minimal_subtree needs a tree")
    keep = set(subset)
    if not keep <= set(adj):
        raise PreconditionError("subset is not contained in the tree")
    if not keep:
        return frozenset({min(adj)})
    alive = set(adj)
    deg = {v: len(adj[v]) for v in adj}
    leaves = deque(v for v in adj if deg[v] <= 1 and v not in keep)
    while leaves:
        v = leaves.popleft()
        if v not in alive or len(alive) == 1:
            continue
        alive.discard(v)
        for u in adj[v]:
            if u in alive:
                deg[u] -= 1
                if deg[u] <= 1 and u not in keep:
                    leaves.append(u)
    return frozenset(alive)


def rooted_iso_fixing(t1: TreeAdjacency, t2: TreeAdjacency, fixed: Iterable[int]) -> dict[int, int] | None:
    """Isomorphism ``phi: t1 -> t2`` with ``phi(x) = x`` on ``fixed``, or ``None``.

    Trees are adjacency maps over a shared labeling.  Backtracking assigns
    vertices in BFS order from the fixed set and only tries targets of equal
    degree that are consistent with all earlier assignments.
    """
    a1 = {v: set(ns) for v, ns in t1.items()}
    a2 = {v: set(ns) for v, ns in t2.items()}
    fixed = set(fixed)
    if len(a1) != len(a2) or not fixed <= set(a1) or not fixed <= set(a2):
        return None
    if sum(map(len, a1.values())) != sum(map(len, a2.values())):
        return None
    phi: dict[int, int] = {}
    for x in fixed:
        if len(a1[x]) != len(a2[x]):
            return None
        phi[x] = x
    for x in fixed:
        for y in fixed:
            if (y in a1[x]) != (y in a2[x]):
                return None

    # BFS from the fixed set keeps most choices pinned by an already-mapped neighbor
    seeds = sorted(fixed) or [min(a1)]
    order, seen = [], set(fixed)
    queue = deque(seeds)
    if not fixed:
        seen.add(seeds[0])
        order.append(seeds[0])
    while queue:
        x = queue.popleft()
        for y in sorted(a1[x]):
            if y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    order += sorted(set(a1) - seen)
    used = set(phi.values())

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        mapped_nbrs = [u for u in a1[v] if u in phi]
        if mapped_nbrs:
            cands = set(a2[phi[mapped_nbrs[0]]])
            for u in mapped_nbrs[1:]:
                cands &= a2[phi[u]]
        else:
            cands = set(a2)
        for w in sorted(cands - used):
            if len(a2[w]) != len(a1[v]):
                continue
            if any((w in a2[phi[u]]) != (u in a1[v]) for u in phi):
                continue
            phi[v] = w
            used.add(w)
            if extend(i + 1):
                return True
            del phi[v]
            used.discard(w)
        return False

    return dict(phi) if extend(0) else None


def _pair_iso(h: Graph, x: Sequence[int], y: Sequence[int]) -> tuple[bool, bool]:
    """``(iso exists, intersection empty)`` for tree-adjacent bags whose induced graphs are trees."""
    inter = set(x) & set(y)
    tx, ty = tree_adjacency(h, x), tree_adjacency(h, y)
    sx, sy = minimal_subtree(tx, inter), minimal_subtree(ty, inter)
    if not inter:
        # both minimal subtrees are single designated vertices; nothing to fix
        return True, True
    phi = rooted_iso_fixing(tree_adjacency(h, sx), tree_adjacency(h, sy), inter)
    return phi is not None, False


def validate_strong(h: Graph, d: TreeDecomposition) -> DecompositionDiagnostics:
    diag = validate_decomposition(h, d)
    if not (diag.axiom_cover_vertices.ok and diag.axiom_cover_edges.ok and diag.axiom_path_connectivity.ok):
        raise PreconditionError("validate_strong needs a valid tree decomposition")
    owner: dict[tuple[int, int], int] = {}
    trees_ok = Check(True)
    is_tree = []
    for i, bag in enumerate(d.bags):
        ok = _is_tree_adj(tree_adjacency(h, bag))
        is_tree.append(ok)
        if not ok and trees_ok.ok:
            trees_ok = Check(False, {"bag": i, "reason": "induced subgraph is not a tree"})
        sub = set(bag)
        for e in h.edges:
            if e[0] in sub and e[1] in sub:
                if e in owner and trees_ok.ok:
                    trees_ok = Check(False, {"edge": list(e), "bags": [owner[e], i]})
                owner.setdefault(e, i)
    diag.strong_edge_disjoint_trees = trees_ok

    iso = Check(True)
    for a, b in d.tree_edges:
        if not (is_tree[a] and is_tree[b]):
            if iso.ok:
                iso = Check(False, {"pair": [a, b], "reason": "bag not a tree"})
            continue
        ok, empty = _pair_iso(h, d.bags[a], d.bags[b])
        if empty:
            diag.empty_intersections.append((a, b))
        if not ok and iso.ok:
            iso = Check(False, {"pair": [a, b], "intersection": sorted(set(d.bags[a]) & set(d.bags[b]))})
    diag.strong_iso_condition = iso
    return diag


def is_strong_decomposition(h: Graph, d: TreeDecomposition) -> bool:
    try:
        return validate_strong(h, d).valid
    except PreconditionError:
        return False


# -- search -----------------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    decomposition: TreeDecomposition | None
    exhaustive: bool
    covers_examined: int


def _junction_tree(h: Graph, bags: list[tuple[int, ...]]) -> tuple[tuple[int, int], ...] | None:
    """A tree on ``bags`` satisfying path connectivity and the iso condition, if any.

    Every spanning tree has weight ``sum |X & Y|`` at most ``sum_v (c_v - 1)``
    where ``c_v`` counts bags containing ``v``, with equality exactly for trees
    with the connectivity property.  So a maximum-weight spanning tree over the
    iso-compatible pairs attains that bound iff a valid tree exists.
    """
    k = len(bags)
    sets = [set(b) for b in bags]
    target = sum(sum(1 for s in sets if v in s) - 1 for v in set().union(*sets))
    cands = []
    for i, j in combinations(range(k), 2):
        w = len(sets[i] & sets[j])
        if _pair_iso(h, bags[i], bags[j])[0]:
            cands.append((-w, i, j))
    cands.sort()
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen, weight = [], 0
    for negw, i, j in cands:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
            weight -= negw
    if len(chosen) != k - 1 or weight != target:
        return None
    return tuple(chosen)


def _induced_tree_blocks(h: Graph) -> list[tuple[frozenset[int], int]]:
    """Vertex sets ``X`` (at least one edge) with ``H[X]`` a tree, paired with their edge bitmask."""
    edge_bit = {e: 1 << i for i, e in enumerate(h.edges)}
    blocks = []
    for mask in range(1, 1 << h.n):
        vs = [v for v in range(h.n) if mask >> v & 1]
        if len(vs) < 2:
            continue
        es = [e for e in h.edges if mask >> e[0] & 1 and mask >> e[1] & 1]
        if len(es) != len(vs) - 1:
            continue
        if _is_tree_adj(tree_adjacency(h, vs)):
            blocks.append((frozenset(vs), sum(edge_bit[e] for e in es)))
    blocks.sort(key=lambda b: (-len(b[0]), sorted(b[0])))
    return blocks


def find_strong_decomposition(
    h: Graph,
    max_vertices: int = 10,
    max_covers: int = 200_000,
    time_limit: float | None = 60.0,
) -> SearchResult:
    """Search bag families that partition ``E(H)`` into induced trees.

    Isolated vertices get singleton bags.  For each family, a valid bag tree is
    found or ruled out exactly (see ``_junction_tree``).  A ``None`` result
    with ``exhaustive=True`` means no strong decomposition exists whose bags
    each carry at least one edge; :class:`BudgetExceeded` is raised instead of
    returning a partial answer.
    """
    if h.n > max_vertices:
        raise BudgetExceeded(f"|V(H)| = {h.n} exceeds the search cap {max_vertices}")
    if h.n == 0:
        return SearchResult(None, True, 0)
    start = time.monotonic()
    singles = [(v,) for v in range(h.n) if h.degree(v) == 0]
    blocks = _induced_tree_blocks(h)
    full = (1 << h.m) - 1
    by_edge = [[b for b in blocks if b[1] >> i & 1] for i in range(h.m)]
    examined = 0

    def covers(used: int, chosen: list):
        if used == full:
            yield list(chosen)
            return
        low = (~used & (used + 1)).bit_length() - 1
        for vs, mask in by_edge[low]:
            if mask & used:
                continue
            chosen.append(vs)
            yield from covers(used | mask, chosen)
            chosen.pop()

    for cover in covers(0, []):
        examined += 1
        if examined > max_covers:
            raise BudgetExceeded(f"examined more than {max_covers} bag families")
        if time_limit is not None and time.monotonic() - start > time_limit:
            raise BudgetExceeded(f"search exceeded {time_limit} s")
        bags = [tuple(sorted(vs)) for vs in cover] + singles
        tree = _junction_tree(h, bags)
        if tree is not None:
            d = TreeDecomposition(tuple(bags), tree)
            if not validate_strong(h, d).valid:
                raise AssertionError("search produced an invalid decomposition")
            return SearchResult(d, True, examined)
    return SearchResult(None, True, examined)


@dataclass(frozen=True)
class FamilyClassification:
    reflection_tree: bool
    tree_arrangeable_witness: tuple[int, ...] | None
    arrangement: TreeDecomposition | None


def _is_star(d: TreeDecomposition) -> bool:
    k = len(d.bags)
    if k <= 2:
        return True
    return any(len(d.neighbors(c)) == k - 1 for c in range(k))


def tree_arrangement(h: Graph, max_vertices: int = 12) -> tuple[tuple[int, ...], TreeDecomposition] | None:
    """An independent set ``A`` whose closed neighborhoods form a strong decomposition."""
    if h.n > max_vertices:
        raise BudgetExceeded(f"|V(H)| = {h.n} exceeds the independent-set search cap {max_vertices}")
    for size in range(1, h.n + 1):
        for a in combinations(range(h.n), size):
            if any(h.has_edge(u, v) for u, v in combinations(a, 2)):
                continue
            bags = [tuple(sorted(set(h.adj[x]) | {x})) for x in a]
            if set().union(*map(set, bags)) != set(range(h.n)):
                continue
            try:
                d0 = TreeDecomposition(tuple(bags), tuple((0, i) for i in range(1, len(bags))))
            except DecompositionError:
                continue
            if len(set(d0.bags)) != len(d0.bags):
                continue
            if not all(_is_tree_adj(tree_adjacency(h, b)) for b in d0.bags):
                continue
            tree = _junction_tree(h, list(d0.bags))
            if tree is None:
                continue
            d = TreeDecomposition(d0.bags, tree)
            if is_strong_decomposition(h, d):
                return a, d
    return None


def classify_family(h: Graph, d: TreeDecomposition) -> FamilyClassification:
    if not validate_strong(h, d).valid:
        raise PreconditionError("classify_family needs a strong tree decomposition")
    found = tree_arrangement(h)
    return FamilyClassification(
        reflection_tree=_is_star(d),
        tree_arrangeable_witness=None if found is None else found[0],
        arrangement=None if found is None else found[1],
    )

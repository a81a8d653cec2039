"""Tree-indexed branching random walks and the strong-decomposition embedding.

A ``T``-BRW places the root of ``T`` by the stationary law ``deg(y) / 2|E(G)|``
and every child uniformly among the neighbors of its parent's image.  Its law
has the closed form ``p_T(h) = 1/(2|E|) * prod_v deg_G(h(v))**(1 - deg_T(v))``,
which :func:`brw_prob` evaluates; :func:`brw_prob_by_steps` multiplies the
step probabilities of one concrete root and order instead.

Exact laws are :class:`ExactDistribution` objects built by enumerating
``Hom`` and attaching closed-form probabilities.  Samplers draw from
counter-based streams, one per ``(seed, sample index)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, PreconditionError
from .graph import Graph
from .homs import is_homomorphism, iter_homomorphisms
from .rng import choose_rational, choose_weighted, stream, uniform_below
from .treedecomp import TreeDecomposition, minimal_subtree, validate_strong

DEFAULT_MAX_SUPPORT = 2_000_000


class NoExtension(PreconditionError):
    """The partial map has no extension to the minimal subtree around its domain."""


@dataclass(frozen=True)
class ExactDistribution:
    """Finitely supported law on image tuples with exact rational masses summing to 1."""

    support: tuple[tuple[int, ...], ...]
    prob: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.prob):
            raise ValueError("support and prob differ in length")
        if any(p <= 0 for p in self.prob):
            raise ValueError("probabilities must be positive on the support")
        if sum(self.prob, Fraction(0)) != 1:
            raise ValueError("probabilities do not sum to 1")

    @classmethod
    def from_weights(cls, items: Iterable[tuple[tuple[int, ...], Fraction]]) -> "ExactDistribution":
        pairs = [(h, Fraction(p)) for h, p in items if p]
        pairs.sort()
        return cls(tuple(h for h, _ in pairs), tuple(p for _, p in pairs))

    def as_dict(self) -> dict[tuple[int, ...], Fraction]:
        return dict(zip(self.support, self.prob))

    def __len__(self) -> int:
        return len(self.support)

    def pushforward(self, positions: Sequence[int]) -> dict[tuple[int, ...], Fraction]:
        """Law of the sub-tuple at ``positions`` (exact aggregation)."""
        out: dict[tuple[int, ...], Fraction] = {}
        for h, p in zip(self.support, self.prob):
            key = tuple(h[i] for i in positions)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def condition(self, fixed: Mapping[int, int]) -> "ExactDistribution":
        """Renormalized restriction to outcomes agreeing with ``fixed``."""
        kept = [(h, p) for h, p in zip(self.support, self.prob) if all(h[v] == x for v, x in fixed.items())]
        z = sum((p for _, p in kept), Fraction(0))
        if z == 0:
            raise NoExtension("conditioning event has probability zero")
        return ExactDistribution.from_weights((h, p / z) for h, p in kept)


def _require_tree(t: Graph) -> None:
    if not t.is_tree():
        raise PreconditionError("T must be a tree")


def _require_edge(g: Graph) -> None:
    if g.m == 0:
        raise PreconditionError("G has no edge; the branching random walk is undefined")


def bfs_parents(t: Graph, roots: Iterable[int]) -> tuple[list[int], list[int]]:
    """Multi-source BFS order and parent array (``-1`` on the sources).

    Sources keep their given order; children are visited by ascending index.
    """
    roots = list(roots)
    parent = [-1] * t.n
    seen = set(roots)
    order = list(roots)
    queue = deque(roots)
    while queue:
        x = queue.popleft()
        for y in t.adj[x]:
            if y not in seen:
                seen.add(y)
                parent[y] = x
                order.append(y)
                queue.append(y)
    return order, parent


def brw_prob(t: Graph, g: Graph, h: Sequence[int]) -> Fraction:
    """Closed-form ``p_T(h)``; independent of root and vertex order."""
    _require_tree(t)
    _require_edge(g)
    if not is_homomorphism(t, g, h):
        raise PreconditionError(f"{tuple(h)} is not a homomorphism T -> G")
    return _weight(t.degrees(), g, h)


def _weight(tdeg: Sequence[int], g: Graph, h: Sequence[int]) -> Fraction:
    # closed form without the input checks, for inner loops
    num, den = 1, 2 * g.m
    for v, dv in enumerate(tdeg):
        if dv > 1:
            den *= g.degree(h[v]) ** (dv - 1)
        elif dv == 0:
            num *= g.degree(h[v])
    return Fraction(num, den)


def brw_prob_by_steps(t: Graph, g: Graph, h: Sequence[int], root: int = 0) -> Fraction:
    """``P[w_T = h]`` as the product of the sampler's step probabilities from ``root``."""
    _require_tree(t)
    _require_edge(g)
    if not is_homomorphism(t, g, h):
        return Fraction(0)
    order, parent = bfs_parents(t, [root])
    p = Fraction(g.degree(h[root]), 2 * g.m)
    for v in order[1:]:
        p /= g.degree(h[parent[v]])
    return p


def brw_distribution(t: Graph, g: Graph, max_support: int = DEFAULT_MAX_SUPPORT) -> ExactDistribution:
    """The ``T``-BRW law on ``Hom(T, G)``.

    Homomorphisms of probability zero (only possible when ``T`` is a single
    vertex mapped to an isolated vertex) are left out of the support.
    """
    _require_tree(t)
    _require_edge(g)
    items = []
    tdeg = t.degrees()
    for h in iter_homomorphisms(t, g):
        items.append((h, _weight(tdeg, g, h)))
        if len(items) > max_support:
            raise BudgetExceeded(f"|Hom(T, G)| exceeds {max_support}")
    return ExactDistribution.from_weights(items)


def brw_sample(t: Graph, g: Graph, seed: int, index: int = 0, root: int = 0) -> tuple[int, ...]:
    """One ``T``-BRW draw from stream ``(seed, index)``."""
    _require_tree(t)
    _require_edge(g)
    return _walk(t, g, stream(seed, index), root)


def _walk(t: Graph, g: Graph, rng, root: int) -> tuple[int, ...]:
    img = [-1] * t.n
    img[root] = choose_weighted(rng, g.degrees())
    order, parent = bfs_parents(t, [root])
    for v in order[1:]:
        nbrs = g.adj[img[parent[v]]]
        img[v] = nbrs[uniform_below(rng, len(nbrs))]
    return tuple(img)


def brw_sample_batch(t: Graph, g: Graph, seed: int, count: int, root: int = 0) -> list[tuple[int, ...]]:
    _require_tree(t)
    _require_edge(g)
    return [_walk(t, g, stream(seed, i), root) for i in range(count)]


def _subtree_hom(t: Graph, s: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    sub, labels = t.induced(s)
    if not sub.is_tree():
        raise PreconditionError(f"{sorted(labels)} does not induce a subtree")
    return sub, labels


def marginal_prob(t: Graph, g: Graph, s: Iterable[int], h: Mapping[int, int]) -> Fraction:
    """``sum of p_T(f)`` over homomorphisms ``f`` of ``T`` extending ``h`` on ``S``."""
    sub, labels = _subtree_hom(t, s)
    if set(h) != set(labels):
        raise PreconditionError("h must be defined exactly on S")
    if not is_homomorphism(sub, g, [h[v] for v in labels]):
        raise PreconditionError("h is not a homomorphism on T[S]")
    _require_tree(t)
    _require_edge(g)
    tdeg = t.degrees()
    return sum((_weight(tdeg, g, f) for f in iter_homomorphisms(t, g, fixed=h)), Fraction(0))


def subtree_prob(t: Graph, g: Graph, s: Iterable[int], h: Mapping[int, int]) -> Fraction:
    """``p_S(h)`` for the subtree ``S`` of ``T``, computed on ``T[S]`` alone."""
    sub, labels = _subtree_hom(t, s)
    return brw_prob(sub, g, [h[v] for v in labels])


# -- partial embeddings -------------------------------------------------------

@dataclass(frozen=True)
class _PartialLaw:
    subtree: tuple[int, ...]
    order: list[int]
    parent: list[int]
    anchors: list[tuple[tuple[int, ...], Fraction]]  # (images on subtree, mass)


def _partial_setup(t: Graph, g: Graph, h: Mapping[int, int]) -> _PartialLaw:
    _require_tree(t)
    _require_edge(g)
    if any(not (0 <= v < t.n and 0 <= x < g.n) for v, x in h.items()):
        raise PreconditionError("partial map out of range")
    s = sorted(minimal_subtree(t, h.keys()))
    sub, labels = t.induced(s)
    local = {v: i for i, v in enumerate(labels)}
    ext = list(iter_homomorphisms(sub, g, fixed={local[v]: x for v, x in h.items()}))
    if not ext:
        raise NoExtension("no T-BRW starts from this partial embedding")
    sdeg = sub.degrees()
    weights = [_weight(sdeg, g, y) for y in ext]
    z = sum(weights, Fraction(0))
    order, parent = bfs_parents(t, labels)
    return _PartialLaw(tuple(labels), order, parent, [(y, w / z) for y, w in zip(ext, weights)])


def partial_brw_distribution(t: Graph, g: Graph, h: Mapping[int, int]) -> ExactDistribution:
    """Law of the ``T``-BRW started from the partial map ``h``."""
    law = _partial_setup(t, g, h)
    items = []
    outside = law.order[len(law.subtree):]
    for y, mass in law.anchors:
        fixed = dict(zip(law.subtree, y))
        for f in iter_homomorphisms(t, g, fixed=fixed):
            p = mass
            for v in outside:
                p /= g.degree(f[law.parent[v]])
            items.append((f, p))
    return ExactDistribution.from_weights(items)


def partial_brw_sample(t: Graph, g: Graph, h: Mapping[int, int], seed: int, index: int = 0) -> tuple[int, ...]:
    return _partial_walk(t, g, h, stream(seed, index))


def _partial_walk(t: Graph, g: Graph, h: Mapping[int, int], rng) -> tuple[int, ...]:
    law = _partial_setup(t, g, h)
    y, _ = law.anchors[choose_rational(rng, [m for _, m in law.anchors])]
    img = [-1] * t.n
    for v, x in zip(law.subtree, y):
        img[v] = x
    for v in law.order[len(law.subtree):]:
        nbrs = g.adj[img[law.parent[v]]]
        img[v] = nbrs[uniform_below(rng, len(nbrs))]
    return tuple(img)


# -- strongly tree-decomposable embedding ------------------------------------

@dataclass(frozen=True)
class EmbedTrace:
    seed: int
    index: int
    vertex_order: tuple[int, ...]
    bag_order: tuple[int, ...]
    homomorphism: tuple[int, ...]


def admissible_order(d: TreeDecomposition, root: int = 0, reverse_children: bool = False) -> list[int]:
    return [b for b, _ in d.bfs_order(root, reverse_children)]


def _check_bag_order(d: TreeDecomposition, order: Sequence[int]) -> None:
    if sorted(order) != list(range(len(d.bags))):
        raise PreconditionError("bag order must list every bag once")
    placed = {order[0]}
    for b in order[1:]:
        if not any(nb in placed for nb in d.neighbors(b)):
            raise PreconditionError(f"bag {b} precedes its parent in the order")
        placed.add(b)


def _require_strong(h: Graph, d: TreeDecomposition) -> None:
    if not validate_strong(h, d).valid:
        raise PreconditionError("decomposition is not a strong tree decomposition of H")


class _BagLaw:
    """Per-bag data for the composite law: induced tree, anchors, normalizers."""

    def __init__(self, h: Graph, g: Graph, bag: Sequence[int], anchored: Sequence[int]):
        self.tree, self.labels = h.induced(bag)
        self.local = {v: i for i, v in enumerate(self.labels)}
        self.anchored = tuple(sorted(anchored))
        s = sorted(minimal_subtree(self.tree, [self.local[v] for v in self.anchored]))
        self.sub, sub_labels = self.tree.induced(s)
        self.s_local = tuple(sub_labels)  # indices into self.tree
        self.sub_deg = self.sub.degrees()
        order, self.parent = bfs_parents(self.tree, self.s_local)
        self.outside = order[len(self.s_local):]
        self.g = g
        self._z: dict[tuple[int, ...], Fraction] = {}

    def _normalizer(self, anchor_images: tuple[int, ...]) -> Fraction:
        z = self._z.get(anchor_images)
        if z is None:
            pos = {v: i for i, v in enumerate(self.s_local)}
            fixed = {pos[self.local[v]]: x for v, x in zip(self.anchored, anchor_images)}
            z = sum((_weight(self.sub_deg, self.g, y) for y in iter_homomorphisms(self.sub, self.g, fixed)),
                    Fraction(0))
            self._z[anchor_images] = z
        return z

    def conditional(self, full: Sequence[int]) -> Fraction:
        """``P[bag gets full|bag | anchored vertices get full|anchored]`` under the partial BRW."""
        z = self._normalizer(tuple(full[v] for v in self.anchored))
        if z == 0:
            return Fraction(0)
        x = [full[v] for v in self.labels]
        p = _weight(self.sub_deg, self.g, [x[i] for i in self.s_local]) / z
        for v in self.outside:
            p /= self.g.degree(x[self.parent[v]])
        return p


def std_embed_distribution(
    h: Graph,
    d: TreeDecomposition,
    g: Graph,
    root: int = 0,
    order: Sequence[int] | None = None,
    max_support: int = DEFAULT_MAX_SUPPORT,
) -> ExactDistribution:
    """Exact law of the bag-by-bag embedding for a given root and bag order.

    ``P[w = h] = p_{H[R]}(h|R) * prod_i P[bag X_i gets h | X_i & Z_{i-1} gets h]``
    where ``Z_{i-1}`` is the union of bags placed before ``X_i``.
    """
    _require_strong(h, d)
    _require_edge(g)
    order = list(order) if order is not None else admissible_order(d, root)
    if order[0] != root:
        raise PreconditionError("bag order must start at the root")
    _check_bag_order(d, order)
    root_tree, root_labels = h.induced(d.bags[root])
    placed = set(d.bags[root])
    steps = []
    for b in order[1:]:
        bag = d.bags[b]
        steps.append(_BagLaw(h, g, bag, [v for v in bag if v in placed]))
        placed |= set(bag)
    items = []
    total = Fraction(0)
    root_deg = root_tree.degrees()
    for f in iter_homomorphisms(h, g):
        p = _weight(root_deg, g, [f[v] for v in root_labels])
        for step in steps:
            if not p:
                break
            p *= step.conditional(f)
        if p:
            items.append((f, p))
            total += p
            if len(items) > max_support:
                raise BudgetExceeded(f"|Hom(H, G)| exceeds {max_support}")
    if total != 1:
        raise AssertionError(f"embedding law has total mass {total}; the process aborted somewhere")
    return ExactDistribution.from_weights(items)


def std_embed_sample(
    h: Graph,
    d: TreeDecomposition,
    g: Graph,
    seed: int,
    root: int = 0,
    index: int = 0,
    order: Sequence[int] | None = None,
) -> EmbedTrace:
    """One draw of the bag-by-bag embedding; every step uses stream ``(seed, index)``."""
    _require_strong(h, d)
    _require_edge(g)
    order = list(order) if order is not None else admissible_order(d, root)
    _check_bag_order(d, order)
    rng = stream(seed, index)
    img = [-1] * h.n
    vertex_order: list[int] = []
    for i, b in enumerate(order):
        tree, labels = h.induced(d.bags[b])
        if i == 0:
            sub_img = _walk(tree, g, rng, 0)
        else:
            anchored = {j: img[v] for j, v in enumerate(labels) if img[v] >= 0}
            try:
                sub_img = _partial_walk(tree, g, anchored, rng)
            except NoExtension as exc:
                raise AssertionError("embedding aborted on a strong decomposition") from exc
        for j, v in enumerate(labels):
            if img[v] < 0:
                img[v] = sub_img[j]
                vertex_order.append(v)
    out = tuple(img)
    if not is_homomorphism(h, g, out):
        raise AssertionError("embedding produced a non-homomorphism")
    return EmbedTrace(seed, index, tuple(vertex_order), tuple(order), out)

"""Shannon entropies of exact laws and the two entropy lower-bound chains.

All probabilities stay rational until the final ``p * log(1/p)`` terms, which
are evaluated in double precision with the natural logarithm.  Comparisons
that are equalities or inequalities in exact arithmetic carry ``TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from typing import Iterable, Mapping, Sequence

from .brw import ExactDistribution, brw_distribution, std_embed_distribution
from .errors import PreconditionError
from .graph import Graph
from .homs import count_homomorphisms
from .treedecomp import TreeDecomposition

TOL = 1e-9


def _log_fraction(p: Fraction) -> float:
    # log of numerator and denominator separately keeps huge rationals accurate
    return log(p.numerator) - log(p.denominator)


def entropy(law) -> float:
    """``sum p log(1/p)`` in nats for an :class:`ExactDistribution`, a mapping, or masses."""
    if isinstance(law, ExactDistribution):
        probs: Iterable[Fraction] = law.prob
    elif isinstance(law, Mapping):
        probs = law.values()
    else:
        probs = law
    probs = [Fraction(p) for p in probs]
    if any(p < 0 for p in probs) or sum(probs, Fraction(0)) != 1:
        raise PreconditionError("entropy needs a normalized law")
    return -sum(float(p) * _log_fraction(p) for p in probs if p)


def marginal_entropy(dist: ExactDistribution, positions: Sequence[int]) -> float:
    """Entropy of the coordinates ``positions`` of the random map (0 for no coordinates)."""
    return entropy(dist.pushforward(sorted(set(positions))))


def conditional_entropy(dist: ExactDistribution, target: Sequence[int], given: Sequence[int]) -> float:
    """``H(Y | X) = H(X, Y) - H(X)`` with ``X, Y`` coordinate blocks of one law."""
    return marginal_entropy(dist, list(given) + list(target)) - marginal_entropy(dist, given)


def log_sidorenko_rhs(v: int, e: int, g: Graph) -> float:
    """``log(n**v * (2m / n**2)**e)``."""
    if g.m == 0:
        raise PreconditionError("G has no edge")
    n = g.n
    return v * log(n) + e * (log(2 * g.m) - 2 * log(n))


@dataclass
class EntropyReport:
    entropy_value: float
    lower_bound: float
    component_table: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.entropy_value - self.lower_bound

    @property
    def holds(self) -> bool:
        return self.slack >= -TOL and all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "entropy": self.entropy_value,
            "lower_bound": self.lower_bound,
            "slack": self.slack,
            "holds": self.holds,
            "checks": dict(self.checks),
            "components": self.component_table,
        }


def tree_entropy_bound(t: Graph, g: Graph) -> EntropyReport:
    """Entropy of the ``T``-BRW against ``log(n^v (2m/n^2)^e)`` with the proof's ingredients.

    ``H(w) = sum over tree edges of H(w(u), w(v)) - sum_v (deg_T(v) - 1) H(w(v))``
    holds for any tree-indexed Markov law; each edge term equals
    ``log(2|E(G)|)`` and the vertex term is at most ``(2|E(T)| - |V(T)|) log n``
    when ``T`` has no vertex of degree 0.
    """
    dist = brw_distribution(t, g)
    h = entropy(dist)
    n = g.n
    edge_terms = [marginal_entropy(dist, (u, v)) for u, v in t.edges]
    vertex_terms = [marginal_entropy(dist, (v,)) for v in range(t.n)]
    edge_sum = sum(edge_terms)
    vertex_sum = sum((t.degree(v) - 1) * vertex_terms[v] for v in range(t.n))
    vertex_cap = (2 * t.m - t.n) * log(n)
    bound = log_sidorenko_rhs(t.n, t.m, g)
    checks = {
        "edge_entropy_identity": abs(edge_sum - t.m * log(2 * g.m)) <= TOL,
        "vertex_term_bound": vertex_sum <= vertex_cap + TOL,
        "telescoping": abs(h - (edge_sum - vertex_sum)) <= TOL,
        "entropy_at_most_log_support": h <= log(len(dist)) + TOL,
    }
    table = {
        "edge_entropies": edge_terms,
        "vertex_entropies": vertex_terms,
        "edge_sum": edge_sum,
        "vertex_sum": vertex_sum,
        "vertex_cap": vertex_cap,
    }
    return EntropyReport(h, bound, table, checks)


def std_entropy_chain(h: Graph, d: TreeDecomposition, g: Graph, root: int = 0) -> EntropyReport:
    """Entropy chain for the bag-by-bag embedding of a strongly tree-decomposable ``H``.

    Checks, from the exact law of ``w``:
      * ``telescoping``: ``H(w) = sum_X H(w(X)) - sum_{XY} H(w(X & Y))``
      * ``bag_bounds``: every bag meets the tree bound for ``H[X]``
      * ``bag_marginals_are_brw``: the law of ``w`` on ``X`` is exactly the ``H[X]``-BRW law
      * ``intersection_bounds``: ``H(w(X & Y)) <= |X & Y| log n``
      * ``edge_count_identity`` and ``vertex_count_identity`` (exact)
      * ``final_bound``: slack >= -TOL
      * ``entropy_at_most_log_hom``: ``H(w) <= log |Hom(H, G)|``
    """
    dist = std_embed_distribution(h, d, g, root=root)
    hw = entropy(dist)
    n = g.n
    bag_rows = []
    bag_ok = marginal_ok = True
    edges_in_bags = 0
    for bag in d.bags:
        sub, labels = h.induced(bag)
        hx = marginal_entropy(dist, labels)
        bx = log_sidorenko_rhs(sub.n, sub.m, g)
        bag_ok &= hx >= bx - TOL
        marginal_ok &= dist.pushforward(labels) == brw_distribution(sub, g).as_dict()
        edges_in_bags += sub.m
        bag_rows.append({"bag": list(labels), "entropy": hx, "bound": bx})
    inter_rows = []
    inter_ok = True
    overlap = 0
    for a, b in d.tree_edges:
        common = sorted(set(d.bags[a]) & set(d.bags[b]))
        hi = marginal_entropy(dist, common)
        inter_ok &= hi <= len(common) * log(n) + TOL
        overlap += len(common)
        inter_rows.append({"edge": [a, b], "intersection": common, "entropy": hi})
    telescoped = sum(r["entropy"] for r in bag_rows) - sum(r["entropy"] for r in inter_rows)
    chained = sum(r["bound"] for r in bag_rows) - overlap * log(n)
    bound = log_sidorenko_rhs(h.n, h.m, g)
    homs = count_homomorphisms(h, g)
    checks = {
        "telescoping": abs(hw - telescoped) <= TOL,
        "bag_bounds": bag_ok,
        "bag_marginals_are_brw": marginal_ok,
        "intersection_bounds": inter_ok,
        "edge_count_identity": edges_in_bags == h.m,
        "vertex_count_identity": sum(len(x) for x in d.bags) - overlap == h.n,
        "chained_bound_matches": abs(chained - bound) <= TOL,
        "entropy_at_most_log_hom": hw <= log(homs) + TOL,
    }
    table = {
        "bags": bag_rows,
        "intersections": inter_rows,
        "telescoped": telescoped,
        "hom_count": homs,
    }
    return EntropyReport(hw, bound, table, checks)

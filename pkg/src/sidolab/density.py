"""Density toolkit: local density, min-degree cores, codegree sums, and count audits.

Codegrees ``d(x, y) = |N(x) & N(y)|`` include the diagonal ``d(x, x) = deg(x)``,
which is what makes ``sum_x prod_{ij in E(H)} d(x_i, x_j)`` count homomorphisms
of the subdivision of ``H``.  Every comparison here is between exact integers
or rationals; expectations are cleared by multiplying out powers of ``n``.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Iterable

import numpy as np

from .errors import BudgetExceeded, PreconditionError
from .graph import (
    Graph,
    WeightedGraph,
    cartesian_product,
    complete_graph,
    cycle_graph,
    is_bipartite,
    k2t_replacement,
    mixed_replacement,
    psi_matrix,
    subdivision,
)
from .homs import count_homomorphisms, count_homomorphisms_matrix, cycle_hom_count, cycle_hom_trace
from .report import AuditReport
from .rng import stream, uniform_below

DEFAULT_MAX_TERMS = 2_000_000
DEFAULT_MAX_SUBSET_N = 20
DEFAULT_MAX_HOM = 5_000


@dataclass(frozen=True)
class DensityParams:
    rho: Fraction
    d: Fraction

    def __post_init__(self):
        for name in ("rho", "d"):
            val = Fraction(getattr(self, name))
            object.__setattr__(self, name, val)
            if not 0 < val <= 1:
                raise PreconditionError(f"{name} must lie in (0, 1], got {val}")


@dataclass(frozen=True)
class LocalDensityResult:
    dense: bool
    witness: tuple[int, ...] | None
    witness_density: Fraction | None
    exhaustive: bool
    subsets_checked: int

    def to_dict(self) -> dict:
        return {
            "dense": self.dense,
            "witness": None if self.witness is None else list(self.witness),
            "witness_density": self.witness_density,
            "mode": "exhaustive" if self.exhaustive else "sampled (not a proof)",
            "subsets_checked": self.subsets_checked,
        }


def induced_density(g: Graph, u: Iterable[int]) -> Fraction:
    """``e(G[U]) / C(|U|, 2)``; sets with fewer than two vertices have no pairs."""
    u = sorted(set(u))
    if len(u) < 2:
        raise PreconditionError("density needs at least two vertices")
    inside = set(u)
    e = sum(1 for a, b in g.edges if a in inside and b in inside)
    return Fraction(e, comb(len(u), 2))


def _min_size(g: Graph, params: DensityParams) -> int:
    # smallest |U| with |U| >= rho * n; singletons carry no pairs and are skipped
    need = -(-params.rho.numerator * g.n // params.rho.denominator)
    return max(need, 2)


def is_locally_dense(
    g: Graph,
    params: DensityParams,
    mode: str = "exhaustive",
    samples: int = 10_000,
    seed: int = 0,
    max_n: int = DEFAULT_MAX_SUBSET_N,
) -> LocalDensityResult:
    """Does every ``U`` with ``|U| >= rho n`` induce density at least ``d``?

    The exhaustive mode walks all subsets in Gray-code order, updating the
    induced edge count by one vertex per step.  The ``"sample"`` mode tests
    ``samples`` random sets, so a ``True`` answer there is only evidence.
    """
    lo = _min_size(g, params)
    if mode == "sample":
        return _sampled_density(g, params, lo, samples, seed)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    if g.n > max_n:
        raise BudgetExceeded(f"exhaustive subset scan limited to n <= {max_n}")
    masks = [sum(1 << y for y in g.adj[x]) for x in range(g.n)]
    current = size = edges = checked = 0
    num, den = params.d.numerator, params.d.denominator
    for k in range(1, 1 << g.n):
        v = (k & -k).bit_length() - 1  # Gray code flips the lowest set bit of k
        bit = 1 << v
        touching = (masks[v] & current).bit_count()
        if current & bit:
            current ^= bit
            size -= 1
            edges -= touching
        else:
            current |= bit
            size += 1
            edges += touching
        if size >= lo:
            checked += 1
            if 2 * edges * den < num * size * (size - 1):
                u = tuple(x for x in range(g.n) if current >> x & 1)
                return LocalDensityResult(False, u, Fraction(2 * edges, size * (size - 1)), True, checked)
    return LocalDensityResult(True, None, None, True, checked)


def _sampled_density(g: Graph, params: DensityParams, lo: int, samples: int, seed: int) -> LocalDensityResult:
    if lo > g.n:
        return LocalDensityResult(True, None, None, False, 0)
    sizes = list(range(lo, g.n + 1))
    weights = [comb(g.n, s) for s in sizes]
    total = sum(weights)
    for i in range(samples):
        rng = stream(seed, i)
        r = uniform_below(rng, total)
        s = next(sz for sz, acc in zip(sizes, itertools.accumulate(weights)) if r < acc)
        pool = list(range(g.n))
        for j in range(s):  # partial Fisher-Yates
            k = j + uniform_below(rng, g.n - j)
            pool[j], pool[k] = pool[k], pool[j]
        u = tuple(sorted(pool[:s]))
        dens = induced_density(g, u)
        if dens < params.d:
            return LocalDensityResult(False, u, dens, False, i + 1)
    return LocalDensityResult(True, None, None, False, samples)


@dataclass(frozen=True)
class MinDegreeResult:
    vertices: tuple[int, ...]
    subgraph: Graph
    removed: tuple[int, ...]
    average_degree: Fraction
    min_degree: int

    @property
    def threshold(self) -> Fraction:
        return self.average_degree / 4

    @property
    def guarantees_hold(self) -> bool:
        n = len(self.vertices) + len(self.removed)
        return 64 * len(self.vertices) >= n and self.min_degree >= self.threshold

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "removed": list(self.removed),
            "average_degree": self.average_degree,
            "threshold": self.threshold,
            "min_degree": self.min_degree,
            "guarantees_hold": self.guarantees_hold,
        }


def extract_min_degree_subgraph(g: Graph) -> MinDegreeResult:
    """Peel vertices of degree below ``d/4`` (lowest degree first, then lowest index).

    Needs average degree ``d > 0`` and maximum degree at most ``2d``.
    """
    if g.n == 0 or g.m == 0:
        raise PreconditionError("average degree must be positive")
    d = Fraction(2 * g.m, g.n)
    if max(g.degrees()) > 2 * d:
        raise PreconditionError(f"maximum degree {max(g.degrees())} exceeds twice the average degree {d}")
    alive = set(range(g.n))
    deg = g.degrees()
    removed = []
    while alive:
        v = min(alive, key=lambda x: (deg[x], x))
        if 4 * deg[v] >= d:
            break
        alive.discard(v)
        removed.append(v)
        for y in g.adj[v]:
            if y in alive:
                deg[y] -= 1
    keep = tuple(sorted(alive))
    sub, _ = g.induced(keep)
    return MinDegreeResult(keep, sub, tuple(removed), d, min(sub.degrees(), default=0))


def codegree_matrix(g: Graph) -> list[list[int]]:
    """``A @ A`` as Python ints: off-diagonal codegrees, degrees on the diagonal."""
    a = g.adjacency_matrix(np.int64)
    return (a @ a).tolist()


@dataclass(frozen=True)
class CodegreeReport:
    lhs: int
    rhs: Fraction
    delta: int
    size: int
    precondition_met: bool
    pair_identity: bool

    @property
    def holds(self) -> bool | None:
        """``None`` when ``delta * |U| < 2n`` (nothing is claimed then)."""
        if not self.precondition_met:
            return None
        return self.lhs >= self.rhs

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "delta": self.delta,
            "size": self.size,
            "precondition_met": self.precondition_met,
            "pair_identity": self.pair_identity,
            "holds": self.holds,
        }


def codegree_bound_check(g: Graph, u: Iterable[int]) -> CodegreeReport:
    """Sum of codegrees over unordered pairs of ``U`` against ``delta^2/(4n) * C(|U|, 2)``.

    Also confirms the double count ``sum over pairs = sum_v C(d_U(v), 2)``.
    """
    u = sorted(set(u))
    if any(not 0 <= x < g.n for x in u):
        raise PreconditionError("U must be a set of vertices of G")
    if g.n == 0:
        raise PreconditionError("G has no vertices")
    delta = min(g.degrees())
    nbrs = [g.neighbors(x) for x in range(g.n)]
    lhs = sum(len(nbrs[a] & nbrs[b]) for a, b in itertools.combinations(u, 2))
    inside = set(u)
    by_vertex = sum(comb(len(nbrs[v] & inside), 2) for v in range(g.n))
    rhs = Fraction(delta * delta, 4 * g.n) * comb(len(u), 2)
    return CodegreeReport(lhs, rhs, delta, len(u), delta * len(u) >= 2 * g.n, lhs == by_vertex)


def codegree_weight_matrix(g: Graph) -> WeightedGraph:
    """``W(u, v) = d(u, v) / n`` with ``W(x, x) = deg(x) / n``."""
    c = codegree_matrix(g)
    return WeightedGraph.from_rows([[Fraction(c[x][y], g.n) for y in range(g.n)] for x in range(g.n)])


def _subdivision_terms(h: Graph, g: Graph, max_terms: int) -> list[int]:
    """``H_1(x) = prod over edges ij of d(x_i, x_j)`` for every ``x in V(G)^h``."""
    if g.n ** h.n > max_terms:
        raise BudgetExceeded(f"{g.n}^{h.n} tuples exceed the budget {max_terms}")
    c = codegree_matrix(g)
    return [prod(c[x[i]][x[j]] for i, j in h.edges) for x in itertools.product(range(g.n), repeat=h.n)]


def _inputs(**kw) -> dict:
    return {k: (repr(v) if isinstance(v, Graph) else v) for k, v in kw.items()}


def subdivision_identity_check(h: Graph, g: Graph, max_terms: int = DEFAULT_MAX_TERMS) -> AuditReport:
    """``sum_x H_1(x)`` against ``|Hom(subdivision(H), G)|`` (exact equality)."""
    t0 = time.perf_counter()
    lhs = sum(_subdivision_terms(h, g, max_terms))
    rhs = count_homomorphisms(subdivision(h), g)
    return AuditReport("subdivision_identity", _inputs(H=h, G=g), lhs, rhs, "==",
                       wall_time=time.perf_counter() - t0)


def replacement_convexity_check(h: Graph, g: Graph, t: int, max_terms: int = DEFAULT_MAX_TERMS) -> AuditReport:
    """``sum_x H_1(x)^t = |Hom(K_{2,t}-replacement of H, G)|`` plus the power-mean step.

    The part ``convexity`` is ``sum H_1^t >= n^h (sum H_1 / n^h)^t``, compared as
    ``n^(h(t-1)) sum H_1^t >= (sum H_1)^t``.
    """
    if t < 1:
        raise PreconditionError("t must be at least 1")
    t0 = time.perf_counter()
    terms = _subdivision_terms(h, g, max_terms)
    power_sum = sum(x ** t for x in terms)
    replaced = count_homomorphisms(k2t_replacement(h, t), g)
    scale = g.n ** (h.n * (t - 1))
    convex = AuditReport("convexity", {"t": t}, scale * power_sum, sum(terms) ** t, ">=")
    return AuditReport("replacement_identity", _inputs(H=h, G=g, t=t), power_sum, replaced, "==",
                       parts=[convex], wall_time=time.perf_counter() - t0)


def holder_triangle_check(g: Graph, r: int, s: int, t: int) -> AuditReport:
    """``X^3 >= E[d(x,y) d(y,z) d(z,x)]^(r+s+t)`` for ``X = E[d(x,y)^r d(y,z)^s d(z,x)^t]``.

    Cleared of denominators this is ``S1^3 n^(3(r+s+t)) >= S2^(r+s+t) n^9`` with
    ``S1, S2`` the sums over ``V(G)^3``.  Parts confirm that rotating the
    exponents leaves ``S1`` unchanged (so ``X^3`` is the product of the three
    rotated expectations) and that ``S1`` counts homomorphisms of the triangle
    with its edges replaced by ``K_{2,r}``, ``K_{2,s}``, ``K_{2,t}``.
    """
    if min(r, s, t) < 1:
        raise PreconditionError("exponents must be positive integers")
    t0 = time.perf_counter()
    c = codegree_matrix(g)
    n = g.n
    verts = range(n)

    def moment(a, b, e):
        return sum(c[x][y] ** a * c[y][z] ** b * c[z][x] ** e for x in verts for y in verts for z in verts)

    s1 = moment(r, s, t)
    s2 = moment(1, 1, 1)
    q = r + s + t
    rotations = [moment(s, t, r), moment(t, r, s)]
    # triangle edges in sorted order are (0,1), (0,2), (1,2) and carry r, t, s
    replaced = count_homomorphisms(mixed_replacement(complete_graph(3), [r, t, s]), g)
    parts = [
        AuditReport("rotation_invariance", {}, s1 ** 3, prod(rotations) * s1, "=="),
        AuditReport("mixed_replacement_count", {}, s1, replaced, "=="),
    ]
    return AuditReport("holder_triangle", _inputs(G=g, r=r, s=s, t=t), s1 ** 3 * n ** (3 * q), s2 ** q * n ** 9,
                       ">=", parts=parts, wall_time=time.perf_counter() - t0)


# -- cartesian products with even cycles --------------------------------------

@dataclass
class CartesianAudit:
    k: int
    v: int
    e: int
    p: Fraction
    alpha: Fraction
    beta_k: Fraction
    preconditions: dict
    checks: dict
    values: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        """Every evaluated check passes (``None`` marks a check whose hypotheses are unmet)."""
        return all(v is not False for v in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "v": self.v,
            "e": self.e,
            "p": self.p,
            "alpha": self.alpha,
            "beta_k": self.beta_k,
            "preconditions": dict(self.preconditions),
            "checks": dict(self.checks),
            "values": dict(self.values),
            "holds": self.holds,
        }


def has_sidorenko_certificate(h: Graph) -> bool:
    """Bipartite with a strong tree decomposition, a sufficient condition for Sidorenko's property."""
    from .treedecomp import find_strong_decomposition

    if h.n == 0 or not is_bipartite(h)[0]:
        return False
    try:
        return find_strong_decomposition(h).decomposition is not None
    except BudgetExceeded:
        return False


def cartesian_cycle_audit(h: Graph, k: int, g: Graph, max_hom: int = DEFAULT_MAX_HOM) -> CartesianAudit:
    """Exact audit of the counting chain for ``H x C_2k`` (Cartesian product).

    With ``p = 2|E(G)|/n^2``, ``alpha = |Hom(C_4, G)|/(p n)^4`` and
    ``beta_k = |Hom(C_2k, G)|/(p n)^(2k)`` the checks are

    * ``a``: ``alpha >= 1`` and ``beta_k >= 1``
    * ``b``: ``beta_k <= 2^(2k-4) alpha`` (needs max degree <= 2pn)
    * ``c``: ``|Hom(H x C_2k, G)| = |Hom(H, psi_{C_2k}(G))|``
    * ``d``: ``2|E(psi_{K_2}(G))| = |Hom(C_4, G)|``
    * ``e``: ``2|E(psi_{C_2k}(G))| >= alpha^(2k) p^(6k) n^(4k)``
    * ``f``: ``|Hom(H x C_2k, G)| >= 2^((2k-4)(v-2e)) alpha^(2ek+v-2e) n^(2kv) p^(2kv+2ke)``

    ``f`` is only implied when ``H`` is connected with ``v - 2e <= 0`` and has
    Sidorenko's property, so it is reported as ``None`` otherwise (its raw
    comparison is kept in ``values``).  ``b`` is ``None`` outside the
    max-degree regime.
    """
    if k < 2:
        raise PreconditionError("k must be at least 2")
    if g.m == 0:
        raise PreconditionError("G has no edge")
    n, v, e = g.n, h.n, h.m
    p = Fraction(2 * g.m, n * n)
    hom_c4 = cycle_hom_trace(4, g)
    hom_c2k = cycle_hom_trace(2 * k, g)
    if hom_c2k > max_hom:
        raise BudgetExceeded(f"|Hom(C_{2 * k}, G)| = {hom_c2k} exceeds the cap {max_hom}")
    alpha = Fraction(hom_c4) / (p * n) ** 4
    beta = Fraction(hom_c2k) / (p * n) ** (2 * k)
    degree_ok = max(g.degrees()) <= 2 * p * n
    pre = {
        "H_connected": h.is_connected() and h.n > 0,
        "max_degree_at_most_2pn": degree_ok,
        "H_sidorenko_certified": has_sidorenko_certificate(h),
        "v_minus_2e_nonpositive": v - 2 * e <= 0,
    }
    cycle = cycle_graph(2 * k)
    product_count = count_homomorphisms(cartesian_product(h, cycle), g)
    _, psi_c = psi_matrix(cycle, g)
    psi_count = count_homomorphisms_matrix(h, psi_c)
    _, psi_k2 = psi_matrix(complete_graph(2), g)
    psi_c_edges2 = int(psi_c.sum())
    final_rhs = (Fraction(2) ** ((2 * k - 4) * (v - 2 * e)) * alpha ** (2 * e * k + v - 2 * e)
                 * Fraction(n) ** (2 * k * v) * p ** (2 * k * v + 2 * k * e))
    f_applies = pre["H_connected"] and pre["H_sidorenko_certified"] and pre["v_minus_2e_nonpositive"] and degree_ok
    checks = {
        "a_alpha_beta_at_least_1": alpha >= 1 and beta >= 1,
        "b_beta_at_most_scaled_alpha": (beta <= Fraction(2) ** (2 * k - 4) * alpha) if degree_ok else None,
        "c_product_equals_psi_count": product_count == psi_count,
        "d_psi_k2_edges_equal_c4": int(psi_k2.sum()) == hom_c4,
        "e_psi_cycle_edge_bound": psi_c_edges2 >= alpha ** (2 * k) * p ** (6 * k) * Fraction(n) ** (4 * k),
        "f_final_bound": (product_count >= final_rhs) if f_applies else None,
        "trace_matches_enumeration": hom_c2k == cycle_hom_count(2 * k, g) and hom_c4 == cycle_hom_count(4, g),
    }
    values = {
        "hom_c4": hom_c4,
        "hom_c2k": hom_c2k,
        "hom_product": product_count,
        "hom_into_psi": psi_count,
        "psi_c2k_twice_edges": psi_c_edges2,
        "final_rhs": final_rhs,
        "final_bound_raw": product_count >= final_rhs,
    }
    return CartesianAudit(k, v, e, p, alpha, beta, pre, checks, values)

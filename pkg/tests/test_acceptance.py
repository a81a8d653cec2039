"""Acceptance criteria, one test per criterion.

Each test prints a short summary (run with ``-s`` to see it); the terminal
summary added in ``conftest.py`` lists one PASS/FAIL line per criterion.
"""

import itertools
import time
from collections import Counter, defaultdict
from fractions import Fraction

import pytest
from scipy.stats import chi2

from corpus import all_graphs, all_trees, brute_homs, connected_graphs, subtrees
from sidolab.brw import (
    NoExtension,
    admissible_order,
    brw_distribution,
    brw_prob,
    brw_sample,
    marginal_prob,
    partial_brw_distribution,
    std_embed_distribution,
)
from sidolab.density import (
    cartesian_cycle_audit,
    codegree_bound_check,
    extract_min_degree_subgraph,
    replacement_convexity_check,
    subdivision_identity_check,
)
from sidolab.entropy import TOL, std_entropy_chain, tree_entropy_bound
from sidolab.graph import (
    cartesian_product,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    gnp,
    path_graph,
    psi_graph,
    star_graph,
)
from sidolab.homs import count_homomorphisms, count_tree_homomorphisms, cycle_hom_trace, sidorenko_check
from sidolab.treedecomp import TreeDecomposition, find_strong_decomposition, is_strong_decomposition

# suite shared by criteria 2 to 5 and 8
SUITE_TREES = all_trees(6)
SUITE_GRAPHS = [g for g in connected_graphs(5) if g.m]
SMALL_EDGED = [g for g in all_graphs(4) if g.m]

CHI_SQUARE_SEED = 20240601


def elapsed_since(t0):
    return time.perf_counter() - t0


def _decomposition_corpus():
    """Validated strong decompositions: hand-built ones plus search outputs."""
    corpus = [
        ("path:4", path_graph(4), TreeDecomposition((tuple(range(4)),))),
        ("star:3", star_graph(3), TreeDecomposition((tuple(range(4)),))),
        ("cycle:4 split", cycle_graph(4), TreeDecomposition(((0, 1, 2), (0, 2, 3)), ((0, 1),))),
    ]
    searched = [
        ("path:5", path_graph(5)),
        ("cycle:4", cycle_graph(4)),
        ("cycle:6", cycle_graph(6)),
        ("biclique:2,3", complete_bipartite(2, 3)),
        ("biclique:2,4", complete_bipartite(2, 4)),
        ("grid:2,3", cartesian_product(path_graph(2), path_graph(3))),
        ("cycle:8", cycle_graph(8)),
        ("biclique:3,3", complete_bipartite(3, 3)),
        ("grid:3,3", cartesian_product(path_graph(3), path_graph(3))),
    ]
    for name, h in searched:
        d = find_strong_decomposition(h).decomposition
        assert d is not None, name
        corpus.append((name, h, d))
    for name, h, d in corpus:
        assert is_strong_decomposition(h, d), name
    return corpus


@pytest.fixture(scope="module")
def decomposition_corpus():
    return _decomposition_corpus()


def _dfs_order(d, root, reverse):
    order, stack = [], [root]
    seen = {root}
    while stack:
        b = stack.pop()
        order.append(b)
        nxt = [c for c in sorted(d.neighbors(b), reverse=not reverse) if c not in seen]
        seen.update(nxt)
        stack.extend(nxt)
    return order


def test_criterion_01_exact_count_oracles():
    t0 = time.perf_counter()
    trees = all_trees(8)
    graphs = connected_graphs(6)
    pairs = 0
    for g in graphs:
        for t in trees:
            assert count_tree_homomorphisms(t, g) == count_homomorphisms(t, g), (t, g)
            pairs += 1
        for k in range(3, 9):
            assert cycle_hom_trace(k, g) == count_homomorphisms(cycle_graph(k), g), (k, g)
    secs = elapsed_since(t0)
    print(f"\n[1] {pairs} tree pairs and {6 * len(graphs)} cycle pairs agree ({secs:.1f} s)")
    assert secs < 300


def test_criterion_02_brw_normalization():
    t0 = time.perf_counter()
    for t in SUITE_TREES:
        for g in SUITE_GRAPHS:
            total = sum((brw_prob(t, g, h) for h in brute_homs(t, g)), Fraction(0))
            assert total == 1, (t, g, total)
    secs = elapsed_since(t0)
    print(f"\n[2] {len(SUITE_TREES) * len(SUITE_GRAPHS)} pairs sum to exactly 1 ({secs:.1f} s)")
    assert secs < 120


def test_criterion_03_subtree_projection():
    t0 = time.perf_counter()
    checked = 0
    for t in SUITE_TREES:
        for g in SUITE_GRAPHS:
            full = brw_distribution(t, g)
            for s in subtrees(t):
                s = tuple(sorted(s))
                sub, labels = t.induced(s)
                law = brw_distribution(sub, g).as_dict()
                # independent route: push the full law forward onto S
                assert full.pushforward(labels) == law
                for h, p in law.items():
                    assert marginal_prob(t, g, labels, dict(zip(labels, h))) == p == brw_prob(sub, g, h)
                    checked += 1
    secs = elapsed_since(t0)
    print(f"\n[3] {checked} subtree marginals match ({secs:.1f} s)")
    assert secs < 300


def test_criterion_04_edge_marginal_uniform():
    t0 = time.perf_counter()
    laws = 0
    for t in SUITE_TREES:
        for g in SUITE_GRAPHS:
            full = brw_distribution(t, g)
            ordered = {(a, b) for a, b in g.edges} | {(b, a) for a, b in g.edges}
            for u, v in t.edges:
                law = full.pushforward((u, v))
                assert set(law) == ordered
                assert set(law.values()) == {Fraction(1, 2 * g.m)}
                laws += 1
    secs = elapsed_since(t0)
    print(f"\n[4] {laws} edge laws are uniform on ordered edges ({secs:.1f} s)")
    assert secs < 120


def test_criterion_05_partial_brw_is_conditioned_law():
    t0 = time.perf_counter()
    compared = empty = 0
    for t in SUITE_TREES:
        for g in SUITE_GRAPHS:
            full = brw_distribution(t, g)
            for r in range(3):
                for anchor in itertools.combinations(range(t.n), r):
                    # oracle: group the full law by its values on the anchored vertices
                    groups = defaultdict(dict)
                    for h, p in zip(full.support, full.prob):
                        groups[tuple(h[x] for x in anchor)][h] = p
                    for img in itertools.product(range(g.n), repeat=r):
                        fixed = dict(zip(anchor, img))
                        cond = groups.get(img)
                        if cond is None:
                            with pytest.raises(NoExtension):
                                partial_brw_distribution(t, g, fixed)
                            empty += 1
                            continue
                        z = sum(cond.values())
                        expected = {h: p / z for h, p in cond.items()}
                        assert partial_brw_distribution(t, g, fixed).as_dict() == expected, (t, g, fixed)
                        compared += 1
    secs = elapsed_since(t0)
    print(f"\n[5] {compared} partial laws equal the conditioned law, {empty} anchors have no extension ({secs:.1f} s)")
    assert secs < 600


def test_criterion_06_embedding_law_is_order_invariant(decomposition_corpus):
    t0 = time.perf_counter()
    assert len(decomposition_corpus) >= 10
    variants = 0
    for name, h, d in decomposition_corpus:
        for g in SMALL_EDGED:
            base = std_embed_distribution(h, d, g, root=0)
            for root in range(len(d.bags)):
                orders = {
                    tuple(admissible_order(d, root)),
                    tuple(admissible_order(d, root, reverse_children=True)),
                    tuple(_dfs_order(d, root, False)),
                    tuple(_dfs_order(d, root, True)),
                }
                for order in orders:
                    other = std_embed_distribution(h, d, g, root=root, order=order)
                    assert other.support == base.support and other.prob == base.prob, (name, g, order)
                    variants += 1
    secs = elapsed_since(t0)
    print(f"\n[6] {len(decomposition_corpus)} decompositions, {variants} (root, order) variants agree ({secs:.1f} s)")
    assert secs < 900


def test_criterion_07_sidorenko_via_entropy_chain(decomposition_corpus):
    t0 = time.perf_counter()
    worst = float("inf")
    runs = 0
    for name, h, d in decomposition_corpus:
        for g in SMALL_EDGED:
            assert sidorenko_check(h, g).holds, (name, g)
            rep = std_entropy_chain(h, d, g)
            assert rep.slack >= -TOL, (name, g, rep.slack)
            assert all(rep.checks.values()), (name, g, rep.checks)
            worst = min(worst, rep.slack)
            runs += 1
    print(f"\n[7] {runs} chains hold, smallest slack {worst:.3e} ({elapsed_since(t0):.1f} s)")


def test_criterion_08_tree_entropy_bound():
    t0 = time.perf_counter()
    worked = [
        (complete_graph(2), complete_graph(3)),
        (path_graph(3), complete_graph(3)),
        (complete_graph(2), star_graph(3)),
    ]
    for t, g in worked:
        rep = tree_entropy_bound(t, g)
        assert abs(rep.slack) <= TOL and rep.holds, (t, g, rep.slack)
    failures = []
    for t in SUITE_TREES:
        for g in SUITE_GRAPHS:
            rep = tree_entropy_bound(t, g)
            if not rep.slack >= -TOL:
                failures.append((t.n, t.m, repr(g), rep.slack))
    nontrivial = [f for f in failures if f[1] > 0]
    print(f"\n[8] worked examples match; {len(failures)} suite pairs below the bound, "
          f"{len(nontrivial)} of them with a tree that has an edge ({elapsed_since(t0):.1f} s)")
    for f in failures[:5]:
        print(f"    |V(T)|={f[0]} |E(T)|={f[1]} G={f[2]} slack={f[3]:.4f}")
    assert not failures


def test_criterion_09_subdivision_and_replacement():
    t0 = time.perf_counter()
    base = subdivision_identity_check(complete_graph(2), complete_graph(3))
    assert base.lhs == 12 == count_homomorphisms(path_graph(3), complete_graph(3))
    squared = replacement_convexity_check(complete_graph(2), complete_graph(3), 2)
    assert squared.lhs == 18 == count_homomorphisms(cycle_graph(4), complete_graph(3))
    hs = all_graphs(4)
    gs = all_graphs(4)
    audits = 0
    for h in hs:
        for g in gs:
            rep = subdivision_identity_check(h, g)
            assert rep.lhs == rep.rhs, (h, g)
            for t in (1, 2, 3):
                rep = replacement_convexity_check(h, g, t)
                assert rep.lhs == rep.rhs and rep.parts[0].verdict, (h, g, t)
                audits += 1
    secs = elapsed_since(t0)
    print(f"\n[9] {len(hs) * len(gs)} subdivision identities and {audits} replacement audits exact ({secs:.1f} s)")
    assert secs < 600


def test_criterion_10_cartesian_chain():
    t0 = time.perf_counter()
    small = [complete_graph(2), path_graph(3), cycle_graph(4)]
    for h in small:
        for k in small:
            for g in all_graphs(4):
                assert count_homomorphisms(cartesian_product(h, k), g) == count_homomorphisms(h, psi_graph(k, g))
    k3 = cartesian_cycle_audit(complete_graph(2), 2, complete_graph(3))
    assert (k3.p, k3.alpha, k3.beta_k) == (Fraction(2, 3), Fraction(9, 8), Fraction(9, 8))
    patterns = connected_graphs(4)
    evaluated = final_applied = 0
    for g in all_graphs(5):
        if g.m == 0 or max(g.degrees()) > 2 * Fraction(2 * g.m, g.n):
            continue
        for k in (2, 3):
            for h in patterns:
                audit = cartesian_cycle_audit(h, k, g)
                assert audit.holds, (h, k, g, audit.checks)
                evaluated += 1
                final_applied += audit.checks["f_final_bound"] is not None
    print(f"\n[10] psi identities exact; {evaluated} audits hold, (f) applied in {final_applied} "
          f"({elapsed_since(t0):.1f} s)")


def test_criterion_11_min_degree_and_codegree():
    t0 = time.perf_counter()
    kept = skipped = seed = 0
    while kept < 100:
        g = gnp(16, Fraction(1, 2), seed)
        seed += 1
        if g.m == 0 or max(g.degrees()) > 2 * Fraction(2 * g.m, g.n):
            skipped += 1
            continue
        res = extract_min_degree_subgraph(g)
        assert 64 * len(res.vertices) >= g.n and 4 * res.min_degree >= res.average_degree, seed - 1
        kept += 1
    instances = 0
    for g in all_graphs(6):
        delta = min(g.degrees())
        for size in range(g.n + 1):
            if delta * size < 2 * g.n:
                continue
            for u in itertools.combinations(range(g.n), size):
                rep = codegree_bound_check(g, u)
                assert rep.holds and rep.pair_identity, (g, u)
                instances += 1
    c6 = codegree_bound_check(cycle_graph(6), range(6))
    print(f"\n[11] 100 G(16,1/2) graphs (seeds 0..{seed - 1}, {skipped} filtered out); {instances} codegree "
          f"instances hold; C_6 gives lhs {c6.lhs} vs rhs {c6.rhs} ({elapsed_since(t0):.1f} s)")
    assert c6.rhs == Fraction(5, 2)
    assert c6.lhs == 12


def test_criterion_12_sampler_chi_square():
    t0 = time.perf_counter()
    t, g = path_graph(3), complete_graph(3)
    law = brw_distribution(t, g).as_dict()
    draws = 100_000
    counts = Counter(brw_sample(t, g, CHI_SQUARE_SEED, i) for i in range(draws))
    assert set(counts) <= set(law)
    stat = sum((counts[h] - draws * p) ** 2 / (draws * p) for h, p in ((h, float(p)) for h, p in law.items()))
    crit = chi2.ppf(0.999, len(law) - 1)
    secs = elapsed_since(t0)
    print(f"\n[12] seed {CHI_SQUARE_SEED}: chi-square {stat:.2f} < {crit:.2f} on {len(law) - 1} df ({secs:.1f} s)")
    assert stat < crit
    assert secs < 60

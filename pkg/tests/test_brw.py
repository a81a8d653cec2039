from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import all_graphs, all_trees, brute_homs
from sidolab.brw import (
    ExactDistribution,
    NoExtension,
    brw_distribution,
    brw_prob,
    brw_prob_by_steps,
    brw_sample,
    brw_sample_batch,
    marginal_prob,
    partial_brw_distribution,
    partial_brw_sample,
    std_embed_distribution,
    std_embed_sample,
    subtree_prob,
)
from sidolab.errors import PreconditionError
from sidolab.graph import Graph, complete_bipartite, complete_graph, cycle_graph, empty_graph, path_graph, star_graph
from sidolab.homs import is_homomorphism
from sidolab.treedecomp import TreeDecomposition, find_strong_decomposition

K2, K3, P3 = complete_graph(2), complete_graph(3), path_graph(3)
C4_SPLIT = TreeDecomposition(((0, 1, 2), (0, 2, 3)), ((0, 1),))
EDGED = [g for g in all_graphs(4) if g.m]


def test_exact_distribution_invariants():
    with pytest.raises(ValueError):
        ExactDistribution(((0,), (1,)), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        ExactDistribution(((0,), (1,)), (Fraction(1), Fraction(0)))
    d = ExactDistribution.from_weights([((1,), Fraction(1, 4)), ((0,), Fraction(3, 4))])
    assert d.support == ((0,), (1,))


def test_prob_examples():
    for h in brute_homs(K2, K3):
        assert brw_prob(K2, K3, h) == Fraction(1, 6)
    for h in brute_homs(P3, K3):
        assert brw_prob(P3, K3, h) == Fraction(1, 12)
    k12 = star_graph(2)
    homs = brute_homs(k12, K3)
    assert len(homs) == 12 and sum(brw_prob(k12, K3, h) for h in homs) == 1
    with pytest.raises(PreconditionError):
        brw_prob(P3, K3, (0, 0, 1))
    with pytest.raises(PreconditionError):
        brw_prob(cycle_graph(3), K3, (0, 1, 2))
    with pytest.raises(PreconditionError):
        brw_prob(K2, empty_graph(3), (0, 1))


def test_distribution_examples():
    d = brw_distribution(K2, K3)
    assert len(d) == 6 and set(d.prob) == {Fraction(1, 6)}
    d = brw_distribution(K2, P3)
    assert len(d) == 4 and set(d.prob) == {Fraction(1, 4)}
    d = brw_distribution(Graph(1), star_graph(3)).as_dict()
    assert d == {(0,): Fraction(1, 2), (1,): Fraction(1, 6), (2,): Fraction(1, 6), (3,): Fraction(1, 6)}


def test_isolated_vertices_carry_no_mass():
    g = Graph(3, [(0, 1)])
    assert brw_distribution(Graph(1), g).as_dict() == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}


@given(st.sampled_from(all_trees(5)), st.sampled_from(EDGED), st.data())
@settings(max_examples=80, deadline=None)
def test_closed_form_matches_step_product_from_any_root(t, g, data):
    homs = brute_homs(t, g)
    h = data.draw(st.sampled_from(homs))
    root = data.draw(st.integers(0, t.n - 1))
    if g.degree(h[root]) == 0:
        return
    assert brw_prob(t, g, h) == brw_prob_by_steps(t, g, h, root)


def test_sampler_examples():
    edges = {(u, v) for u, v in K3.edges} | {(v, u) for u, v in K3.edges}
    for seed in range(20):
        assert brw_sample(K2, K3, seed) in edges
    assert brw_sample(P3, K3, 99, 5) == brw_sample(P3, K3, 99, 5)
    assert brw_sample_batch(P3, K3, 4, 10)[7] == brw_sample(P3, K3, 4, 7)
    with pytest.raises(PreconditionError):
        brw_sample(K2, empty_graph(2), 0)
    with pytest.raises(PreconditionError):
        brw_sample(cycle_graph(4), K3, 0)


def test_single_vertex_sampler_is_stationary():
    counts = Counter(brw_sample(Graph(1), K3, 11, i)[0] for i in range(6000))
    for v in range(3):
        assert abs(counts[v] / 6000 - 1 / 3) < 0.03


def test_marginal_examples():
    for a, b in [(0, 1), (1, 2), (2, 0)]:
        assert marginal_prob(P3, K3, (0, 1), {0: a, 1: b}) == Fraction(1, 6)
    h = (0, 1, 0)
    assert marginal_prob(P3, K3, (0, 1, 2), dict(enumerate(h))) == brw_prob(P3, K3, h)
    assert marginal_prob(star_graph(2), K3, (0,), {0: 2}) == Fraction(1, 3)
    with pytest.raises(PreconditionError):
        marginal_prob(P3, K3, (0, 2), {0: 0, 2: 1})


def test_partial_examples():
    d = partial_brw_distribution(P3, K3, {0: 0, 2: 1}).as_dict()
    assert d == {(0, 2, 1): 1}
    d = partial_brw_distribution(P3, K3, {0: 0, 2: 0}).as_dict()
    assert d == {(0, 1, 0): Fraction(1, 2), (0, 2, 0): Fraction(1, 2)}
    assert partial_brw_distribution(P3, K3, {}) == brw_distribution(P3, K3)
    with pytest.raises(NoExtension):
        partial_brw_distribution(P3, K2, {0: 0, 2: 1})
    with pytest.raises(PreconditionError):
        partial_brw_distribution(P3, K3, {0: 7})


def test_partial_sampler_respects_anchor_and_law():
    law = partial_brw_distribution(P3, K3, {0: 0, 2: 0}).as_dict()
    counts = Counter(partial_brw_sample(P3, K3, {0: 0, 2: 0}, 3, i) for i in range(4000))
    assert set(counts) == set(law)
    assert abs(counts[(0, 1, 0)] / 4000 - 0.5) < 0.04


def test_subtree_prob_matches_marginal():
    t = path_graph(4)
    g = cycle_graph(5)
    for a in range(5):
        for b in g.adj[a]:
            assert marginal_prob(t, g, (1, 2), {1: a, 2: b}) == subtree_prob(t, g, (1, 2), {1: a, 2: b})


def test_embedding_examples():
    t = path_graph(4)
    one = TreeDecomposition((tuple(range(4)),))
    assert std_embed_distribution(t, one, K3) == brw_distribution(t, K3)
    d = std_embed_distribution(cycle_graph(4), C4_SPLIT, K3)
    assert set(d.pushforward((0, 1, 2)).values()) == {Fraction(1, 12)}
    assert std_embed_distribution(cycle_graph(4), C4_SPLIT, K3, root=1) == d
    tr = std_embed_sample(cycle_graph(4), C4_SPLIT, K3, seed=5)
    assert is_homomorphism(cycle_graph(4), K3, tr.homomorphism)
    assert tr.bag_order == (0, 1) and sorted(tr.vertex_order) == [0, 1, 2, 3]
    for seed in range(10):
        h = std_embed_sample(cycle_graph(4), C4_SPLIT, K2, seed=seed).homomorphism
        assert h[0] == h[2] != h[1] == h[3]


def test_embedding_rejects_invalid_inputs():
    with pytest.raises(PreconditionError):
        std_embed_distribution(cycle_graph(4), TreeDecomposition(((0, 1, 2, 3),)), K3)
    with pytest.raises(PreconditionError):
        std_embed_sample(cycle_graph(4), C4_SPLIT, empty_graph(3), seed=0)
    with pytest.raises(PreconditionError):
        std_embed_distribution(cycle_graph(4), C4_SPLIT, K3, root=0, order=[1, 0])


def test_embedding_samples_follow_exact_law():
    h = complete_bipartite(2, 3)
    d = find_strong_decomposition(h).decomposition
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    law = std_embed_distribution(h, d, g).as_dict()
    n = 20000
    counts = Counter(std_embed_sample(h, d, g, seed=17, index=i).homomorphism for i in range(n))
    assert set(counts) <= set(law)
    from scipy.stats import chi2

    stat = sum((counts[x] - n * float(p)) ** 2 / (n * float(p)) for x, p in law.items())
    assert stat < chi2.ppf(0.999, len(law) - 1)


@given(st.sampled_from(all_trees(5)), st.sampled_from(EDGED))
@settings(max_examples=60, deadline=None)
def test_samples_are_homomorphisms(t, g):
    for i in range(5):
        assert is_homomorphism(t, g, brw_sample(t, g, 1, i))

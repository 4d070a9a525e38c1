import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphtest.errors import DomainError
from graphtest.graph import Graph
from graphtest.oracle import dense_spectrum, naive_max_degree, naive_triangles
from graphtest.specs import Statistic
from graphtest.statistics import (
    edge_density,
    max_degree,
    sigma_hat,
    sigma_hat_from,
    top_k_singular,
    triangle_count,
    triangle_density,
)

from conftest import random_graph

LAMBDA2 = Statistic("lambda", 2)
TRI = Statistic("triangle")


def cycle(n):
    return Graph.from_edges(n, list(range(n)), [(i + 1) % n for i in range(n)])


def star(n):
    return Graph.from_edges(n, [0] * (n - 1), list(range(1, n)))


def test_triangle_density_examples():
    assert triangle_density(Graph.complete(9)) == 1.0
    assert triangle_density(cycle(4)) == 0.0
    assert triangle_count(Graph.complete(5)) == 10
    with pytest.raises(DomainError):
        triangle_density(Graph.complete(2))


def test_triangle_density_matches_naive_on_500_graphs(rng):
    for _ in range(500):
        n = int(rng.integers(3, 101))
        G = random_graph(rng, n, float(rng.random()))
        assert triangle_count(G) == naive_triangles(G)


def test_triangle_count_spans_several_chunks():
    # more edges than one kernel chunk (2^15)
    G = Graph.complete(300)
    assert triangle_count(G) == math.comb(300, 3)


def test_top_k_singular_complete_and_empty():
    n = 12
    np.testing.assert_allclose(top_k_singular(Graph.complete(n), 2), [(n - 1) / n, 1 / n], atol=1e-12)
    np.testing.assert_array_equal(top_k_singular(Graph.empty(n), 3), np.zeros(3))
    with pytest.raises(DomainError):
        top_k_singular(Graph.complete(3), 4)


def test_top_k_singular_matches_dense_on_random_er(rng):
    for _ in range(200):
        G = random_graph(rng, 48, 0.3)
        ref = np.abs(dense_spectrum(G))[:4] / 48
        np.testing.assert_allclose(top_k_singular(G, 4), ref, rtol=0, atol=1e-8)


def test_top_k_singular_prefix_property(rng):
    for _ in range(30):
        G = random_graph(rng, int(rng.integers(5, 60)), float(rng.random()))
        a = top_k_singular(G, 3)
        b = top_k_singular(G, 4)
        np.testing.assert_allclose(a, b[:3], atol=1e-8)


def test_edge_density_examples():
    assert edge_density(Graph.complete(6)) == 1.0
    assert edge_density(Graph.empty(6)) == 0.0
    path = Graph.from_edges(4, [0, 1, 2], [1, 2, 3])
    assert edge_density(path) == 0.5
    with pytest.raises(DomainError):
        edge_density(Graph.empty(1))


def test_max_degree_examples(rng):
    assert max_degree(star(5)) == 4
    assert max_degree(Graph.empty(5)) == 0
    for _ in range(100):
        G = random_graph(rng, int(rng.integers(1, 60)), float(rng.random()))
        assert max_degree(G) == naive_max_degree(G)


@given(seed=st.integers(0, 2**32), n=st.integers(3, 40), p=st.floats(0, 1))
def test_statistics_invariant_under_relabelling(seed, n, p):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, n, p)
    H = G.relabel(rng.permutation(n))
    assert triangle_count(H) == triangle_count(G)
    np.testing.assert_allclose(top_k_singular(H, 2), top_k_singular(G, 2), atol=1e-8)


@given(seed=st.integers(0, 2**32), n=st.integers(3, 40), p=st.floats(0, 1))
def test_triangle_density_range(seed, n, p):
    G = random_graph(np.random.default_rng(seed), n, p)
    f = triangle_density(G)
    assert 0.0 <= f <= 1.0
    if max_degree(G) <= 1:
        assert f == 0.0


def test_sigma_hat_examples():
    assert sigma_hat(Graph.empty(10), TRI, "ier_semisparse") == 0.0
    expected = 2 * math.sqrt(math.log(10) / 120)
    assert sigma_hat(Graph.complete(10), TRI, "ier_semisparse") == pytest.approx(expected, rel=1e-15)
    # combined rule is the larger of the two triangle forms
    G = Graph.complete(10)
    assert sigma_hat(G, TRI, "combined_max") == max(
        sigma_hat(G, TRI, "ier_semisparse"), sigma_hat(G, TRI, "geom")
    )
    assert sigma_hat(star(5), LAMBDA2, "ier_spectral") == pytest.approx(2.1 / 5 * math.sqrt(2 * 4))


@pytest.mark.parametrize(
    "statistic, rule",
    [(TRI, "ier_spectral"), (LAMBDA2, "ier_semisparse"), (LAMBDA2, "combined_max"), (TRI, "generic")],
)
def test_sigma_hat_incompatible_rule(statistic, rule):
    with pytest.raises(DomainError):
        sigma_hat(Graph.complete(5), statistic, rule)


@pytest.mark.parametrize("rule", ["ier_semisparse", "geom", "combined_max"])
def test_sigma_hat_monotone_in_triangle_density(rule):
    n = 50
    values = [sigma_hat_from(n, TRI, rule, f_delta=f, p_hat=0.2) for f in (0.001, 0.01, 0.1, 0.5)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_sigma_hat_monotone_in_max_degree():
    values = [sigma_hat_from(100, LAMBDA2, "ier_spectral", d_hat=d) for d in (1, 5, 20, 99)]
    assert all(a < b for a, b in zip(values, values[1:]))


# The sigma_hat / sigma concentration check for ER(2000, 0.05) is acceptance criterion 4
# (tests/test_acceptance.py); it is not duplicated here.

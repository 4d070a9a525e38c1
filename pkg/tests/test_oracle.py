import math

import numpy as np
import pytest

from graphtest.errors import CapacityError, DomainError
from graphtest.graph import Graph
from graphtest.minimax import HardInstance, tv_upper_bound
from graphtest.models import in_class, mu_triangle_ier, mu_triangle_planted
from graphtest.oracle import (
    ExactPmf,
    chi2_from_pmfs,
    dense_spectrum,
    edge_pairs,
    enumerate_distribution,
    exact_mean_variance_fdelta,
    jacobi_eigenvalues,
    naive_triangles,
)
from graphtest.specs import ER, IER, Geom, PlantedFixed, PlantedMixture, Statistic, planted_matrix
from graphtest.statistics import top_k_singular

from conftest import random_graph


def test_er3_uniform_pmf():
    pmf = enumerate_distribution(ER(3, 0.5))
    np.testing.assert_array_equal(pmf.probs, np.full(8, 1 / 8))


def test_mixture_with_zero_gamma_equals_er():
    a = enumerate_distribution(PlantedMixture(3, 0.35, 0.0))
    b = enumerate_distribution(ER(6, 0.35))
    np.testing.assert_allclose(a.probs, b.probs, rtol=0, atol=1e-15)


def test_mixture_edge_marginals():
    p, g = 0.4, 0.2
    pmf = enumerate_distribution(PlantedMixture(2, p, g))
    # balanced labellings of 4 vertices: 2 same-label pairs, 4 cross pairs out of 6
    expected = (2 * (p + g) + 4 * (p - g)) / math.comb(4, 2)
    masks = np.arange(pmf.probs.size)
    for e, (i, j) in enumerate(edge_pairs(4)):
        marginal = math.fsum(pmf.probs[(masks >> e) & 1 == 1])
        direct = np.mean([
            p + g * a * b
            for lab in ([1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1], [-1, -1, 1, 1], [-1, 1, -1, 1], [-1, 1, 1, -1])
            for a, b in [(lab[i], lab[j])]
        ])
        assert marginal == pytest.approx(expected, abs=1e-15)
        assert marginal == pytest.approx(direct, abs=1e-15)


def test_pmf_graph_and_mask_round_trip():
    pmf = enumerate_distribution(ER(4, 0.3))
    for mask in (0, 5, 63):
        assert pmf.mask_of(pmf.graph(mask)) == mask


@pytest.mark.parametrize(
    "spec",
    [ER(5, 0.2), PlantedMixture(3, 0.3, 0.2), PlantedFixed((1, -1, 1, -1), 0.5, 0.5), ER(1, 0.5)],
)
def test_pmfs_sum_to_one(spec):
    assert abs(math.fsum(enumerate_distribution(spec).probs) - 1.0) <= 1e-12


def test_pmf_rejects_unnormalised():
    with pytest.raises(DomainError):
        ExactPmf(2, np.array([0.5, 0.4]))


def test_caps_and_domains():
    with pytest.raises(CapacityError):
        enumerate_distribution(ER(7, 0.5))
    with pytest.raises(DomainError):
        enumerate_distribution(Geom(4, 2, 0.5))
    with pytest.raises(CapacityError):
        naive_triangles(Graph.empty(101))
    with pytest.raises(CapacityError):
        dense_spectrum(np.zeros((65, 65)))


def test_tv_examples():
    from graphtest.oracle import tv_exact

    a = enumerate_distribution(ER(4, 0.3))
    assert tv_exact(a, a) == 0.0
    e0, e1 = np.zeros(8), np.zeros(8)
    e0[0], e1[7] = 1.0, 1.0
    assert tv_exact(ExactPmf(3, e0), ExactPmf(3, e1)) == 1.0
    b = enumerate_distribution(PlantedMixture(2, 0.3, 0.1))
    assert tv_exact(a, b) <= tv_upper_bound(HardInstance(2, 0.3, 0.1)).exact
    with pytest.raises(DomainError):
        tv_exact(a, enumerate_distribution(ER(3, 0.3)))


def test_chi2_infinite_when_support_differs():
    e0, e1 = np.zeros(8), np.zeros(8)
    e0[0], e1[7] = 1.0, 1.0
    assert chi2_from_pmfs(ExactPmf(3, e0), ExactPmf(3, e1)) == math.inf


@pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 0.9])
def test_exact_moments_single_triple(p):
    mean, var = exact_mean_variance_fdelta(ER(3, p))
    assert mean == pytest.approx(p**3, abs=1e-15)
    assert var == pytest.approx(p**3 * (1 - p**3), abs=1e-15)


def test_exact_moments_edgeless():
    assert exact_mean_variance_fdelta(IER(np.zeros((5, 5)))) == (0.0, 0.0)


def test_semisparse_variance_envelope(rng):
    tri = Statistic("triangle")
    checked = 0
    for _ in range(40):
        B = np.triu(rng.random((6, 6)) * 0.6, 1)
        spec = IER(B + B.T)
        if not in_class(spec, tri, "ier_semisparse")[0]:
            continue
        mean, var = exact_mean_variance_fdelta(spec)
        c = math.comb(6, 3)
        assert var * c**2 <= 4 * mean * c + 1e-12
        checked += 1
    assert checked >= 5


def test_enumerated_means_match_closed_forms():
    for p in np.linspace(0.1, 0.9, 5):
        for g in np.linspace(0, min(p, 1 - p), 5):
            for half in (2, 3):
                mean, _ = exact_mean_variance_fdelta(PlantedMixture(half, p, g))
                assert abs(mean - mu_triangle_planted(half, p, g)) <= 1e-12
    rng = np.random.default_rng(1)
    for n in (3, 4, 5, 6):
        B = np.triu(rng.random((n, n)), 1)
        M = B + B.T
        assert abs(exact_mean_variance_fdelta(IER(M))[0] - mu_triangle_ier(M)) <= 1e-12


def test_naive_examples():
    assert naive_triangles(Graph.complete(5)) == 10
    np.testing.assert_allclose(dense_spectrum(np.ones((5, 5)) - np.eye(5)), [4, -1, -1, -1, -1], atol=1e-12)


def test_planted_fixed_spectrum():
    half, p, g = 4, 0.4, 0.1
    vals = dense_spectrum(planted_matrix([1] * half + [-1] * half, p, g))
    size = 2 * half
    expected = np.array([(size - 1) * p - g, (size - 1) * g - p] + [-(p + g)] * (size - 2))
    np.testing.assert_allclose(np.sort(vals), np.sort(expected), atol=1e-12)


def test_jacobi_matches_eigvalsh(rng):
    for _ in range(30):
        n = int(rng.integers(1, 40))
        B = rng.standard_normal((n, n))
        A = B + B.T
        np.testing.assert_allclose(np.sort(jacobi_eigenvalues(A)), np.linalg.eigvalsh(A), atol=1e-10)
    with pytest.raises(DomainError):
        jacobi_eigenvalues(np.array([[0, 1], [2, 0]]))


def test_dense_spectrum_agrees_with_top_k(rng):
    for _ in range(40):
        n = int(rng.integers(1, 65))
        G = random_graph(rng, n, float(rng.random()))
        ref = np.abs(dense_spectrum(G)) / n
        for k in sorted({1, n, int(rng.integers(1, n + 1))}):
            np.testing.assert_allclose(top_k_singular(G, k), ref[:k], atol=1e-8)

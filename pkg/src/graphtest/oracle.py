"""Brute-force references: exact pmfs of tiny models, naive triangle counts, Jacobi spectra.

Nothing here shares code with the production statistics; these routines
exist to check them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CapacityError, ConvergenceError, DomainError
from .graph import Graph
from .specs import ER, IER, ModelSpec, PlantedFixed, PlantedMixture, planted_matrix, probability_matrix

MAX_PMF_SIZE = 6
MAX_SPECTRUM_SIZE = 64
MAX_NAIVE_TRIANGLES = 100


def edge_pairs(n: int) -> list[tuple[int, int]]:
    """Edge ``e`` of a bitmask is the ``e``-th pair ``(i, j), i < j`` in lexicographic order."""
    return list(combinations(range(n), 2))


def _mask_bits(n_edges: int) -> np.ndarray:
    masks = np.arange(1 << n_edges, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n_edges)) & 1).astype(bool)


@dataclass(frozen=True, eq=False)
class ExactPmf:
    """Probability of every graph on ``size`` vertices, indexed by edge bitmask."""

    size: int
    probs: np.ndarray

    def __post_init__(self):
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"pmf sums to {total!r}, not 1")

    def graph(self, mask: int) -> Graph:
        pairs = edge_pairs(self.size)
        chosen = [pairs[e] for e in range(len(pairs)) if (mask >> e) & 1]
        return Graph.from_edges(self.size, [a for a, _ in chosen], [b for _, b in chosen])

    def mask_of(self, graph: Graph) -> int:
        return sum(1 << e for e, (i, j) in enumerate(edge_pairs(self.size)) if graph.has_edge(i, j))

    def expectation(self, values: np.ndarray) -> float:
        return math.fsum(self.probs * values)


def _independent_pmf(P: np.ndarray, bits: np.ndarray) -> np.ndarray:
    pe = np.array([P[i, j] for i, j in edge_pairs(P.shape[0])])
    return np.prod(np.where(bits, pe, 1.0 - pe), axis=1)


def enumerate_distribution(spec: ModelSpec, max_size: int = MAX_PMF_SIZE) -> ExactPmf:
    """Exact pmf over all ``2^C(n,2)`` graphs for ER, IER and planted models.

    The default cap ``n <= 6`` keeps every pmf below 32768 entries; ``max_size=7``
    (about 2 million graphs) is accepted for one-off checks.
    """
    if not isinstance(spec, (ER, IER, PlantedFixed, PlantedMixture)):
        raise DomainError(f"no exact pmf for {type(spec).__name__}")
    n = spec.size
    if n > min(max_size, 7):
        raise CapacityError(f"exact pmf limited to n <= {min(max_size, 7)}, got {n}")
    bits = _mask_bits(n * (n - 1) // 2)
    if isinstance(spec, PlantedMixture):
        acc = np.zeros(bits.shape[0])
        count = 0
        for plus in combinations(range(n), n // 2):
            labels = -np.ones(n)
            labels[list(plus)] = 1
            acc += _independent_pmf(planted_matrix(labels, spec.p, spec.gamma), bits)
            count += 1
        probs = acc / count
    else:
        probs = _independent_pmf(probability_matrix(spec), bits)
    return ExactPmf(n, probs)


def tv_exact(pmf1: ExactPmf, pmf2: ExactPmf) -> float:
    if pmf1.size != pmf2.size:
        raise DomainError(f"pmfs on different sizes: {pmf1.size} vs {pmf2.size}")
    return 0.5 * math.fsum(np.abs(pmf1.probs - pmf2.probs))


def chi2_from_pmfs(null: ExactPmf, alt: ExactPmf) -> float:
    """``sum_G alt(G)^2 / null(G)`` over all graphs."""
    if null.size != alt.size:
        raise DomainError(f"pmfs on different sizes: {null.size} vs {alt.size}")
    if np.any((null.probs == 0) & (alt.probs > 0)):
        return math.inf
    keep = null.probs > 0
    return math.fsum(alt.probs[keep] ** 2 / null.probs[keep])


def _triangle_counts(n: int, bits: np.ndarray) -> np.ndarray:
    index = {pair: e for e, pair in enumerate(edge_pairs(n))}
    counts = np.zeros(bits.shape[0], dtype=np.int64)
    for i, j, k in combinations(range(n), 3):
        counts += bits[:, index[i, j]] & bits[:, index[j, k]] & bits[:, index[i, k]]
    return counts


def exact_mean_variance_fdelta(spec: ModelSpec, max_size: int = MAX_PMF_SIZE) -> tuple[float, float]:
    """Exact mean and variance of the triangle density from the enumerated pmf."""
    pmf = enumerate_distribution(spec, max_size)
    n = pmf.size
    if n < 3:
        raise DomainError(f"triangle density needs n >= 3, got n={n}")
    f = _triangle_counts(n, _mask_bits(n * (n - 1) // 2)) / math.comb(n, 3)
    mean = pmf.expectation(f)
    var = pmf.expectation((f - mean) ** 2)
    return mean, var


def naive_triangles(G: Graph) -> int:
    """Triangle count by the triple loop ``i < j < k`` on the dense adjacency matrix."""
    n = G.n
    if n > MAX_NAIVE_TRIANGLES:
        raise CapacityError(f"naive triangle count limited to n <= {MAX_NAIVE_TRIANGLES}, got {n}")
    A = G.dense()
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if A[i, j]:
                # innermost k-loop, vectorised over k > j
                count += int(np.count_nonzero(A[i, j + 1:] & A[j, j + 1:]))
    return count


def naive_max_degree(G: Graph) -> int:
    A = G.dense()
    best = 0
    for i in range(G.n):
        best = max(best, sum(1 for j in range(G.n) if A[i, j]))
    return best


def _off_diagonal_norm(A: np.ndarray) -> float:
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigenvalues(M, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps use round-robin ordering, so each round rotates ``n/2`` disjoint
    index pairs at once. Iteration stops when the off-diagonal Frobenius norm
    drops below ``tol * max(1, ||M||_F)``.
    """
    A = np.array(M, dtype=np.float64)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DomainError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12):
        raise DomainError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    if n == 1:
        return A.diagonal().copy()
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    size = n + (n % 2)
    players = list(range(size))
    for _ in range(max_sweeps):
        off = _off_diagonal_norm(A)
        if off <= threshold:
            return A.diagonal().copy()
        for _ in range(size - 1):
            pairs = [(players[i], players[size - 1 - i]) for i in range(size // 2)]
            pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
            players = [players[0], players[-1]] + players[1:-1]
            if not pairs:
                continue
            p = np.array([a for a, _ in pairs])
            q = np.array([b for _, b in pairs])
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            active = apq != 0.0
            with np.errstate(over="ignore"):
                theta = np.where(active, (aqq - app) / np.where(active, 2.0 * apq, 1.0), 0.0)
                sgn = np.where(theta >= 0, 1.0, -1.0)
                t = np.where(active, sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
    off = _off_diagonal_norm(A)
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off)


def dense_spectrum(M) -> np.ndarray:
    """Full spectrum of a symmetric matrix or graph (``n <= 64``), sorted by decreasing ``|lambda|``."""
    if isinstance(M, Graph):
        M = M.dense().astype(np.float64)
    M = np.asarray(M, dtype=np.float64)
    if M.shape[0] > MAX_SPECTRUM_SIZE:
        raise CapacityError(f"dense spectrum limited to n <= {MAX_SPECTRUM_SIZE}, got {M.shape[0]}")
    vals = jacobi_eigenvalues(M)
    order = np.lexsort((-vals, -np.abs(vals)))
    return vals[order]

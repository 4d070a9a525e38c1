"""Network statistics (triangle density, normalised top-k singular values) and plug-in deviations."""
from __future__ import annotations

import math

import numpy as np

from .eigen import top_k_abs_eigenvalues
from .errors import DomainError
from .graph import Graph
from .specs import Statistic

CLASS_RULES_HAT = ("ier_semisparse", "geom", "ier_spectral", "combined_max")
SPECTRAL_CONSTANT = 2.1

_EDGE_CHUNK = 1 << 15


def triangle_count(G: Graph) -> int:
    """Number of triangles via per-edge bit-row intersection popcount.

    For each edge ``(i, j)`` the common neighbourhood ``N(i) & N(j)`` is a
    word-wise AND of two bit rows; summing its popcount over all edges counts
    every triangle three times.
    """
    u, v = G.edge_array
    rows = G.rows
    total = 0
    for start in range(0, u.size, _EDGE_CHUNK):
        stop = start + _EDGE_CHUNK
        common = rows[u[start:stop]] & rows[v[start:stop]]
        total += int(np.bitwise_count(common).sum(dtype=np.int64))
    return total // 3


def triangle_density(G: Graph) -> float:
    if G.n < 3:
        raise DomainError(f"triangle density needs n >= 3, got n={G.n}")
    return triangle_count(G) / math.comb(G.n, 3)


def edge_density(G: Graph) -> float:
    if G.n < 2:
        raise DomainError(f"edge density needs n >= 2, got n={G.n}")
    return G.num_edges / math.comb(G.n, 2)


def max_degree(G: Graph) -> int:
    return int(G.degrees.max())


def top_k_singular(G: Graph, k: int, tol: float = 1e-8) -> np.ndarray:
    """The ``k`` largest singular values of the adjacency matrix, divided by ``n``."""
    if not 1 <= k <= G.n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={G.n}")
    vals = top_k_abs_eigenvalues(G.adjacency_csr, k, tol=tol)
    return np.abs(vals) / G.n


def evaluate(G: Graph, statistic: Statistic):
    """Value of the statistic on ``G``: a float for triangles, a length-k array for lambda."""
    if statistic.kind == "triangle":
        return triangle_density(G)
    return top_k_singular(G, statistic.k)


def sigma_hat_from(n: int, statistic: Statistic, class_rule: str, *, f_delta=None, p_hat=None, d_hat=None) -> float:
    """Plug-in deviation from precomputed graph summaries.

    ``f_delta`` is the triangle density, ``p_hat`` the edge density and
    ``d_hat`` the maximum degree; only those the rule needs must be given.
    """
    if class_rule not in CLASS_RULES_HAT:
        raise DomainError(f"unknown class rule {class_rule!r}")
    if statistic.kind == "lambda":
        if class_rule != "ier_spectral":
            raise DomainError(f"lambda statistic needs class rule 'ier_spectral', got {class_rule!r}")
        return SPECTRAL_CONSTANT / n * math.sqrt(statistic.k * d_hat)
    if class_rule == "ier_spectral":
        raise DomainError("class rule 'ier_spectral' applies to the lambda statistic only")
    scale = math.log(n) / math.comb(n, 3)
    semisparse = 2.0 * math.sqrt(f_delta * scale)
    if class_rule == "ier_semisparse":
        return semisparse
    geom = math.sqrt((3.0 * n * p_hat + 1.0) * f_delta * scale)
    if class_rule == "geom":
        return geom
    return max(semisparse, geom)


def sigma_hat(G: Graph, statistic: Statistic, class_rule: str) -> float:
    """Estimate of the deviation scale of ``statistic`` from a single observed graph.

    ``ier_semisparse``: ``2 sqrt(f ln n / C(n,3))``; ``geom``:
    ``sqrt((3 n p_hat + 1) f ln n / C(n,3))``; ``combined_max``: the larger of
    the two; ``ier_spectral``: ``(2.1 / n) sqrt(k * max_degree)``.
    """
    if statistic.kind == "lambda":
        return sigma_hat_from(G.n, statistic, class_rule, d_hat=max_degree(G))
    f = triangle_density(G)
    p_hat = edge_density(G) if class_rule in ("geom", "combined_max") else None
    return sigma_hat_from(G.n, statistic, class_rule, f_delta=f, p_hat=p_hat)

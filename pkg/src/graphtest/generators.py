"""Seeded samplers for every model class.

All edge-independent models share one sampler: rows are visited in order
``i = 0 .. n-2`` and ``n - i - 1`` uniforms are drawn for the pairs
``(i, j), j > i``; the pair is an edge iff its uniform is below the edge
probability. With identical seeds, ``gen_ier(p * (J - I))`` therefore
reproduces ``gen_er(n, p)`` bit for bit.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .graph import Graph, _pack_rows
from .specs import ER, IER, Geom, ModelSpec, PlantedFixed, PlantedMixture, Seed

TAU_UNREACHABLE = 2.0
TAU_ALWAYS = -2.0
DEFAULT_TAU_PAIRS = 10**6


def _as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))


def _sample_rows(n: int, row_probs, rng: np.random.Generator) -> Graph:
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n - 1):
        u = rng.random(n - i - 1)
        adj[i, i + 1:] = u < row_probs(i)
    adj |= adj.T
    return Graph(n, _pack_rows(adj))


def gen_er(n: int, p: float, seed) -> Graph:
    spec = ER(n, p)
    return _sample_rows(spec.n, lambda i: spec.p, _as_seed(seed).rng())


def gen_ier(M, seed) -> Graph:
    spec = M if isinstance(M, IER) else IER(M)
    P = spec.M
    return _sample_rows(spec.size, lambda i: P[i, i + 1:], _as_seed(seed).rng())


def balanced_labels(half_n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform balanced labelling: Fisher-Yates shuffle of ``half_n`` (+1)s and ``half_n`` (-1)s."""
    labels = np.repeat(np.array([1, -1], dtype=np.int8), half_n)
    rng.shuffle(labels)
    return labels


def planted_edge_probs(labels, p: float, gamma: float, i: int) -> np.ndarray:
    """Edge probabilities ``p + gamma * l_i * l_j`` for ``j > i``."""
    lab = np.asarray(labels, dtype=np.float64)
    return p + gamma * lab[i] * lab[i + 1:]


def gen_planted(spec, seed) -> Graph:
    if not isinstance(spec, (PlantedMixture, PlantedFixed)):
        raise ParameterError(f"gen_planted needs a planted spec, got {type(spec).__name__}")
    rng = _as_seed(seed).rng()
    if isinstance(spec, PlantedMixture):
        labels = balanced_labels(spec.half_n, rng)
    else:
        labels = np.asarray(spec.labels, dtype=np.int8)
    n = labels.size
    return _sample_rows(n, lambda i: planted_edge_probs(labels, spec.p, spec.gamma, i), rng)


def sample_unit_ball(count: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the unit ball of R^r: Gaussian direction times ``U**(1/r)`` radius."""
    g = rng.standard_normal((count, r))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    radius = rng.random(count) ** (1.0 / r)
    return g * (radius / norms)[:, None]


@lru_cache(maxsize=64)
def _tau_cached(r: int, p: float, m: int, seed: int, stream: int) -> float:
    rng = Seed(seed, stream).rng()
    x = sample_unit_ball(m, r, rng)
    y = sample_unit_ball(m, r, rng)
    dots = np.einsum("ij,ij->i", x, y)
    return float(np.quantile(dots, 1.0 - p))


def estimate_tau(r: int, p: float, m: int = DEFAULT_TAU_PAIRS, seed=0) -> float:
    """Threshold ``tau`` with ``P(x . y >= tau) ~= p`` for independent uniform ball points.

    Empirical ``(1 - p)``-quantile of ``m`` sampled inner products; ``p = 0`` and
    ``p = 1`` map to the sentinels ``+2`` and ``-2``. Results are memoised per
    ``(r, p, m, seed)``.
    """
    if r < 1:
        raise ParameterError(f"dimension r must be >= 1, got {r}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if m < 10**4:
        raise ParameterError(f"tau calibration needs m >= 10^4 pairs, got {m}")
    if p == 0.0:
        return TAU_UNREACHABLE
    if p == 1.0:
        return TAU_ALWAYS
    s = _as_seed(seed)
    return _tau_cached(int(r), float(p), int(m), s.seed, s.stream)


def gen_geom(n: int, r: int, p: float, seed, tau: float | None = None) -> Graph:
    spec = Geom(n, r, p, tau)
    if tau is None:
        tau = estimate_tau(spec.r, spec.p)
    x = sample_unit_ball(spec.n, spec.r, _as_seed(seed).rng())
    adj = (x @ x.T) >= tau
    np.fill_diagonal(adj, False)
    # the Gram matrix is symmetric up to rounding; take the upper triangle as authoritative
    adj = np.triu(adj, 1)
    adj |= adj.T
    return Graph(spec.n, _pack_rows(adj))


def generate(spec: ModelSpec, seed) -> Graph:
    """Sample one graph from any supported model spec."""
    if isinstance(spec, ER):
        return gen_er(spec.n, spec.p, seed)
    if isinstance(spec, IER):
        return gen_ier(spec, seed)
    if isinstance(spec, (PlantedMixture, PlantedFixed)):
        return gen_planted(spec, seed)
    if isinstance(spec, Geom):
        return gen_geom(spec.n, spec.r, spec.p, seed, spec.tau)
    raise ParameterError(f"unsupported spec {spec!r}")

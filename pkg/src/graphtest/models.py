"""Closed-form model analytics: concentration point, deviation scale and class membership.

Class rules name the concentration result being applied:

``generic``        triangle density under limited correlation,
                   sigma = sqrt((3 D_Q + 1) mu ln n / C(n,3))
``ier_semisparse`` triangle density for sparse edge-independent models,
                   sigma = 2 sqrt(mu ln n / C(n,3))
``geom``           triangle density for random geometric graphs,
                   sigma = sqrt((3 n p_Q + 1) mu ln n / C(n,3))
``combined_max``   the larger of the ``ier_semisparse`` and ``geom`` forms
``ier_spectral``   top-k singular values, sigma = (2.1 / n) sqrt(k D_Q)

Planted mixtures are analysed through their canonical labelling; every
quantity here is invariant under relabelling, so the result is the same
for each mixture component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .generators import generate
from .specs import (
    ER,
    IER,
    Geom,
    ModelSpec,
    PlantedFixed,
    PlantedMixture,
    Seed,
    Statistic,
    derive_stream,
    probability_matrix,
)
from .statistics import SPECTRAL_CONSTANT, evaluate

CLASS_RULES = ("generic", "ier_semisparse", "geom", "combined_max", "ier_spectral")
IER_LIKE = (ER, IER, PlantedFixed, PlantedMixture)
SPECTRAL_EXPONENT = 4.1
DEFAULT_MU_TRIALS = 20


@dataclass(frozen=True)
class ModelAnalytics:
    mu: object
    sigma: float
    d_q: float
    in_class: bool
    reason: str
    mu_se: object = None

    def to_dict(self) -> dict:
        def conv(x):
            return x.tolist() if isinstance(x, np.ndarray) else x

        return {
            "mu": conv(self.mu),
            "mu_se": conv(self.mu_se),
            "sigma": self.sigma,
            "d_q": self.d_q,
            "in_class": self.in_class,
            "reason": self.reason,
        }


def _check_matrix(M) -> np.ndarray:
    return IER(M).M


def mu_triangle_ier(M) -> float:
    """Mean triangle density of an IER model: ``sum_{i<j<k} M_ij M_jk M_ik / C(n,3)``."""
    M = _check_matrix(M)
    n = M.shape[0]
    if n < 3:
        raise DomainError(f"triangle density needs n >= 3, got n={n}")
    # zero diagonal: trace(M^3) counts every unordered triple six times
    return _trace_cube(M) / 6.0 / math.comb(n, 3)


def _trace_cube(M: np.ndarray) -> float:
    """``trace(M^3)`` for a nonnegative matrix to a few ulps.

    ``M`` is split as ``hi + lo`` where ``hi`` keeps ``beta`` leading bits, so
    every partial sum of ``hi @ hi`` is exact in float64 whatever order BLAS
    uses. The remaining products are about ``2^-beta`` smaller and their
    rounding is negligible; the final reduction is compensated.
    """
    n = M.shape[0]
    top = float(M.max())
    if top == 0.0:
        return 0.0
    beta = (53 - math.ceil(math.log2(n))) // 2
    sigma = 2.0 ** (math.frexp(top)[1] - beta + 52)
    hi = (M + sigma) - sigma
    lo = M - hi
    exact = hi @ hi
    rest = hi @ lo + lo @ hi + lo @ lo
    return math.fsum(np.concatenate([(M * exact).ravel(), (M * rest).ravel()]))


def mu_triangle_planted(half_n: int, p: float, gamma: float) -> float:
    """Mean triangle density of the balanced two-block model on ``2 * half_n`` vertices."""
    spec = PlantedMixture(half_n, p, gamma)
    if spec.size < 3:
        raise DomainError(f"triangle density needs n >= 3, got n={spec.size}")
    return p**3 + gamma**3 - (3.0 / (2 * half_n - 1)) * (p**2 * gamma + p * gamma**2)


def mu_lambda_ier(M, k: int) -> np.ndarray:
    """Largest ``k`` singular values of the expected adjacency matrix, divided by ``n``."""
    M = _check_matrix(M)
    n = M.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    sv = np.sort(np.abs(np.linalg.eigvalsh(M)))[::-1]
    return sv[:k] / n


def er_eigenvalues(n: int, p: float) -> np.ndarray:
    return np.concatenate([[(n - 1) * p], np.full(n - 1, -p)])


def planted_eigenvalues(half_n: int, p: float, gamma: float) -> np.ndarray:
    """Spectrum of ``p J + gamma l l^T - (p + gamma) I`` for a balanced labelling ``l``."""
    size = 2 * half_n
    return np.concatenate(
        [[(size - 1) * p - gamma, (size - 1) * gamma - p], np.full(size - 2, -(p + gamma))]
    )


def _top_k_from_spectrum(eigs: np.ndarray, k: int, n: int) -> np.ndarray:
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    return np.sort(np.abs(eigs))[::-1][:k] / n


def max_expected_degree(spec: ModelSpec) -> float:
    if isinstance(spec, (ER, Geom)):
        return (spec.n - 1) * spec.p
    if isinstance(spec, (PlantedMixture, PlantedFixed)):
        return (spec.size - 1) * spec.p - spec.gamma
    return float(spec.M.sum(axis=1).max())


def mean_edge_probability(spec: ModelSpec) -> float:
    n = spec.size
    if n < 2:
        raise DomainError("edge density needs n >= 2")
    if isinstance(spec, (ER, Geom)):
        return spec.p
    if isinstance(spec, (PlantedMixture, PlantedFixed)):
        h = n // 2
        return (2 * math.comb(h, 2) * (spec.p + spec.gamma) + h * h * (spec.p - spec.gamma)) / math.comb(n, 2)
    return float(np.triu(spec.M, 1).sum()) / math.comb(n, 2)


def max_coexposure(spec: ModelSpec) -> float:
    """``max_{i != j} sum_{k != i,j} M_ik M_jk`` (expected triangles through a pair)."""
    n = spec.size
    if isinstance(spec, ER):
        return max(n - 2, 0) * spec.p**2
    if isinstance(spec, (PlantedMixture, PlantedFixed)):
        h, p, g = n // 2, spec.p, spec.gamma
        same = max(h - 2, 0) * (p + g) ** 2 + h * (p - g) ** 2
        cross = 2 * (h - 1) * (p + g) * (p - g)
        return max(same, cross)
    M = spec.M
    C = M @ M
    np.fill_diagonal(C, -np.inf)
    return float(C.max()) if n > 1 else 0.0


def mu_of(spec: ModelSpec, statistic: Statistic):
    """Closed-form concentration point; Geom has none and raises :class:`DomainError`."""
    n = spec.size
    if statistic.kind == "triangle":
        if n < 3:
            raise DomainError(f"triangle density needs n >= 3, got n={n}")
        if isinstance(spec, ER):
            return spec.p**3
        if isinstance(spec, PlantedMixture):
            return mu_triangle_planted(spec.half_n, spec.p, spec.gamma)
        if isinstance(spec, PlantedFixed):
            return mu_triangle_planted(n // 2, spec.p, spec.gamma)
        if isinstance(spec, IER):
            return mu_triangle_ier(spec.M)
    else:
        if isinstance(spec, ER):
            return _top_k_from_spectrum(er_eigenvalues(n, spec.p), statistic.k, n)
        if isinstance(spec, (PlantedMixture, PlantedFixed)):
            return _top_k_from_spectrum(planted_eigenvalues(n // 2, spec.p, spec.gamma), statistic.k, n)
        if isinstance(spec, IER):
            return mu_lambda_ier(spec.M, statistic.k)
    raise DomainError(
        f"no closed-form concentration point for {type(spec).__name__} with {statistic}; use estimate_mu_mc"
    )


def estimate_mu_mc(spec: ModelSpec, statistic: Statistic, trials: int, seed) -> tuple:
    """Monte Carlo mean of the statistic with its standard error.

    Trial ``t`` samples from ``Seed(seed.seed, derive_stream(seed.stream, t))``.
    """
    if trials < 2:
        raise DomainError(f"need at least 2 trials, got {trials}")
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    values = np.array(
        [evaluate(generate(spec, Seed(seed.seed, derive_stream(seed.stream, t))), statistic) for t in range(trials)],
        dtype=np.float64,
    )
    mean = values.mean(axis=0)
    se = values.std(axis=0, ddof=1) / math.sqrt(trials)
    if statistic.kind == "triangle":
        return float(mean), float(se)
    return mean, se


def check_rule(spec, statistic, class_rule):
    if class_rule not in CLASS_RULES:
        raise DomainError(f"unknown class rule {class_rule!r}; choose from {CLASS_RULES}")
    if statistic.kind == "lambda":
        if class_rule != "ier_spectral":
            raise DomainError(f"lambda statistic needs class rule 'ier_spectral', got {class_rule!r}")
        if not isinstance(spec, IER_LIKE):
            raise DomainError(f"rule 'ier_spectral' needs an edge-independent model, got {type(spec).__name__}")
        return
    if class_rule == "ier_spectral":
        raise DomainError("rule 'ier_spectral' applies to the lambda statistic only")
    if class_rule == "ier_semisparse" and not isinstance(spec, IER_LIKE):
        raise DomainError(f"rule 'ier_semisparse' needs an edge-independent model, got {type(spec).__name__}")
    if class_rule == "geom" and not isinstance(spec, Geom):
        raise DomainError(f"rule 'geom' needs a Geom model, got {type(spec).__name__}")


def _geom_membership(spec: Geom, geom_r_min: float):
    n, p, r = spec.n, spec.p, spec.r
    if p < 1.0 / n:
        return False, "p below 1/n"
    if r < geom_r_min:
        return False, "r below C"
    ln_n = math.log(n)
    upper = math.inf if ln_n == 0 else (n * p) ** 4 * math.log(1.0 / p) ** 3 / ln_n
    if r > upper:
        return False, "r above (np)^4 (ln 1/p)^3 / ln n"
    return True, "ok"


def _semisparse_membership(spec, mu):
    n = spec.size
    if mu < math.log(n) / n**3:
        return False, "mu below ln n / n^3"
    if max_coexposure(spec) > 1.0:
        return False, "edge in more than one expected triangle (max_ij sum_k M_ik M_jk > 1)"
    return True, "ok"


def in_class(spec: ModelSpec, statistic: Statistic, class_rule: str, *, mu=None, geom_r_min: float = 1.0):
    """Whether ``spec`` belongs to the model class of ``class_rule``; returns ``(flag, reason)``.

    ``reason`` names the first violated condition, or ``"ok"``.
    """
    check_rule(spec, statistic, class_rule)
    n = spec.size
    if class_rule == "ier_spectral":
        if max_expected_degree(spec) < math.log(n) ** SPECTRAL_EXPONENT:
            return False, "D_Q below (ln n)^4.1"
        return True, "ok"
    if n < 3:
        return False, "triangle density needs n >= 3"
    if class_rule == "generic":
        return True, "ok"
    if class_rule == "geom" or (class_rule == "combined_max" and isinstance(spec, Geom)):
        return _geom_membership(spec, geom_r_min)
    if mu is None:
        mu = mu_of(spec, statistic)
    return _semisparse_membership(spec, mu)


def sigma_for(
    spec: ModelSpec,
    statistic: Statistic,
    class_rule: str,
    *,
    mu=None,
    mu_se=None,
    mu_trials: int = DEFAULT_MU_TRIALS,
    seed=0,
    geom_r_min: float = 1.0,
) -> ModelAnalytics:
    """Concentration point, deviation scale and membership of ``spec`` under ``class_rule``.

    Geom models have no closed-form mean triangle density; unless ``mu`` is
    passed it is estimated with ``mu_trials`` Monte Carlo samples and its
    standard error is reported in ``mu_se``.
    """
    check_rule(spec, statistic, class_rule)
    n = spec.size
    d_q = max_expected_degree(spec)
    if mu is None:
        if isinstance(spec, Geom):
            mu, mu_se = estimate_mu_mc(spec, statistic, mu_trials, seed)
        else:
            mu = mu_of(spec, statistic)
    if statistic.kind == "lambda":
        sigma = SPECTRAL_CONSTANT / n * math.sqrt(statistic.k * d_q)
    else:
        if n < 3:
            raise DomainError(f"triangle density needs n >= 3, got n={n}")
        scale = mu * math.log(n) / math.comb(n, 3)
        if class_rule == "generic":
            sigma = math.sqrt((3.0 * d_q + 1.0) * scale)
        elif class_rule == "ier_semisparse":
            sigma = 2.0 * math.sqrt(scale)
        else:
            geom = math.sqrt((3.0 * n * mean_edge_probability(spec) + 1.0) * scale)
            sigma = geom if class_rule == "geom" else max(2.0 * math.sqrt(scale), geom)
    flag, reason = in_class(spec, statistic, class_rule, mu=mu, geom_r_min=geom_r_min)
    return ModelAnalytics(mu=mu, sigma=float(sigma), d_q=float(d_q), in_class=flag, reason=reason, mu_se=mu_se)

"""The two-sample test and the ground-truth labelling of model pairs.

Given graphs ``G``, ``G'`` and a concentrating statistic ``f``, the test
computes ``T = d(f(G), f(G')) / (2 sigma_hat(G) + 2 sigma_hat(G'))`` and
accepts the null hypothesis iff ``T <= 1``. ``d`` is the absolute difference
for the triangle density and the Euclidean distance for singular-value
vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .graph import Graph
from .models import estimate_mu_mc, max_expected_degree, mean_edge_probability, mu_of, sigma_for
from .specs import Geom, ModelSpec, Seed, Statistic, derive_stream
from .statistics import edge_density, evaluate, max_degree, sigma_hat_from, triangle_density

ACCEPT = "accept_h0"
REJECT = "reject_h0"
EPSILON_RULES = ("zero", "theorem1_half_sigma", "spectral_C_over_min_n")
RHO_RULES = ("theorem1_3p5", "cor1_7", "cor2_3p5", "cor4_7p5")


def distance(f1, f2) -> float:
    a = np.atleast_1d(np.asarray(f1, dtype=np.float64))
    b = np.atleast_1d(np.asarray(f2, dtype=np.float64))
    if np.ndim(f1) != np.ndim(f2) or a.shape != b.shape:
        raise DomainError(f"statistic values differ in kind or length: {a.shape} vs {b.shape}")
    if a.size == 1 and np.ndim(f1) == 0:
        return abs(float(a[0]) - float(b[0]))
    return float(np.linalg.norm(a - b))


def test_statistic(f1, f2, s1: float, s2: float) -> float:
    """``d(f1, f2) / (2 s1 + 2 s2)``; a zero denominator gives 0 if ``d == 0`` and ``inf`` otherwise."""
    d = distance(f1, f2)
    denom = 2.0 * s1 + 2.0 * s2
    if denom == 0.0:
        return 0.0 if d == 0.0 else math.inf
    return d / denom


# keep pytest from collecting the function above when it is imported into test modules
test_statistic.__test__ = False


def _plain(x):
    return x.tolist() if isinstance(x, np.ndarray) else x


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    f_g: object
    f_g2: object
    sigma_hat_g: float
    sigma_hat_g2: float
    t: float
    decision: str
    statistic: str
    class_rule: str
    n: int
    n2: int

    @property
    def rejected(self) -> bool:
        return self.decision == REJECT

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "class_rule": self.class_rule,
            "n": self.n,
            "n2": self.n2,
            "f_g": _plain(self.f_g),
            "f_g2": _plain(self.f_g2),
            "sigma_hat_g": self.sigma_hat_g,
            "sigma_hat_g2": self.sigma_hat_g2,
            # JSON has no infinity; the string keeps the output parseable
            "t": self.t if math.isfinite(self.t) else "inf",
            "decision": self.decision,
        }


def _summaries(G: Graph, statistic: Statistic, class_rule: str):
    if statistic.kind == "lambda":
        value = evaluate(G, statistic)
        return value, sigma_hat_from(G.n, statistic, class_rule, d_hat=max_degree(G))
    value = triangle_density(G)
    p_hat = edge_density(G) if class_rule in ("geom", "combined_max") else None
    return value, sigma_hat_from(G.n, statistic, class_rule, f_delta=value, p_hat=p_hat)


def run_test(G: Graph, G2: Graph, statistic: Statistic, class_rule: str) -> TestOutcome:
    """Evaluate the statistic and its plug-in deviation on both graphs and decide."""
    if statistic.kind == "lambda" and statistic.k > min(G.n, G2.n):
        raise DomainError(f"k={statistic.k} exceeds the smaller graph size {min(G.n, G2.n)}")
    f1, s1 = _summaries(G, statistic, class_rule)
    f2 = f1 if G2 is G else None
    s2 = s1
    if f2 is None:
        f2, s2 = _summaries(G2, statistic, class_rule)
    t = test_statistic(f1, f2, s1, s2)
    return TestOutcome(
        f_g=f1,
        f_g2=f2,
        sigma_hat_g=float(s1),
        sigma_hat_g2=float(s2),
        t=t,
        decision=REJECT if t > 1.0 else ACCEPT,
        statistic=str(statistic),
        class_rule=class_rule,
        n=G.n,
        n2=G2.n,
    )


run_test.__test__ = False


@dataclass(frozen=True)
class SeparationVerdict:
    distance: float
    epsilon: float
    rho: float
    label: str

    def to_dict(self) -> dict:
        return {"distance": self.distance, "epsilon": self.epsilon, "rho": self.rho, "label": self.label}


def default_class_rule(spec: ModelSpec, statistic: Statistic) -> str:
    if statistic.kind == "lambda":
        return "ier_spectral"
    return "geom" if isinstance(spec, Geom) else "ier_semisparse"


def _mu(spec, statistic, mu, mu_trials, seed):
    if mu is not None:
        return mu
    if isinstance(spec, Geom):
        if mu_trials is None:
            raise DomainError("no closed-form mean for Geom models; pass mu or mu_trials (see estimate_mu_mc)")
        return estimate_mu_mc(spec, statistic, mu_trials, seed)[0]
    return mu_of(spec, statistic)


def _cor_root(spec, mu, factor_from_density: bool) -> float:
    n = spec.size
    factor = 3.0 * n * mean_edge_probability(spec) + 1.0 if factor_from_density else 1.0
    return math.sqrt(factor * mu * math.log(n) / math.comb(n, 3))


def classify_pair(
    spec: ModelSpec,
    spec2: ModelSpec,
    statistic: Statistic,
    epsilon_rule: str,
    rho_rule: str,
    *,
    class_rule: str | None = None,
    class_rule2: str | None = None,
    C: float = 1.0,
    mu=None,
    mu2=None,
    mu_trials: int | None = None,
    seed=0,
) -> SeparationVerdict:
    """Label a model pair ``h0`` (``d <= epsilon``), ``h1`` (``d > rho``) or ``indeterminate``.

    ``mu``/``mu2`` override the concentration points; otherwise closed forms
    are used, with Monte Carlo (``mu_trials`` samples) for Geom models.
    ``class_rule`` selects the deviation scale used by the ``theorem1_*``
    rules and defaults to the natural rule of each spec.
    """
    if epsilon_rule not in EPSILON_RULES:
        raise DomainError(f"unknown epsilon rule {epsilon_rule!r}; choose from {EPSILON_RULES}")
    if rho_rule not in RHO_RULES:
        raise DomainError(f"unknown rho rule {rho_rule!r}; choose from {RHO_RULES}")
    if statistic.kind == "triangle" and rho_rule == "cor4_7p5":
        raise DomainError("rho rule 'cor4_7p5' applies to the lambda statistic only")
    if statistic.kind == "lambda" and rho_rule in ("cor1_7", "cor2_3p5"):
        raise DomainError(f"rho rule {rho_rule!r} applies to the triangle statistic only")
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    m1 = _mu(spec, statistic, mu, mu_trials, Seed(seed.seed, derive_stream(seed.stream, 1)))
    if mu2 is None and spec2 == spec:
        # identical models share one concentration point, even when it is a Monte Carlo estimate
        mu2 = m1
    m2 = _mu(spec2, statistic, mu2, mu_trials, Seed(seed.seed, derive_stream(seed.stream, 2)))
    dist = distance(m1, m2)

    needs_sigma = epsilon_rule == "theorem1_half_sigma" or rho_rule == "theorem1_3p5"
    sig_sum = 0.0
    if needs_sigma:
        r1 = class_rule or default_class_rule(spec, statistic)
        r2 = class_rule2 or class_rule or default_class_rule(spec2, statistic)
        sig_sum = sigma_for(spec, statistic, r1, mu=m1).sigma + sigma_for(spec2, statistic, r2, mu=m2).sigma

    if epsilon_rule == "zero":
        eps = 0.0
    elif epsilon_rule == "theorem1_half_sigma":
        eps = 0.5 * sig_sum
    else:
        eps = C / min(spec.size, spec2.size)

    if rho_rule == "theorem1_3p5":
        rho = 3.5 * sig_sum
    elif rho_rule == "cor1_7":
        rho = 7.0 * (_cor_root(spec, m1, False) + _cor_root(spec2, m2, False))
    elif rho_rule == "cor2_3p5":
        rho = 3.5 * (_cor_root(spec, m1, True) + _cor_root(spec2, m2, True))
    else:
        k = statistic.k
        rho = 7.5 * math.sqrt(k) * (
            math.sqrt(max_expected_degree(spec)) / spec.size + math.sqrt(max_expected_degree(spec2)) / spec2.size
        )

    if eps > rho:
        raise DomainError(f"epsilon {eps!r} exceeds rho {rho!r}; the hypotheses would overlap")
    if dist <= eps:
        label = "h0"
    elif dist > rho:
        label = "h1"
    else:
        label = "indeterminate"
    return SeparationVerdict(distance=dist, epsilon=float(eps), rho=float(rho), label=label)

"""Hard instances for the lower bound: ER(2n, p) against the balanced planted mixture.

The chi-square type quantity ``L = sum_G Q'(G)^2 / Q(G)`` reduces, after
fixing one labelling to ``(+1^n, -1^n)``, to an average over balanced
labellings ``l`` of ``(1 + c)^{a} (1 - c)^{b}`` with ``c = gamma^2 / (p(1-p))``,
where ``a`` and ``b`` count vertex pairs on which ``l`` and the fixed
labelling agree and disagree in relative sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CapacityError, DomainError, ParameterError
from .models import er_eigenvalues, planted_eigenvalues
from .specs import ER, PlantedMixture

MAX_CHI2_SIZE = 16


@dataclass(frozen=True)
class HardInstance:
    half_n: int
    p: float
    gamma: float

    def __post_init__(self):
        # validates p, gamma and half_n
        PlantedMixture(self.half_n, self.p, self.gamma)

    @property
    def size(self) -> int:
        return 2 * self.half_n

    @property
    def null_spec(self) -> ER:
        return ER(self.size, self.p)

    @property
    def alt_spec(self) -> PlantedMixture:
        return PlantedMixture(self.half_n, self.p, self.gamma)

    @property
    def x0(self) -> float:
        _require_interior(self.p)
        return 2.0 * self.gamma**2 / (self.p * (1.0 - self.p))


def _require_interior(p):
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got p={p}")


def _log1p_or_ninf(x: float) -> float:
    return -math.inf if x <= -1.0 else math.log1p(x)


def chi2_like(inst: HardInstance) -> float:
    """Exact ``L(Q, Q')`` by enumerating all ``C(2n, n)`` balanced labellings (``2n <= 16``)."""
    _require_interior(inst.p)
    size = inst.size
    if size > MAX_CHI2_SIZE:
        raise CapacityError(f"labelling enumeration limited to 2n <= {MAX_CHI2_SIZE}, got {size}")
    c = inst.gamma**2 / (inst.p * (1.0 - inst.p))
    if c == 0.0:
        return 1.0
    log_plus, log_minus = math.log1p(c), _log1p_or_ninf(-c)
    h = inst.half_n
    terms = []
    for plus in combinations(range(size), h):
        # a = vertices whose label agrees with the fixed one (+ on the first half, - on the second)
        a = sum(1 for i in plus if i < h) + (h - sum(1 for i in plus if i >= h))
        same = math.comb(a, 2) + math.comb(size - a, 2)
        cross = a * (size - a)
        log_term = same * log_plus + (cross * log_minus if cross else 0.0)
        terms.append(math.exp(log_term))
    return math.fsum(terms) / math.comb(size, h)


def envelope(inst: HardInstance) -> float:
    """Closed-form upper bound ``exp(4 n gamma^2 / (p (1 - p)))`` on ``L``."""
    return math.exp(2.0 * inst.half_n * inst.x0)


def in_envelope_regime(inst: HardInstance) -> bool:
    """Whether ``x0 = 2 gamma^2 / (p(1-p))`` lies in ``[0, 1/(8 e n)]``, where the envelope is proved."""
    return inst.x0 <= 1.0 / (8.0 * math.e * inst.half_n)


@dataclass(frozen=True)
class TVBound:
    exact: float | None
    envelope: float
    in_regime: bool

    def to_dict(self) -> dict:
        return {"exact": self.exact, "envelope": self.envelope, "in_regime": self.in_regime}


def tv_upper_bound(inst: HardInstance) -> TVBound:
    """Total variation bounds ``0.5 sqrt(L - 1)``.

    ``exact`` uses the enumerated ``L`` (``None`` above the enumeration cap);
    ``envelope`` uses the closed form and is only proved when ``in_regime``.
    """
    _require_interior(inst.p)
    exact = None
    if inst.size <= MAX_CHI2_SIZE:
        exact = 0.5 * math.sqrt(max(chi2_like(inst) - 1.0, 0.0))
    env = 0.5 * math.sqrt(math.expm1(2.0 * inst.half_n * inst.x0))
    return TVBound(exact=exact, envelope=env, in_regime=in_envelope_regime(inst))


def mu_gap_triangle(inst: HardInstance) -> float:
    """``|gamma^3 - 3/(2n-1) (p^2 gamma + p gamma^2)|``."""
    p, g = inst.p, inst.gamma
    return abs(g**3 - 3.0 / (2 * inst.half_n - 1) * (p**2 * g + p * g**2))


def lambda_gap_regime(inst: HardInstance) -> bool:
    """Whether ``gamma >= 2(p + gamma)/n``, so the two top singular values of the planted matrix
    are ``(2n-1)p - gamma`` and ``(2n-1)gamma - p``."""
    return inst.gamma >= 2.0 * (inst.p + inst.gamma) / inst.half_n


def mu_gap_lambda(inst: HardInstance) -> float:
    """Euclidean gap between the normalised top-2 singular values of the two expected matrices.

    Inside :func:`lambda_gap_regime` this is the closed form
    ``sqrt((gamma/2n)^2 + (gamma - (2p + gamma)/2n)^2)``. Outside it the
    second singular value of the planted matrix is ``p + gamma`` or
    ``|(2n-1)gamma - p|``, and the gap is taken from the sorted known spectra.
    """
    size, p, g = inst.size, inst.p, inst.gamma
    if lambda_gap_regime(inst):
        return math.hypot(g / size, g - (2.0 * p + g) / size)
    er = np.sort(np.abs(er_eigenvalues(size, p)))[::-1][:2]
    planted = np.sort(np.abs(planted_eigenvalues(inst.half_n, p, g)))[::-1][:2]
    return float(np.linalg.norm(er - planted)) / size


def gamma_thresholds(n: int, p: float) -> dict:
    """Separation thresholds for ``gamma``, with ``n`` the half-size of the graphs."""
    _require_interior(p)
    if n < 2:
        raise ParameterError(f"need n >= 2, got n={n}")
    return {
        "triangle": 5.0 * math.sqrt(p * math.log(n) / n),
        "lambda": 15.0 * math.sqrt(p / n),
        "tv_scale": math.sqrt(p * (1.0 - p) / n),
    }


def sweep(half_n: int, p: float, gammas) -> list[dict]:
    """One row per ``gamma`` with the mean gaps, thresholds and chi-square/TV bounds."""
    thresholds = gamma_thresholds(half_n, p)
    rows = []
    for g in np.asarray(gammas, dtype=np.float64):
        inst = HardInstance(half_n, p, float(g))
        tv = tv_upper_bound(inst)
        rows.append(
            {
                "half_n": half_n,
                "p": p,
                "gamma": float(g),
                "mu_gap_triangle": mu_gap_triangle(inst),
                "mu_gap_lambda": mu_gap_lambda(inst),
                "lambda_regime": lambda_gap_regime(inst),
                "threshold_triangle": thresholds["triangle"],
                "threshold_lambda": thresholds["lambda"],
                "tv_scale": thresholds["tv_scale"],
                "chi2_like": chi2_like(inst) if inst.size <= MAX_CHI2_SIZE else None,
                "tv_bound_exact": tv.exact,
                "tv_bound_envelope": tv.envelope,
                "envelope_regime": tv.in_regime,
            }
        )
    return rows

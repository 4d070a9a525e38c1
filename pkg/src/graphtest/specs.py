"""Descriptions of generating distributions, RNG seeds and statistic choices.

Every model class used by the test is represented by a small frozen
dataclass. Edge-independent models (ER, IER, planted with a fixed
labelling) expose their edge probability matrix; the planted mixture
exposes the matrix of its canonical labelling, which has the same
spectrum and triangle mean as every other balanced labelling.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ParameterError, ParseError

UINT64_MAX = 2**64 - 1


def _check_prob(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")


def _check_gamma(p, gamma):
    if gamma < 0 or gamma > min(p, 1.0 - p) + 1e-15:
        raise ParameterError(f"gamma must lie in [0, min(p, 1-p)] = [0, {min(p, 1 - p)}], got {gamma}")


@dataclass(frozen=True)
class ER:
    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        _check_prob("p", self.p)

    @property
    def size(self) -> int:
        return self.n


@dataclass(frozen=True, eq=False)
class IER:
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
            raise ParameterError("IER matrix must be square and non-empty")
        if not np.array_equal(M, M.T):
            raise ParameterError("IER matrix must be symmetric")
        if np.any(np.diag(M) != 0):
            raise ParameterError("IER matrix must have zero diagonal")
        if np.any(M < 0) or np.any(M > 1) or np.isnan(M).any():
            raise ParameterError("IER matrix entries must lie in [0, 1]")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def size(self) -> int:
        return self.M.shape[0]

    def __eq__(self, other):
        return isinstance(other, IER) and np.array_equal(self.M, other.M)

    def __hash__(self):
        return hash(self.M.tobytes())


@dataclass(frozen=True)
class Geom:
    """Random geometric graph on the unit ball of R^r.

    ``tau`` is the inner-product threshold; ``None`` means it is calibrated
    from ``(r, p)`` by Monte Carlo when a graph is generated.
    """

    n: int
    r: int
    p: float
    tau: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if int(self.r) != self.r or self.r < 1:
            raise ParameterError(f"dimension r must be an integer >= 1, got {self.r}")
        _check_prob("p", self.p)

    @property
    def size(self) -> int:
        return self.n


@dataclass(frozen=True)
class PlantedMixture:
    """Uniform mixture over balanced two-block labellings of ``2 * half_n`` vertices."""

    half_n: int
    p: float
    gamma: float

    def __post_init__(self):
        if self.half_n < 1:
            raise ParameterError(f"half_n must be >= 1, got {self.half_n}")
        _check_prob("p", self.p)
        _check_gamma(self.p, self.gamma)

    @property
    def size(self) -> int:
        return 2 * self.half_n

    def canonical_labels(self) -> np.ndarray:
        return np.repeat(np.array([1, -1], dtype=np.int8), self.half_n)


@dataclass(frozen=True)
class PlantedFixed:
    labels: tuple
    p: float
    gamma: float

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if not labels or len(labels) % 2:
            raise ParameterError("labelling must have even, non-zero length")
        if any(x not in (-1, 1) for x in labels):
            raise ParameterError("labels must be +1 or -1")
        if sum(labels) != 0:
            raise ParameterError("labelling must be balanced (sum to zero)")
        object.__setattr__(self, "labels", labels)
        _check_prob("p", self.p)
        _check_gamma(self.p, self.gamma)

    @property
    def size(self) -> int:
        return len(self.labels)


ModelSpec = Union[ER, IER, Geom, PlantedMixture, PlantedFixed]
EDGE_INDEPENDENT = (ER, IER, PlantedFixed)


def planted_matrix(labels, p: float, gamma: float) -> np.ndarray:
    lab = np.asarray(labels, dtype=np.float64)
    M = p + gamma * np.outer(lab, lab)
    np.fill_diagonal(M, 0.0)
    return M


def probability_matrix(spec: ModelSpec) -> np.ndarray:
    """Expected adjacency matrix of an IER-type spec (canonical labelling for mixtures)."""
    if isinstance(spec, ER):
        M = np.full((spec.n, spec.n), float(spec.p))
        np.fill_diagonal(M, 0.0)
        return M
    if isinstance(spec, IER):
        return np.array(spec.M)
    if isinstance(spec, PlantedFixed):
        return planted_matrix(spec.labels, spec.p, spec.gamma)
    if isinstance(spec, PlantedMixture):
        return planted_matrix(spec.canonical_labels(), spec.p, spec.gamma)
    raise ParameterError(f"{type(spec).__name__} has no edge probability matrix")


def model_name(spec: ModelSpec) -> str:
    return {
        ER: "er",
        IER: "ier",
        Geom: "geom",
        PlantedMixture: "planted_mixture",
        PlantedFixed: "planted_fixed",
    }[type(spec)]


def spec_to_dict(spec: ModelSpec) -> dict:
    if isinstance(spec, ER):
        return {"model": "er", "n": spec.n, "p": spec.p}
    if isinstance(spec, IER):
        return {"model": "ier", "M": spec.M.tolist()}
    if isinstance(spec, Geom):
        out = {"model": "geom", "n": spec.n, "r": spec.r, "p": spec.p}
        if spec.tau is not None:
            out["tau"] = spec.tau
        return out
    if isinstance(spec, PlantedMixture):
        return {"model": "planted_mixture", "half_n": spec.half_n, "p": spec.p, "gamma": spec.gamma}
    if isinstance(spec, PlantedFixed):
        return {"model": "planted_fixed", "labels": list(spec.labels), "p": spec.p, "gamma": spec.gamma}
    raise TypeError(f"not a model spec: {spec!r}")


def spec_from_dict(data: dict) -> ModelSpec:
    try:
        kind = data["model"]
        if kind == "er":
            return ER(int(data["n"]), float(data["p"]))
        if kind == "ier":
            return IER(np.asarray(data["M"], dtype=float))
        if kind == "geom":
            tau = data.get("tau")
            return Geom(int(data["n"]), int(data["r"]), float(data["p"]), None if tau is None else float(tau))
        if kind == "planted_mixture":
            return PlantedMixture(int(data["half_n"]), float(data["p"]), float(data["gamma"]))
        if kind == "planted_fixed":
            return PlantedFixed(tuple(data["labels"]), float(data["p"]), float(data["gamma"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"incomplete model spec {data!r}: {exc}") from None
    raise ParseError(f"unknown model {data.get('model')!r}")


def load_spec(source: str) -> ModelSpec:
    """Parse a spec from inline JSON (starting with ``{``) or a JSON file path."""
    text = source if source.lstrip().startswith("{") else open(source).read()
    try:
        return spec_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


@dataclass(frozen=True)
class Seed:
    """Reproducible RNG handle.

    The generator is PCG64 keyed by ``SeedSequence(seed, spawn_key=(stream,))``,
    so every ``(seed, stream)`` pair yields an independent, bit-reproducible stream.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not (0 <= int(value) <= UINT64_MAX):
                raise ParameterError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream,))))


_MASK64 = UINT64_MAX


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_stream(*parts: int) -> int:
    """Fold integers into one 64-bit stream id with chained splitmix64."""
    h = 0
    for part in parts:
        h = splitmix64(h ^ (int(part) & _MASK64))
    return h


@dataclass(frozen=True)
class Statistic:
    """Which network statistic to evaluate: ``triangle`` or ``lambda`` with ``k`` values."""

    kind: str
    k: int = field(default=1)

    def __post_init__(self):
        if self.kind not in ("triangle", "lambda"):
            raise ParameterError(f"unknown statistic {self.kind!r}")
        if self.kind == "lambda" and self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.kind == "triangle" and self.k != 1:
            object.__setattr__(self, "k", 1)

    @classmethod
    def parse(cls, text: str) -> "Statistic":
        text = text.strip()
        if text == "triangle":
            return cls("triangle")
        if text.startswith("lambda"):
            rest = text[len("lambda"):]
            if not rest:
                return cls("lambda", 1)
            rest = rest.strip("():= ")
            try:
                return cls("lambda", int(rest))
            except ValueError:
                pass
        raise ParseError(f"cannot parse statistic {text!r}; use 'triangle' or 'lambda:<k>'")

    def __str__(self):
        return "triangle" if self.kind == "triangle" else f"lambda:{self.k}"


TRIANGLE = Statistic("triangle")

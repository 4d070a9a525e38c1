import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphtest.errors import DomainError
from graphtest.generators import gen_er
from graphtest.graph import Graph
from graphtest.minimax import gamma_thresholds
from graphtest.specs import ER, Geom, PlantedMixture, Seed, Statistic
from graphtest.twosample import ACCEPT, REJECT, classify_pair, run_test, test_statistic

TRI = Statistic("triangle")
LAM2 = Statistic("lambda", 2)


def test_statistic_examples():
    assert test_statistic(0.3, 0.3, 0.01, 0.02) == 0.0
    assert test_statistic(0.1, 0.0, 0.025, 0.025) == 1.0
    assert test_statistic(0.2, 0.1, 0.0, 0.0) == math.inf
    assert test_statistic(0.2, 0.2, 0.0, 0.0) == 0.0
    assert test_statistic(np.array([0.3, 0.4]), np.array([0.0, 0.0]), 0.5, 0.5) == pytest.approx(0.25)


@pytest.mark.parametrize("a, b", [(0.1, np.array([0.1])), (np.array([0.1, 0.2]), np.array([0.1]))])
def test_statistic_variant_mismatch(a, b):
    with pytest.raises(DomainError):
        test_statistic(a, b, 0.1, 0.1)


@given(
    f1=st.floats(0, 1), f2=st.floats(0, 1), s1=st.floats(0, 1), s2=st.floats(0, 1),
)
def test_statistic_symmetric(f1, f2, s1, s2):
    assert test_statistic(f1, f2, s1, s2) == test_statistic(f2, f1, s2, s1)


@given(f1=st.floats(0, 1), f2=st.floats(0, 1), s1=st.floats(1e-6, 1), s2=st.floats(1e-6, 1), bump=st.floats(1e-3, 1))
def test_statistic_decreases_in_sigma(f1, f2, s1, s2, bump):
    if f1 == f2:
        return
    t = test_statistic(f1, f2, s1, s2)
    assert test_statistic(f1, f2, s1 + bump, s2) < t
    assert test_statistic(f1, f2, s1, s2 + bump) < t


def test_same_graph_accepts():
    G = gen_er(300, 0.1, Seed(1))
    for stat, rule in ((TRI, "ier_semisparse"), (LAM2, "ier_spectral")):
        out = run_test(G, G, stat, rule)
        assert out.t == 0.0 and out.decision == ACCEPT


def test_outcome_fields_and_decision_rule():
    G1 = gen_er(200, 0.1, Seed(1))
    G2 = gen_er(200, 0.3, Seed(2))
    out = run_test(G1, G2, TRI, "ier_semisparse")
    assert out.decision == (REJECT if out.t > 1 else ACCEPT)
    assert out.decision == REJECT
    back = run_test(G2, G1, TRI, "ier_semisparse")
    assert back.t == out.t
    d = out.to_dict()
    assert d["n"] == 200 and d["statistic"] == "triangle"


def test_degenerate_infinite_t_serialises():
    out = run_test(Graph.empty(5), Graph.complete(5), Statistic("lambda", 1), "ier_spectral")
    assert out.t == pytest.approx(abs(0 - 4 / 5) / (2 * 2.1 / 5 * 2))
    e = run_test(Graph.empty(5), Graph.empty(6), TRI, "ier_semisparse")
    assert e.t == 0.0


def test_decision_invariant_under_relabelling(rng):
    G1 = gen_er(150, 0.2, Seed(3))
    G2 = gen_er(150, 0.25, Seed(4))
    base = run_test(G1, G2, LAM2, "ier_spectral")
    for _ in range(3):
        H = G2.relabel(rng.permutation(150))
        out = run_test(G1, H, LAM2, "ier_spectral")
        assert out.decision == base.decision
        assert out.t == pytest.approx(base.t, rel=1e-8)


def test_graphs_of_different_sizes():
    out = run_test(gen_er(100, 0.3, Seed(1)), gen_er(140, 0.3, Seed(2)), LAM2, "ier_spectral")
    assert (out.n, out.n2) == (100, 140)
    with pytest.raises(DomainError):
        run_test(Graph.complete(3), Graph.complete(5), Statistic("lambda", 4), "ier_spectral")


@pytest.mark.parametrize(
    "statistic, eps, rho",
    [
        (TRI, "zero", "cor1_7"),
        (TRI, "theorem1_half_sigma", "theorem1_3p5"),
        (LAM2, "spectral_C_over_min_n", "cor4_7p5"),
        (LAM2, "zero", "theorem1_3p5"),
    ],
)
def test_identical_specs_are_h0(statistic, eps, rho):
    v = classify_pair(ER(500, 0.1), ER(500, 0.1), statistic, eps, rho)
    assert v.distance == 0.0 and v.label == "h0"


def test_planted_above_triangle_threshold_is_h1():
    half, p = 500, 0.5
    g = gamma_thresholds(half, p)["triangle"]
    v = classify_pair(ER(2 * half, p), PlantedMixture(half, p, g), TRI, "zero", "cor1_7")
    assert v.label == "h1"


def test_er_different_sizes_are_h0_under_spectral_epsilon():
    p = 0.1
    v = classify_pair(ER(1000, p), ER(1500, p), Statistic("lambda", 1), "spectral_C_over_min_n", "cor4_7p5")
    assert v.distance == pytest.approx(p * abs(1 / 1000 - 1 / 1500), rel=1e-9)
    assert v.distance <= 1 / 1000
    assert v.label == "h0"


def test_indeterminate_between_epsilon_and_rho():
    v = classify_pair(ER(500, 0.1), ER(500, 0.1005), TRI, "zero", "cor1_7")
    assert v.epsilon < v.distance <= v.rho
    assert v.label == "indeterminate"


def test_epsilon_above_rho_is_rejected():
    with pytest.raises(DomainError, match="exceeds rho"):
        classify_pair(ER(500, 0.1), ER(500, 0.1), Statistic("lambda", 1), "spectral_C_over_min_n", "cor4_7p5", C=200)


def test_rule_validation():
    with pytest.raises(DomainError):
        classify_pair(ER(50, 0.1), ER(50, 0.1), TRI, "bogus", "cor1_7")
    with pytest.raises(DomainError):
        classify_pair(ER(50, 0.1), ER(50, 0.1), TRI, "zero", "cor4_7p5")
    with pytest.raises(DomainError):
        classify_pair(ER(50, 0.1), ER(50, 0.1), LAM2, "zero", "cor1_7")


def test_geom_needs_monte_carlo_mean():
    geom = Geom(200, 2, 0.2, tau=0.3)
    with pytest.raises(DomainError, match="estimate_mu_mc"):
        classify_pair(ER(200, 0.2), geom, TRI, "zero", "cor2_3p5")
    v = classify_pair(ER(200, 0.2), geom, TRI, "zero", "cor2_3p5", mu_trials=5, seed=2)
    assert v.distance > 0
    same = classify_pair(geom, geom, TRI, "zero", "cor2_3p5", mu_trials=5)
    assert same.label == "h0"


# Monte Carlo Type-I and power checks at n = 2000 are acceptance criterion 5 (tests/test_acceptance.py).

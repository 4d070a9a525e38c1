"""Two-sample hypothesis testing for pairs of random graphs with concentrating network statistics."""
from .errors import CapacityError, ConvergenceError, DomainError, GraphTestError, ParameterError, ParseError
from .generators import estimate_tau, gen_er, gen_geom, gen_ier, gen_planted, generate
from .graph import Graph, parse_edge_list, read_edge_list, write_edge_list
from .minimax import HardInstance, chi2_like, gamma_thresholds, mu_gap_lambda, mu_gap_triangle, tv_upper_bound
from .models import ModelAnalytics, estimate_mu_mc, in_class, mu_lambda_ier, mu_triangle_ier, mu_triangle_planted, sigma_for
from .specs import ER, IER, Geom, PlantedFixed, PlantedMixture, Seed, Statistic
from .statistics import edge_density, max_degree, sigma_hat, top_k_singular, triangle_count, triangle_density
from .twosample import SeparationVerdict, TestOutcome, classify_pair, run_test, test_statistic

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConvergenceError", "DomainError", "GraphTestError", "ParameterError", "ParseError",
    "estimate_tau", "gen_er", "gen_geom", "gen_ier", "gen_planted", "generate",
    "Graph", "parse_edge_list", "read_edge_list", "write_edge_list",
    "HardInstance", "chi2_like", "gamma_thresholds", "mu_gap_lambda", "mu_gap_triangle", "tv_upper_bound",
    "ModelAnalytics", "estimate_mu_mc", "in_class", "mu_lambda_ier", "mu_triangle_ier", "mu_triangle_planted",
    "sigma_for",
    "ER", "IER", "Geom", "PlantedFixed", "PlantedMixture", "Seed", "Statistic",
    "edge_density", "max_degree", "sigma_hat", "top_k_singular", "triangle_count", "triangle_density",
    "SeparationVerdict", "TestOutcome", "classify_pair", "run_test", "test_statistic",
]

"""Energy-aware probabilistic caching for clustered D2D networks.

Stochastic-geometry coverage analysis, Monte Carlo validation and the
convex energy minimisation over caching probabilities.
"""
from .cache_model import (AccessSplit, CachingPolicy, ContentConfig, access_split,
                          baseline_cpf, baseline_rc, baseline_zipf, place_files, zipf_popularity)
from .config import ExperimentSpec, NetworkConfig, load_config
from .coverage import (CoverageResult, LinkParams, avg_rate, bs_coverage, d2d_coverage,
                       laplace_inter_cluster)
from .energy import (EnergyParams, EnergyReport, OptimizerResult, cluster_energy, kkt_residual,
                     normalized_energy, solve_optimal, verify_convexity)
from .kernels import BACKEND
from .monte_carlo import McConfig, estimate_laplace, simulate_d2d_coverage, simulate_serving_distance
from .special import gamma_fn, gauss_2f1

__version__ = "0.1.0"

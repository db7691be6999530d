"""Cluster energy objective and its constrained minimisation.

For caching probabilities ``b`` the energy spent serving one request round
in a cluster of ``n`` devices is

    E(b) = n * sum_i q_i S_i [c_d ((1-b_i) - (1-b_i)^n) + c_b (1-b_i)^n]

with per-Mbit costs ``c_d = P_d / R_d`` and ``c_b = P_b / R_b``.  ``E`` is
separable with diagonal Hessian ``n^2 (n-1) q_i S_i (1-b_i)^(n-2) (c_b - c_d)``,
hence convex whenever D2D delivery is cheaper than BS delivery.

The minimiser over ``{sum b = M, 0 <= b <= 1}`` follows from the KKT
conditions: with multiplier ``v`` every unsaturated file satisfies
``-dE/db_i = v``, i.e.

    b_i(v) = clip(1 - [(v - n q_i S_i c_d) / (n^2 q_i S_i (c_b - c_d))]^(1/(n-1)), 0, 1)

and ``v`` is found by bisection on ``sum_i b_i(v) = M``.
"""
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cache_model import CachingPolicy, baseline_cpf, ContentConfig
from .config import NetworkConfig
from .coverage import LinkParams, avg_rate, bs_coverage, d2d_coverage
from .errors import ParameterError


@dataclass(frozen=True)
class EnergyParams:
    cost_d2d: float    # J per Mbit
    cost_bs: float     # J per Mbit
    n: int
    q: np.ndarray
    sizes: np.ndarray  # Mbits

    def __post_init__(self):
        if not (self.cost_d2d > 0 and self.cost_bs > 0):
            raise ParameterError("per-Mbit costs must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError("n must be a positive integer")
        q = np.asarray(self.q, dtype=float)
        sizes = np.asarray(self.sizes, dtype=float)
        if q.shape != sizes.shape or q.ndim != 1:
            raise ParameterError("popularity and sizes must be vectors of equal length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "sizes", sizes)

    @property
    def weights(self):
        return self.q * self.sizes

    @property
    def n_files(self):
        return self.q.size

    @classmethod
    def from_config(cls, network, content):
        """Costs from the average D2D / BS throughputs of the network."""
        link = LinkParams(network.theta, network.alpha, network.sigma, network.lambda_p,
                          network.p_d, network.w_d)
        rate_d = avg_rate(network.w_d, network.theta, d2d_coverage(link).probability) / 1e6
        rate_b = avg_rate(network.w_b, network.theta,
                          bs_coverage(network.theta, network.alpha).probability) / 1e6
        return cls(network.p_d / rate_d, network.p_b / rate_b, int(network.n),
                   content.popularity, content.file_sizes)


@dataclass(frozen=True)
class EnergyReport:
    total_energy: float
    per_device_normalized: float
    self_energy: np.ndarray
    d2d_energy: np.ndarray
    bs_energy: np.ndarray


@dataclass(frozen=True)
class OptimizerResult:
    policy: CachingPolicy
    multiplier: float
    kkt_residual: float
    iterations: int
    method: str = "kkt_bisection"
    flags: tuple = field(default=())


def _b_vector(policy, params):
    b = policy.b if isinstance(policy, CachingPolicy) else np.asarray(policy, dtype=float)
    if b.shape != params.q.shape:
        raise ParameterError(f"policy has {b.size} files, parameters have {params.n_files}")
    return b


def all_bs_energy(params):
    """Energy when every request goes to the BS; the normalisation reference."""
    return params.n * params.cost_bs * math.fsum(params.weights)


def cluster_energy(policy, params):
    b = _b_vector(policy, params)
    n = params.n
    w = params.weights
    miss = (1.0 - b) ** n
    d2d = n * w * params.cost_d2d * ((1.0 - b) - miss)
    bs = n * w * params.cost_bs * miss
    total = math.fsum(d2d) + math.fsum(bs)
    return EnergyReport(total, total / all_bs_energy(params), np.zeros_like(b), d2d, bs)


def normalized_energy(report, params):
    return report.total_energy / all_bs_energy(params)


def energy_value(b, params):
    return cluster_energy(b, params).total_energy


def energy_gradient(b, params):
    b = _b_vector(b, params)
    n, cd, cb = params.n, params.cost_d2d, params.cost_bs
    return n * params.weights * (n * (1.0 - b) ** (n - 1) * (cd - cb) - cd)


def energy_hessian_diag(b, params):
    b = _b_vector(b, params)
    n = params.n
    if n < 2:
        return np.zeros_like(b)
    return n * n * (n - 1) * params.weights * (1.0 - b) ** (n - 2) * (params.cost_bs - params.cost_d2d)


def _gradient_scale(params):
    # largest |dE/db_i| over the box, used to make residuals dimensionless
    return float(np.max(np.abs(energy_gradient(np.zeros(params.n_files), params))))


def kkt_residual(policy, multiplier, params):
    """Largest KKT violation of ``policy``, relative to the gradient scale.

    With ``a_i = -dE/db_i``, interior files need ``a_i = v``, files at 0 need
    ``a_i <= v`` and files at 1 need ``a_i >= v``.  Primal infeasibility
    (cache sum, box) enters unscaled.  Passing ``multiplier=None`` uses the
    multiplier that minimises the stationarity violation.
    """
    b = _b_vector(policy, params)
    a = -energy_gradient(b, params)
    scale = _gradient_scale(params)
    lower = b <= 0.0
    upper = b >= 1.0
    interior = ~(lower | upper)

    if multiplier is None:
        lo_side = a[interior | lower]   # need v >= these
        hi_side = a[interior | upper]   # need v <= these
        top = lo_side.max() if lo_side.size else -np.inf
        bottom = hi_side.min() if hi_side.size else np.inf
        if np.isfinite(top) and np.isfinite(bottom):
            multiplier = 0.5 * (top + bottom)
        else:
            multiplier = top if np.isfinite(top) else bottom
    v = float(multiplier)

    viol = np.zeros_like(b)
    viol[interior] = np.abs(a[interior] - v)
    viol[lower] = np.maximum(0.0, a[lower] - v)
    viol[upper] = np.maximum(0.0, v - a[upper])
    stationarity = float(viol.max()) / scale
    cache = int(round(b.sum()))
    feasibility = max(abs(math.fsum(b) - cache), float(np.max(np.maximum(-b, b - 1.0))), 0.0)
    return max(stationarity, feasibility)


def _b_of_multiplier(v, params):
    n = params.n
    w = params.weights
    base = (v - n * w * params.cost_d2d) / (n * n * w * (params.cost_bs - params.cost_d2d))
    b = np.empty_like(w)
    sat = base <= 0.0
    off = base >= 1.0
    mid = ~(sat | off)
    b[sat] = 1.0
    b[off] = 0.0
    b[mid] = 1.0 - base[mid] ** (1.0 / (n - 1))
    return b


def _concave_solution(params, m):
    # concave separable objective: optimum sits on a vertex, i.e. M files fully cached;
    # caching file i saves n w_i c_b, so take the M largest weights
    order = np.argsort(-params.weights, kind="stable")
    b = np.zeros(params.n_files)
    b[order[:m]] = 1.0
    return b


def solve_optimal(params, m, tol=1e-9, max_iter=200):
    """Energy-minimising caching distribution with cache size ``m``."""
    if int(m) != m or not 1 <= m <= params.n_files:
        raise ParameterError(f"cache size must be an integer in [1, {params.n_files}]")
    m = int(m)
    if m == params.n_files:
        b = np.ones(params.n_files)
        pol = CachingPolicy(b)
        v = float(np.min(-energy_gradient(b, params)))
        return OptimizerResult(pol, v, kkt_residual(pol, v, params), 0, "saturated")
    if params.n == 1:
        content = ContentConfig(params.n_files, m, 0.0, np.ones(params.n_files))
        b = _concave_solution(params, m) if np.ptp(params.weights) > 0 else baseline_cpf(content).b
        pol = CachingPolicy(b)
        return OptimizerResult(pol, float("nan"), kkt_residual(pol, None, params), 0,
                               "cpf", ("single_device_cluster",))
    if params.cost_d2d >= params.cost_bs:
        warnings.warn("D2D delivery is not cheaper than BS delivery; the objective is "
                      "concave and the vertex solution is returned", RuntimeWarning, stacklevel=2)
        pol = CachingPolicy(_concave_solution(params, m))
        return OptimizerResult(pol, float("nan"), kkt_residual(pol, None, params), 0,
                               "vertex", ("d2d_not_cheaper",))

    n, w = params.n, params.weights
    lo = float(np.min(n * w * params.cost_d2d))                                  # every b_i = 1
    hi = float(np.max(n * w * (params.cost_d2d + n * (params.cost_bs - params.cost_d2d))))  # every b_i = 0
    while _b_of_multiplier(lo, params).sum() < m:
        lo *= 0.5
    while _b_of_multiplier(hi, params).sum() > m:
        hi *= 2.0

    it = 0
    v = 0.5 * (lo + hi)
    b = _b_of_multiplier(v, params)
    while it < max_iter:
        it += 1
        v = 0.5 * (lo + hi)
        b = _b_of_multiplier(v, params)
        gap = math.fsum(b) - m
        if abs(gap) <= 0.01 * tol or not lo < v < hi:
            break
        if gap > 0:
            lo = v
        else:
            hi = v
    if abs(math.fsum(b) - m) > 0.01 * tol:
        # b_i(v) is near-vertical for a file at its saturation point, so even
        # adjacent floats lo < hi can straddle M by a visible margin; blend the
        # two bracket solutions, which differ only in such files
        b_lo, b_hi = _b_of_multiplier(lo, params), _b_of_multiplier(hi, params)
        s_lo, s_hi = math.fsum(b_lo), math.fsum(b_hi)
        if s_lo > s_hi:
            t = (s_lo - m) / (s_lo - s_hi)
            b = (1.0 - t) * b_lo + t * b_hi
            v = (1.0 - t) * lo + t * hi
    total = math.fsum(b)
    if abs(total - m) > tol:
        raise RuntimeError(f"bisection stalled: sum(b) - M = {total - m:.3e}")
    pol = CachingPolicy(b)
    return OptimizerResult(pol, v, kkt_residual(pol, v, params), it)


def project_capped_simplex(z, m, iters=200):
    """Euclidean projection of ``z`` onto ``{sum x = m, 0 <= x <= 1}``."""
    z = np.asarray(z, dtype=float)
    lo, hi = float(z.min()) - 1.0, float(z.max())
    for _ in range(iters):
        tau = 0.5 * (lo + hi)
        if np.clip(z - tau, 0.0, 1.0).sum() > m:
            lo = tau
        else:
            hi = tau
    return np.clip(z - 0.5 * (lo + hi), 0.0, 1.0)


def solve_projected_gradient(params, m, iters=20000, start=None):
    """Accelerated projected gradient for the same program.

    Independent of the multiplier route; used to cross-check
    :func:`solve_optimal` on problems too large for grid search.
    """
    lipschitz = float(np.max(energy_hessian_diag(np.zeros(params.n_files), params)))
    step = 1.0 / lipschitz
    x = project_capped_simplex(np.full(params.n_files, m / params.n_files) if start is None
                               else start, m)
    y = x.copy()
    t = 1.0
    for _ in range(iters):
        x_new = project_capped_simplex(y - step * energy_gradient(y, params), m)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
    return x


def verify_convexity(params, probe_policies, fd_step=1e-6, rtol=1e-5):
    """Check the Hessian diagonal is non-negative at every probe and that the
    analytic gradient agrees with central differences of the objective."""
    for probe in probe_policies:
        b = _b_vector(probe, params)
        if np.any(energy_hessian_diag(b, params) < -1e-12):
            return False
        grad = energy_gradient(b, params)
        # the objective is separable, so perturbing every coordinate at once
        # and differencing the per-file terms gives all partials in one pass
        hi = cluster_energy(b + fd_step, params)
        lo = cluster_energy(b - fd_step, params)
        fd = ((hi.d2d_energy + hi.bs_energy) - (lo.d2d_energy + lo.bs_energy)) / (2.0 * fd_step)
        denom = np.maximum(np.abs(grad), 1e-300)
        if np.any(np.abs(fd - grad) / denom > rtol):
            return False
    return True


def result_summary(result, params):
    report = cluster_energy(result.policy, params)
    return {
        "v_star": result.multiplier,
        "kkt_residual": result.kkt_residual,
        "energy_joules": report.total_energy,
        "normalized_energy": report.per_device_normalized,
        "iterations": result.iterations,
        "method": result.method,
        "flags": list(result.flags),
    }


def result_to_json(result, params):
    data = result_summary(result, params)
    data["b_star"] = [float(v) for v in result.policy.b]
    return json.dumps(data, indent=2, allow_nan=True)


def write_result_csv(result, params, path):
    """``# key=value`` header lines followed by ``file_index,b_star`` rows."""
    with open(path, "w") as fh:
        for key, value in result_summary(result, params).items():
            if key == "flags":
                value = ";".join(value)
            fh.write(f"# {key}={value!r}\n" if isinstance(value, float) else f"# {key}={value}\n")
        fh.write("file_index,b_star\n")
        for i, v in enumerate(result.policy.b, start=1):
            fh.write(f"{i},{float(v)!r}\n")

"""Closed-form coverage probabilities and fixed-rate throughput.

All inputs are linear/SI: ``theta`` is a linear SIR threshold, densities are
per square metre, powers in watts, bandwidth in hertz.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ParameterError
from .point_process import serving_distance_pdf
from .special import gamma_fn, gauss_2f1


@dataclass(frozen=True)
class LinkParams:
    theta: float
    alpha: float
    sigma: float
    lambda_p: float
    tx_power: float = 1.0
    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise ParameterError(f"path-loss exponent must exceed 2, got {self.alpha}")
        for name in ("theta", "sigma", "lambda_p", "tx_power", "bandwidth"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")


@dataclass(frozen=True)
class CoverageResult:
    probability: float
    method: str  # "closed_form" or "monte_carlo"
    ci_halfwidth: float = 0.0
    realizations: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ParameterError(f"probability {self.probability} outside [0, 1]")
        if self.method not in ("closed_form", "monte_carlo"):
            raise ParameterError(f"unknown method {self.method!r}")
        if self.method == "closed_form" and self.ci_halfwidth != 0.0:
            raise ParameterError("closed-form results carry no confidence interval")


def interference_constant(alpha):
    """Gamma(1 + 2/alpha) * Gamma(1 - 2/alpha)."""
    if not alpha > 2:
        raise ParameterError("alpha must exceed 2")
    delta = 2.0 / alpha
    return gamma_fn(1.0 + delta) * gamma_fn(1.0 - delta)


def laplace_inter_cluster(s, lambda_p, tx_power, alpha):
    """Laplace transform of the aggregate inter-cluster interference.

    One active transmitter per remote cluster with Rayleigh fading gives
    ``exp(-pi * lambda_p * (s*P)^(2/alpha) * Gamma(1+2/alpha) Gamma(1-2/alpha))``,
    which does not depend on the cluster spread or size.  ``s`` may be an array.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ParameterError("Laplace argument must be non-negative")
    if not lambda_p > 0 or not tx_power > 0:
        raise ParameterError("lambda_p and tx_power must be positive")
    k = interference_constant(alpha)
    out = np.exp(-math.pi * lambda_p * (s_arr * tx_power) ** (2.0 / alpha) * k)
    return float(out) if out.ndim == 0 else out


def d2d_coverage(params):
    """D2D coverage for a Rayleigh(sqrt(2)*sigma) serving distance."""
    z = (math.pi * params.lambda_p * params.theta ** (2.0 / params.alpha)
         * interference_constant(params.alpha) + 1.0 / (4.0 * params.sigma ** 2))
    p = 1.0 / (4.0 * params.sigma ** 2 * z)
    return CoverageResult(p, "closed_form")


def d2d_coverage_quadrature(params):
    """Integrate L(theta r^alpha / P) f_R(r) over r numerically.

    Independent route to :func:`d2d_coverage`; it only shares the Laplace
    transform and serving-distance density.
    """
    p = params

    def integrand(r):
        s = p.theta * r ** p.alpha / p.tx_power
        return (laplace_inter_cluster(s, p.lambda_p, p.tx_power, p.alpha)
                * serving_distance_pdf(r, p.sigma))

    # split at a few sigma so quad resolves the peak before the infinite tail
    cut = 6.0 * p.sigma
    head, _ = integrate.quad(integrand, 0.0, cut, epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(integrand, cut, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return head + tail


def bs_coverage(theta, alpha):
    """Nearest-BS downlink coverage in a PPP network: 1 / 2F1(1, -d; 1-d; -theta)."""
    if not theta > 0:
        raise ParameterError("theta must be positive")
    if not alpha > 2:
        raise ParameterError("alpha must exceed 2")
    delta = 2.0 / alpha
    return CoverageResult(1.0 / gauss_2f1(1.0, -delta, 1.0 - delta, -theta), "closed_form")


def bs_coverage_integral(theta, alpha):
    """Same quantity through ``1 + theta^d * int_{theta^-d}^inf du / (1 + u^(1/d))``."""
    if not theta > 0 or not alpha > 2:
        raise ParameterError("theta must be positive and alpha > 2")
    delta = 2.0 / alpha
    val, _ = integrate.quad(lambda u: 1.0 / (1.0 + u ** (1.0 / delta)),
                            theta ** (-delta), np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return 1.0 / (1.0 + theta ** delta * val)


def avg_rate(bandwidth, theta, p_c):
    """Fixed-rate throughput W log2(1+theta) p_c in bit/s."""
    if bandwidth < 0 or theta < 0 or not 0.0 <= p_c <= 1.0:
        raise ParameterError("invalid rate inputs")
    return bandwidth * math.log2(1.0 + theta) * p_c

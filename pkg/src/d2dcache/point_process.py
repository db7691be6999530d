"""Spatial sampling of the clustered device layout and its distance laws.

Parents form a PPP, every parent carries exactly ``n`` members with i.i.d.
isotropic Gaussian offsets of per-axis standard deviation ``sigma``.  Base
stations form an independent PPP.  Distances in metres, densities per m^2.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ParameterError


def stream_rng(seed, *key):
    """Generator for the stream identified by ``key`` under a master seed.

    Streams are addressed by counters, so a realization's draws do not
    depend on how work is split between workers.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class ClusterRealization:
    center: np.ndarray   # shape (2,)
    members: np.ndarray  # shape (n, 2), offsets relative to center

    @property
    def n(self):
        return self.members.shape[0]

    def absolute(self):
        return self.center + self.members


@dataclass(frozen=True)
class NetworkRealization:
    clusters: list
    bs_points: np.ndarray
    window_radius: float
    seed: int

    def device_points(self):
        if not self.clusters:
            return np.empty((0, 2))
        return np.concatenate([c.absolute() for c in self.clusters])


def sample_ppp(density, window_radius, rng):
    """Homogeneous PPP on the disc of radius ``window_radius`` around the origin."""
    if not density > 0:
        raise ParameterError(f"density must be positive, got {density}")
    if not window_radius > 0:
        raise ParameterError(f"window radius must be positive, got {window_radius}")
    count = rng.poisson(density * math.pi * window_radius ** 2)
    rho = window_radius * np.sqrt(rng.random(count))
    phi = 2.0 * math.pi * rng.random(count)
    return np.column_stack((rho * np.cos(phi), rho * np.sin(phi)))


def sample_cluster_members(center, sigma, n, rng):
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    if int(n) != n or n < 1:
        raise ParameterError(f"a cluster needs at least one member, got n={n}")
    center = np.asarray(center, dtype=float).reshape(2)
    return ClusterRealization(center, sigma * rng.standard_normal((int(n), 2)))


def sample_network(lambda_p, n, sigma, lambda_bs, window_radius, seed):
    """One snapshot of devices and base stations inside the window."""
    rng = stream_rng(seed, 0)
    parents = sample_ppp(lambda_p, window_radius, rng)
    clusters = [sample_cluster_members(p, sigma, n, rng) for p in parents]
    bs = sample_ppp(lambda_bs, window_radius, rng)
    return NetworkRealization(clusters, bs, float(window_radius), int(seed))


def _check_sigma(sigma):
    if not sigma > 0:
        raise ParameterError("sigma must be positive")


def rayleigh_pdf(r, scale):
    r = np.asarray(r, dtype=float)
    out = r / scale ** 2 * np.exp(-r ** 2 / (2.0 * scale ** 2))
    return float(out) if out.ndim == 0 else out


def rayleigh_cdf(r, scale):
    r = np.asarray(r, dtype=float)
    out = -np.expm1(-np.maximum(r, 0.0) ** 2 / (2.0 * scale ** 2))
    return float(out) if out.ndim == 0 else out


def serving_distance_pdf(r, sigma):
    """Density of the distance between two members of the same cluster.

    The difference of two independent Gaussian offsets is Gaussian with
    per-axis variance 2 sigma^2, so the distance is Rayleigh(sqrt(2) sigma):
    ``r / (2 sigma^2) * exp(-r^2 / (4 sigma^2))``.
    """
    _check_sigma(sigma)
    if np.any(np.asarray(r) < 0):
        raise ParameterError("distance must be non-negative")
    return rayleigh_pdf(r, math.sqrt(2.0) * sigma)


def serving_distance_cdf(r, sigma):
    _check_sigma(sigma)
    return rayleigh_cdf(r, math.sqrt(2.0) * sigma)


def rice_conditional_pdf(u, v, sigma):
    """Density of the distance to a member of a cluster whose centre lies at distance ``v``.

    Rice(u | v, sigma) = u/sigma^2 exp(-(u^2 + v^2) / 2 sigma^2) I0(u v / sigma^2),
    evaluated with the exponentially scaled Bessel function to avoid overflow.
    """
    _check_sigma(sigma)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v < 0):
        raise ParameterError("distances must be non-negative")
    s2 = sigma ** 2
    out = u / s2 * np.exp(-(u - v) ** 2 / (2.0 * s2)) * special.i0e(u * v / s2)
    return float(out) if out.ndim == 0 else out

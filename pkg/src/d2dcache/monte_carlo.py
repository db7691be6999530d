"""Monte Carlo estimation of SIR statistics at a typical device.

A realization places the typical device at the origin.  Its own cluster
centre sits at a Gaussian offset ``x0``, the serving member at a further
Gaussian offset ``y0``, so the serving distance is ``|x0 + y0|``.  Remote
cluster centres form a PPP on a disc around the origin and each contributes
one active transmitter at a fresh Gaussian offset.  All links see unit-mean
Rayleigh (exponential power) fading; noise is ignored.

Realizations are generated in fixed-size chunks, chunk ``j`` drawing from
the stream ``(seed, purpose, j)``.  Results therefore do not depend on the
number of workers.
"""
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import kernels
from .config import NetworkConfig
from .coverage import CoverageResult
from .errors import ParameterError
from .point_process import serving_distance_cdf, stream_rng

log = logging.getLogger(__name__)

Z95 = 1.959963984540054
CHUNK = 2000
MIN_WINDOW_FACTOR = 20.0  # window radius >= factor / sqrt(lambda_p)

_D2D_STREAM = 1
_BS_STREAM = 2


@dataclass(frozen=True)
class McConfig:
    realizations: int
    seed: int
    network: NetworkConfig
    window_radius: float = None
    workers: int = 1
    chunk_size: int = CHUNK
    enforce_window: bool = True

    def __post_init__(self):
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ParameterError("realizations must be a positive integer")
        if self.workers < 1 or self.chunk_size < 1:
            raise ParameterError("workers and chunk_size must be positive")
        if self.window_radius is not None:
            if not self.window_radius > 0:
                raise ParameterError("window radius must be positive")
            if self.enforce_window and self.window_radius < self.min_window_radius:
                raise ParameterError(
                    f"window radius {self.window_radius:g} m is below "
                    f"{self.min_window_radius:g} m; truncated interference would bias the estimate")

    @property
    def min_window_radius(self):
        return MIN_WINDOW_FACTOR / math.sqrt(self.network.lambda_p)

    @property
    def radius(self):
        return self.window_radius if self.window_radius is not None else self.min_window_radius


@dataclass(frozen=True)
class SirSamples:
    """One entry per realization; ``interference`` is zero for empty windows."""

    sir: np.ndarray
    serving_distance: np.ndarray
    interference: np.ndarray
    signal: np.ndarray

    @property
    def realizations(self):
        return self.sir.size

    @property
    def empty_windows(self):
        return int(np.count_nonzero(self.interference == 0.0))


@dataclass(frozen=True)
class LaplaceEstimate:
    s: float
    value: float
    ci_halfwidth: float
    realizations: int

    def contains(self, x):
        return abs(x - self.value) <= self.ci_halfwidth


@dataclass(frozen=True)
class ServingDistanceSummary:
    samples: int
    mean: float
    quantiles: dict
    ks_statistic: float
    ks_pvalue: float


def assemble_sir(signal, interference):
    """SIR = received signal power / aggregate interference; inf when nothing interferes."""
    signal = np.asarray(signal, dtype=float)
    interference = np.asarray(interference, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(interference > 0, signal / np.where(interference > 0, interference, 1.0), np.inf)


def _chunks(total, size):
    return [(j, min(size, total - j * size)) for j in range(-(-total // size))]


def _map_chunks(fn, cfg):
    jobs = _chunks(cfg.realizations, cfg.chunk_size)
    if cfg.workers == 1 or len(jobs) == 1:
        return [fn(j, k) for j, k in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _d2d_chunk(cfg, index, k):
    net = cfg.network
    rng = stream_rng(cfg.seed, _D2D_STREAM, index)
    radius = cfg.radius
    counts = rng.poisson(net.lambda_p * math.pi * radius ** 2, size=k)
    x0 = net.sigma * rng.standard_normal((k, 2))
    y0 = net.sigma * rng.standard_normal((k, 2))
    g0 = rng.standard_exponential(k)
    total = int(counts.sum())
    u_rad = rng.random(total)
    u_ang = rng.random(total)
    off = rng.standard_normal((2, total))
    g = rng.standard_exponential(total)

    interference = kernels.interference_sums(counts, u_rad, u_ang, off[0], off[1], g,
                                             radius, net.sigma, net.p_d, net.alpha)
    r = np.hypot(x0[:, 0] + y0[:, 0], x0[:, 1] + y0[:, 1])
    signal = net.p_d * g0 * r ** (-net.alpha)
    return r, signal, interference


def simulate_sir(cfg):
    """Draw ``cfg.realizations`` independent SIR snapshots."""
    parts = _map_chunks(lambda j, k: _d2d_chunk(cfg, j, k), cfg)
    r = np.concatenate([p[0] for p in parts])
    signal = np.concatenate([p[1] for p in parts])
    interference = np.concatenate([p[2] for p in parts])
    samples = SirSamples(assemble_sir(signal, interference), r, interference, signal)
    if samples.empty_windows:
        log.warning("%d realizations had no interferers in the window", samples.empty_windows)
    return samples


def coverage_from_samples(samples, theta):
    """Fraction of realizations with SIR > theta and its 95% Wald half-width."""
    n = samples.realizations
    p = float(np.count_nonzero(samples.sir > theta)) / n
    half = Z95 * math.sqrt(p * (1.0 - p) / n)
    return CoverageResult(p, "monte_carlo", half, n, {"empty_windows": samples.empty_windows})


def simulate_d2d_coverage(cfg, theta):
    """Empirical D2D coverage; ``theta`` may be a sequence (common random numbers)."""
    samples = simulate_sir(cfg)
    if np.ndim(theta) == 0:
        return coverage_from_samples(samples, float(theta))
    return [coverage_from_samples(samples, float(t)) for t in theta]


def _mean_ci(values):
    n = values.size
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((values - mean) ** 2) / (n - 1)
    else:
        var = 0.0
    return mean, Z95 * math.sqrt(var / n)


def estimate_laplace(cfg, s, samples=None):
    """Sample mean of exp(-s I) over the inter-cluster interference.

    Only remote clusters contribute to ``I``; the representative cluster is
    excluded.  ``s`` may be a sequence, in which case a list is returned.
    """
    if samples is None:
        samples = simulate_sir(cfg)
    scalar = np.ndim(s) == 0
    out = []
    for sv in np.atleast_1d(np.asarray(s, dtype=float)):
        if sv < 0:
            raise ParameterError("s must be non-negative")
        if sv == 0:
            out.append(LaplaceEstimate(0.0, 1.0, 0.0, samples.realizations))
            continue
        mean, half = _mean_ci(np.exp(-sv * samples.interference))
        out.append(LaplaceEstimate(float(sv), mean, half, samples.realizations))
    return out[0] if scalar else out


def simulate_serving_distance(cfg, samples=None):
    """Compare sampled serving distances with the Rayleigh(sqrt(2) sigma) law."""
    if samples is None:
        samples = simulate_sir(cfg)
    r = samples.serving_distance
    sigma = cfg.network.sigma
    ks = stats.kstest(r, lambda x: serving_distance_cdf(x, sigma))
    qs = {q: float(np.quantile(r, q)) for q in (0.1, 0.25, 0.5, 0.75, 0.9)}
    return ServingDistanceSummary(r.size, math.fsum(r) / r.size, qs,
                                  float(ks.statistic), float(ks.pvalue))


def _bs_chunk(cfg, index, k):
    net = cfg.network
    rng = stream_rng(cfg.seed, _BS_STREAM, index)
    radius = MIN_WINDOW_FACTOR / math.sqrt(net.lambda_bs)
    interference = np.zeros(k)
    signal = np.zeros(k)
    counts = rng.poisson(net.lambda_bs * math.pi * radius ** 2, size=k)
    for i, c in enumerate(counts):
        d = radius * np.sqrt(rng.random(c))
        g = rng.standard_exponential(c)
        if c == 0:
            continue
        near = int(np.argmin(d))
        power = net.p_b * g * d ** (-net.alpha)
        signal[i] = power[near]
        interference[i] = math.fsum(power) - power[near]
    return signal, interference


def simulate_bs_coverage(cfg, theta):
    """Diagnostic: nearest-BS association in a PPP of base stations.

    Realizations without any BS in the window count as not covered.
    """
    parts = _map_chunks(lambda j, k: _bs_chunk(cfg, j, k), cfg)
    signal = np.concatenate([p[0] for p in parts])
    interference = np.concatenate([p[1] for p in parts])
    sir = np.where(signal > 0, assemble_sir(signal, interference), 0.0)
    samples = SirSamples(sir, np.zeros_like(sir), interference, signal)
    return coverage_from_samples(samples, theta)


def write_sir_csv(path, samples):
    """Raw per-realization samples for debugging."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["realization", "sir_db", "serving_distance_m", "interference_w"])
        with np.errstate(divide="ignore"):
            sir_db = 10.0 * np.log10(samples.sir)
        for i in range(samples.realizations):
            w.writerow([i, repr(float(sir_db[i])), repr(float(samples.serving_distance[i])),
                        repr(float(samples.interference[i]))])

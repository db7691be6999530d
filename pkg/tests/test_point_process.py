import math

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from d2dcache.errors import ParameterError
from d2dcache.point_process import (rayleigh_cdf, rayleigh_pdf, rice_conditional_pdf,
                                    sample_cluster_members, sample_network, sample_ppp,
                                    serving_distance_pdf, stream_rng)


@pytest.mark.parametrize("density,radius", [(0.0, 100.0), (-1e-5, 100.0), (1e-5, 0.0)])
def test_sample_ppp_rejects_degenerate_parameters(density, radius, rng):
    with pytest.raises(ParameterError):
        sample_ppp(density, radius, rng)


def test_sample_ppp_mean_count():
    rng = np.random.default_rng(3)
    counts = np.array([len(sample_ppp(50e-6, 1000.0, rng)) for _ in range(10_000)])
    mean = 50e-6 * math.pi * 1e6
    assert mean == pytest.approx(157.08, abs=0.01)
    assert abs(counts.mean() - mean) <= 3 * math.sqrt(mean / counts.size)


def test_sample_ppp_is_deterministic_per_seed():
    a = sample_ppp(1e-4, 500.0, stream_rng(9, 1))
    b = sample_ppp(1e-4, 500.0, stream_rng(9, 1))
    c = sample_ppp(1e-4, 500.0, stream_rng(9, 2))
    assert a.tobytes() == b.tobytes()
    assert a.shape != c.shape or not np.array_equal(a, c)


def test_sample_ppp_points_inside_window(rng):
    pts = sample_ppp(1e-3, 200.0, rng)
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 200.0)


def test_sub_window_counts_are_poisson():
    rng = np.random.default_rng(11)
    density, radius, sub = 50e-6, 1000.0, 300.0
    counts = []
    for _ in range(10_000):
        pts = sample_ppp(density, radius, rng)
        counts.append(np.count_nonzero(np.hypot(pts[:, 0] - 200, pts[:, 1]) <= sub))
    counts = np.array(counts)
    mean = density * math.pi * sub ** 2
    edges = np.arange(4, 26)  # pool both tails
    observed = [np.count_nonzero(counts <= edges[0])]
    expected = [stats.poisson.cdf(edges[0], mean)]
    for k in edges[1:-1]:
        observed.append(np.count_nonzero(counts == k))
        expected.append(stats.poisson.pmf(k, mean))
    observed.append(np.count_nonzero(counts >= edges[-1]))
    expected.append(stats.poisson.sf(edges[-1] - 1, mean))
    expected = np.array(expected) * counts.size
    res = stats.chisquare(observed, expected)
    assert res.pvalue > 1e-3


def test_isotropy_of_positions():
    rng = np.random.default_rng(5)
    pts = np.concatenate([sample_ppp(1e-4, 800.0, rng) for _ in range(200)])
    angles = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi) / (2 * np.pi)
    assert stats.kstest(angles, "uniform").pvalue > 0.01
    # rotated copy has the same pairwise-distance histogram
    sample = pts[:400]
    rot = np.array([[math.cos(0.7), -math.sin(0.7)], [math.sin(0.7), math.cos(0.7)]])
    d0 = np.sort(np.linalg.norm(sample[:, None] - sample[None], axis=2).ravel())
    d1 = np.sort(np.linalg.norm((sample @ rot.T)[:, None] - (sample @ rot.T)[None], axis=2).ravel())
    assert np.allclose(d0, d1, rtol=0, atol=1e-9)


def test_cluster_offsets_mean_square_norm():
    c = sample_cluster_members([1.0, -2.0], 10.0, 100_000, np.random.default_rng(2))
    sq = np.sum(c.members ** 2, axis=1)
    # E|y|^2 = 2 sigma^2, sd of |y|^2 is 2 sigma^2 as well
    assert abs(sq.mean() - 200.0) <= 3 * 200.0 / math.sqrt(sq.size)


def test_cluster_offset_norm_is_rayleigh():
    c = sample_cluster_members([0.0, 0.0], 10.0, 50_000, np.random.default_rng(4))
    r = np.hypot(c.members[:, 0], c.members[:, 1])
    assert stats.kstest(r, lambda x: rayleigh_cdf(x, 10.0)).pvalue > 0.01


def test_cluster_member_count(rng):
    assert sample_cluster_members([0, 0], 5.0, 1, rng).n == 1
    with pytest.raises(ParameterError):
        sample_cluster_members([0, 0], 5.0, 0, rng)
    with pytest.raises(ParameterError):
        sample_cluster_members([0, 0], 0.0, 3, rng)


def test_total_intensity_is_n_lambda_p():
    lam, n, sigma, window, inner = 50e-6, 10, 10.0, 1000.0, 500.0
    counts = []
    for seed in range(400):
        pts = sample_network(lam, n, sigma, 5e-6, window, seed).device_points()
        counts.append(np.count_nonzero(np.hypot(pts[:, 0], pts[:, 1]) <= inner))
    area = math.pi * inner ** 2
    mean = n * lam * area
    sd = math.sqrt(n * n * lam * area)  # cluster counts dominate the variance
    assert abs(np.mean(counts) - mean) <= 3 * sd / math.sqrt(len(counts))


def test_network_realization_reproducible():
    a = sample_network(50e-6, 4, 10.0, 5e-6, 600.0, seed=8)
    b = sample_network(50e-6, 4, 10.0, 5e-6, 600.0, seed=8)
    assert a.device_points().tobytes() == b.device_points().tobytes()
    assert a.bs_points.tobytes() == b.bs_points.tobytes()
    assert all(np.hypot(*c.center) <= 600.0 for c in a.clusters)
    assert all(c.n == 4 for c in a.clusters)


def test_serving_distance_pdf_basics():
    assert serving_distance_pdf(0.0, 10.0) == 0.0
    with pytest.raises(ParameterError):
        serving_distance_pdf(-1.0, 10.0)
    res = optimize.minimize_scalar(lambda r: -serving_distance_pdf(r, 10.0), bounds=(0, 100),
                                   method="bounded", options={"xatol": 1e-8})
    assert res.x == pytest.approx(math.sqrt(2) * 10.0, abs=1e-5)
    total, _ = integrate.quad(serving_distance_pdf, 0, 200 * 10.0, args=(10.0,),
                              points=[14.14, 50.0], limit=200, epsabs=0, epsrel=1e-13)
    assert total == pytest.approx(1.0, abs=1e-9)


def test_serving_distance_pdf_formula():
    r = np.linspace(0, 100, 11)
    assert np.allclose(serving_distance_pdf(r, 7.0), r / (2 * 49.0) * np.exp(-r ** 2 / (4 * 49.0)),
                       rtol=1e-14, atol=0)


def test_rice_reduces_to_rayleigh():
    u = np.linspace(0, 80, 33)
    assert np.allclose(rice_conditional_pdf(u, 0.0, 10.0), rayleigh_pdf(u, 10.0), rtol=1e-13, atol=0)


@pytest.mark.parametrize("v_over_sigma", [1, 5, 20])
def test_rice_normalization(v_over_sigma):
    sigma = 10.0
    v = v_over_sigma * sigma
    total, _ = integrate.quad(rice_conditional_pdf, 0, v + 40 * sigma, args=(v, sigma),
                              points=[v], limit=200, epsabs=0, epsrel=1e-13)
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("u", [2.0, 15.0, 60.0, 300.0])
def test_rice_first_moment_identity(u):
    # integrating the conditional density against v dv over all centre distances returns u
    sigma = 10.0
    val, _ = integrate.quad(lambda v: rice_conditional_pdf(u, v, sigma) * v, 0, u + 40 * sigma,
                            points=[u], limit=300, epsabs=0, epsrel=1e-12)
    assert val == pytest.approx(u, rel=1e-8)


def test_rice_rejects_negative():
    with pytest.raises(ParameterError):
        rice_conditional_pdf(-1.0, 2.0, 1.0)
    with pytest.raises(ParameterError):
        rice_conditional_pdf(1.0, -2.0, 1.0)

"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``;
the lines are repeated in the terminal summary.  All stochastic parts use the
default seed from the shipped config.
"""
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from d2dcache.cli import main as cli_main
from d2dcache.coverage import (LinkParams, bs_coverage, d2d_coverage, d2d_coverage_quadrature,
                               laplace_inter_cluster)
from d2dcache.energy import (EnergyParams, kkt_residual, solve_optimal, verify_convexity)
from d2dcache.cache_model import ContentConfig
from d2dcache.experiments import random_policy, run_fig4, run_fig5, run_validate
from d2dcache.monte_carlo import McConfig, coverage_from_samples, estimate_laplace, simulate_sir

from oracles import grid_minimum

REPORT = []
SIGMAS = (5.0, 10.0, 20.0, 40.0)
REALIZATIONS = 100_000


def record(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
    REPORT.append(line)
    print(line)
    assert passed, line


def link(net, **kw):
    net = net.with_(**kw)
    return LinkParams(net.theta, net.alpha, net.sigma, net.lambda_p, net.p_d, net.w_d)


@pytest.fixture(scope="module")
def sigma_samples(table_config):
    net, _, spec = table_config
    out = {}
    start = time.perf_counter()
    for sigma in SIGMAS:
        out[sigma] = simulate_sir(McConfig(REALIZATIONS, spec.mc.seed, net.with_(sigma=sigma)))
    return out, time.perf_counter() - start


def test_criterion_01_coverage(table_config, sigma_samples):
    net, _, _ = table_config
    samples, elapsed = sigma_samples
    analytic = d2d_coverage(link(net)).probability
    ok = abs(analytic - 0.910) <= 0.001
    errs = {}
    for sigma in SIGMAS:
        a = d2d_coverage(link(net, sigma=sigma)).probability
        errs[sigma] = abs(a - coverage_from_samples(samples[sigma], net.theta).probability)
    ok &= all(e <= 0.01 for e in errs.values())
    grid = np.linspace(2, 60, 40)
    in_sigma = [d2d_coverage(link(net, sigma=s)).probability for s in grid]
    in_theta = [d2d_coverage(link(net, theta=t)).probability for t in np.logspace(-1.5, 1.5, 40)]
    ok &= all(b < a for a, b in zip(in_sigma, in_sigma[1:]))
    ok &= all(b < a for a, b in zip(in_theta, in_theta[1:]))
    ok &= elapsed < 60
    worst = max(errs.values())
    record(1, "coverage closed form vs Monte Carlo", ok,
           f"analytic={analytic:.6f}, max |analytic-MC| over sigma {SIGMAS} = {worst:.5f}, "
           f"curve runtime {elapsed:.1f}s")


def test_criterion_02_laplace(table_config, sigma_samples):
    net, _, _ = table_config
    samples, _ = sigma_samples
    s_values = np.logspace(4, 7, 5) / net.p_d
    exact = laplace_inter_cluster(s_values, net.lambda_p, net.p_d, net.alpha)
    est = {sigma: estimate_laplace(None, s_values, samples=samples[sigma]) for sigma in (5.0, 40.0)}
    inside = {sigma: [e.contains(x) for e, x in zip(est[sigma], exact)] for sigma in est}
    overlap = [abs(a.value - b.value) <= a.ci_halfwidth + b.ci_halfwidth
               for a, b in zip(est[5.0], est[40.0])]
    misses = [f"sigma={sg:g},sP={s * net.p_d:.3g} (|dev|/ci="
              f"{abs(e.value - x) / e.ci_halfwidth:.2f})"
              for sg in est for s, e, x, ok in zip(s_values, est[sg], exact, inside[sg]) if not ok]
    ok = all(all(v) for v in inside.values()) and all(overlap)
    detail = (f"{sum(map(sum, inside.values()))}/10 estimates inside 95% CI, "
              f"{sum(overlap)}/5 sigma pairs overlap")
    if misses:
        detail += "; outside: " + ", ".join(misses)
    record(2, "Laplace transform of interference", ok, detail)


def test_criterion_03_quadrature(table_config):
    net, _, _ = table_config
    start = time.perf_counter()
    worst = 0.0
    for sigma in np.linspace(2, 50, 5):
        for theta in np.logspace(-1, 1, 5):
            p = link(net, sigma=float(sigma), theta=float(theta))
            closed = d2d_coverage(p).probability
            worst = max(worst, abs(d2d_coverage_quadrature(p) - closed) / closed)
    elapsed = time.perf_counter() - start
    record(3, "quadrature vs closed form", worst <= 1e-8 and elapsed < 10,
           f"max relative error {worst:.2e} on 5x5 grid in {elapsed:.2f}s")


def test_criterion_04_bs_coverage():
    tail, _ = integrate.quad(lambda u: 1.0 / (1.0 + u * u), 1.0, np.inf, epsabs=1e-15, epsrel=1e-13)
    oracle = 1.0 / (1.0 + tail)
    value = bs_coverage(1.0, 4.0).probability
    dev = abs(value - oracle)
    record(4, "BS coverage at 0 dB", dev <= 1e-4,
           f"p_cb={value:.10f}, integral oracle={oracle:.10f} (|diff|={dev:.1e}); "
           f"distance to the quoted 0.5602 is {abs(value - 0.5602):.2e}")


@pytest.fixture(scope="module")
def placement(table_config):
    net, content, spec = table_config
    spec = replace(spec, kind="validate_placement", sweep={"policies": 5, "draws": 100_000})
    return run_validate(net, content, spec, kinds=("validate_placement",))


def test_criterion_05_placement(placement):
    checks = [c for c in placement.checks if c.name.startswith("placement")]
    bad = [c.name for c in checks if not c.passed]
    record(5, "placement sampler", len(checks) == 10 and not bad,
           f"5 random policies x 1e5 draws, {len(checks) - len(bad)}/{len(checks)} checks pass"
           + (f"; failing {bad}" if bad else ""))


def test_criterion_06_access_split(placement):
    checks = [c for c in placement.checks if c.name.startswith("access_split")]
    bad = [c.name for c in checks if not c.passed]
    record(6, "access split closed forms", len(checks) == 3 and not bad,
           f"n in (2, 5, 10), {len(checks) - len(bad)}/{len(checks)} within 3 sigma"
           + (f"; failing {bad}" if bad else ""))


def test_criterion_07_optimizer(table_energy_params):
    p = table_energy_params
    res = solve_optimal(p, 10)
    residual = res.kkt_residual
    sum_err = abs(math.fsum(res.policy.b) - 10)
    small = ContentConfig(4, 2, 1.0)
    sp = EnergyParams(p.cost_d2d, p.cost_bs, 3, small.popularity, small.file_sizes)
    b_grid, _ = grid_minimum(sp.weights, 2, 3, sp.cost_d2d, sp.cost_bs, step=1e-3)
    small_res = solve_optimal(sp, 2)
    grid_dev = float(np.max(np.abs(small_res.policy.b - b_grid)))
    rng = np.random.default_rng(2024)
    probes = [random_policy(p.n_files, 10, rng) for _ in range(100)]
    convex = verify_convexity(p, probes, rtol=1e-5)
    independent = kkt_residual(res.policy, None, p)
    ok = residual <= 1e-9 and independent <= 1e-9 and sum_err <= 1e-9 and grid_dev <= 2e-3 and convex
    record(7, "optimizer correctness", ok,
           f"KKT residual {residual:.1e}, |sum b - M| {sum_err:.1e}, grid-search deviation "
           f"{grid_dev:.1e}, convexity/gradient probes {'ok' if convex else 'failed'}")


def test_criterion_08_dominance(table_config):
    net, content, spec = table_config
    out = run_fig4(net, content, spec.for_kind("fig4_energy_vs_beta"))
    rows = out.table.rows
    dominated = all(r["pc"] <= min(r["cpf"], r["rc"], r["zipf"]) + 1e-9 for r in rows)
    reduction = max(1 - r["pc"] / r["cpf"] for r in rows)
    record(8, "scheme dominance over beta", dominated and reduction >= 0.15,
           f"PC <= CPF, RC, Zipf at all {len(rows)} beta points: {dominated}; "
           f"max reduction vs CPF {100 * reduction:.1f}%")


def test_criterion_09_devices_per_cluster(table_config):
    net, content, spec = table_config
    start = time.perf_counter()
    out = run_fig5(net, content, spec.for_kind("fig5_energy_vs_n"))
    elapsed = time.perf_counter() - start
    pc = {r["n"]: r["pc"] for r in out.table.rows}
    values = [pc[n] for n in range(2, 21)]
    monotone = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    flat = (pc[18] - pc[20]) < (pc[2] - pc[4])
    record(9, "energy versus devices per cluster", monotone and flat and elapsed < 60,
           f"monotone {monotone}, drop 2->4 {pc[2] - pc[4]:.4f} vs 18->20 {pc[18] - pc[20]:.4f}, "
           f"{elapsed:.2f}s")


def test_criterion_10_determinism(tmp_path, capsys):
    same = {}
    for name in ("fig3", "fig4", "fig5", "validate"):
        blobs = []
        for run in ("a", "b"):
            out = tmp_path / f"{name}_{run}"
            cli_main(["experiment", name, "--out", str(out), "--seed", "1", "--mc", "2000"])
            blobs.append((out / "results.csv").read_bytes())
        same[name] = blobs[0] == blobs[1] and len(blobs[0]) > 0
    capsys.readouterr()
    record(10, "byte-identical reruns", all(same.values()),
           ", ".join(f"{k}={'identical' if v else 'DIFFERENT'}" for k, v in same.items()))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider",
                          "--rootdir", os.path.dirname(os.path.dirname(os.path.abspath(__file__)))]))

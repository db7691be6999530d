"""Command line interface.

    d2dcache coverage --sigma 10 --theta-db 0 --mc 100000
    d2dcache optimize --config cfg.json --out policy.csv
    d2dcache experiment fig4 --config cfg.json --out results/ --seed 3
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from .config import db_to_linear, load_config
from .coverage import LinkParams, avg_rate, bs_coverage, d2d_coverage
from .energy import EnergyParams, result_summary, result_to_json, solve_optimal, write_result_csv
from .errors import ConfigError, InvariantError, ParameterError
from .experiments import run_experiment
from .monte_carlo import McConfig, simulate_d2d_coverage
from .output import emit_outputs

OUT_ENV = "D2DCACHE_OUT_DIR"


def _cmd_coverage(args):
    network, _, spec = load_config(args.config)
    if args.sigma is not None:
        network = network.with_(sigma=args.sigma)
    if args.theta_db is not None:
        network = network.with_(theta=db_to_linear(args.theta_db))
    link = LinkParams(network.theta, network.alpha, network.sigma, network.lambda_p,
                      network.p_d, network.w_d)
    p_d = d2d_coverage(link).probability
    p_b = bs_coverage(network.theta, network.alpha).probability
    out = {
        "sigma_m": network.sigma,
        "theta_db": network.theta_db,
        "d2d_coverage": p_d,
        "bs_coverage": p_b,
        "d2d_rate_mbps": avg_rate(network.w_d, network.theta, p_d) / 1e6,
        "bs_rate_mbps": avg_rate(network.w_b, network.theta, p_b) / 1e6,
    }
    if args.mc:
        seed = args.seed if args.seed is not None else spec.mc.seed
        mc = simulate_d2d_coverage(McConfig(args.mc, seed, network, workers=args.workers),
                                   network.theta)
        out.update(mc_coverage=mc.probability, mc_ci_halfwidth=mc.ci_halfwidth,
                   mc_realizations=mc.realizations, seed=seed)
    print(json.dumps(out, indent=2))
    return 0


def _cmd_optimize(args):
    network, content, _ = load_config(args.config)
    params = EnergyParams.from_config(network, content)
    result = solve_optimal(params, content.cache_size)
    if args.out:
        write_result_csv(result, params, args.out)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(result_to_json(result, params) + "\n")
    print(json.dumps(result_summary(result, params), indent=2))
    return 0


def _cmd_experiment(args):
    network, content, spec = load_config(args.config)
    mc = spec.mc
    if args.seed is not None:
        mc = replace(mc, seed=args.seed)
    if args.mc is not None:
        mc = replace(mc, realizations=args.mc)
    if args.workers is not None:
        mc = replace(mc, workers=args.workers)
    spec = replace(spec, mc=mc)
    out_dir = args.out or os.environ.get(OUT_ENV) or os.path.join("out", args.name)
    outcome = run_experiment(args.name, network, content, spec)
    paths = emit_outputs(outcome.table, out_dir)
    with open(os.path.join(out_dir, "checks.json"), "w") as fh:
        json.dump([c.as_dict() for c in outcome.checks], fh, indent=2)
        fh.write("\n")
    for p in paths:
        print(p)
    if not outcome.passed:
        json.dump({"failures": outcome.failures()}, sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 1
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="d2dcache", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="D2D and BS coverage probabilities and rates")
    p.add_argument("--config", help="JSON config (defaults to the parameter table)")
    p.add_argument("--sigma", type=float, help="displacement std. dev. [m]")
    p.add_argument("--theta-db", type=float, help="SIR threshold [dB]")
    p.add_argument("--mc", type=int, default=0, metavar="N", help="also run N Monte Carlo realizations")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("optimize", help="energy-optimal caching distribution")
    p.add_argument("--config", help="JSON config (defaults to the parameter table)")
    p.add_argument("--out", help="write file_index,b_star CSV here")
    p.add_argument("--json", help="write the full result as JSON here")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("experiment", help="reproduce a figure or run validation suites")
    p.add_argument("name", choices=["fig3", "fig4", "fig5", "validate",
                                    "validate_coverage", "validate_laplace", "validate_placement"])
    p.add_argument("--config", help="JSON config (defaults to the parameter table)")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or out/<name>)")
    p.add_argument("--seed", type=int)
    p.add_argument("--mc", type=int, metavar="N", help="override Monte Carlo realizations")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvariantError, ParameterError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc),
                   "path": getattr(exc, "path", None)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Configuration objects and the JSON config loader.

Config files use the units of the parameter table (clusters/km^2, dBm, MHz,
dB); everything is converted to SI / linear scale here and nowhere else.
"""
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .cache_model import ContentConfig
from .errors import ConfigError, InvariantError

EXPERIMENT_KINDS = (
    "fig3_coverage_vs_sigma",
    "fig4_energy_vs_beta",
    "fig5_energy_vs_n",
    "validate_coverage",
    "validate_laplace",
    "validate_placement",
)
SCHEMES = ("PC", "CPF", "RC", "Zipf")


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(w):
    return 10.0 * math.log10(w) + 30.0


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class NetworkConfig:
    """Physical-layer and geometry parameters in SI units."""

    lambda_p: float = 50e-6    # cluster centres per m^2
    n: int = 10                # devices per cluster
    sigma: float = 10.0        # m
    lambda_bs: float = 5e-6    # BSs per m^2
    p_d: float = dbm_to_watt(23.0)
    p_b: float = dbm_to_watt(43.0)
    w_d: float = 20e6          # Hz
    w_b: float = 20e6          # Hz
    theta: float = 1.0         # linear SIR threshold
    alpha: float = 4.0

    def __post_init__(self):
        for name in ("lambda_p", "sigma", "lambda_bs", "p_d", "p_b", "w_d", "w_b", "theta"):
            if not getattr(self, name) > 0:
                raise InvariantError(f"{name} must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise InvariantError("n must be a positive integer")
        if not self.alpha > 2:
            raise InvariantError("alpha must exceed 2")

    @property
    def theta_db(self):
        return linear_to_db(self.theta)

    def with_(self, **changes):
        return replace(self, **changes)

    def table_units(self):
        """Parameters in config-file units, for echoing into result rows."""
        return {
            "lambda_p_per_km2": self.lambda_p * 1e6,
            "n": int(self.n),
            "sigma_m": self.sigma,
            "lambda_bs_per_km2": self.lambda_bs * 1e6,
            "p_d_dbm": watt_to_dbm(self.p_d),
            "p_b_dbm": watt_to_dbm(self.p_b),
            "w_d_mhz": self.w_d / 1e6,
            "w_b_mhz": self.w_b / 1e6,
            "theta_db": self.theta_db,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class McSpec:
    realizations: int = 100_000
    seed: int = 1
    window_radius_m: float = None
    workers: int = 1


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str = "fig3_coverage_vs_sigma"
    sweep: dict = field(default_factory=dict)
    schemes: tuple = SCHEMES
    mc: McSpec = McSpec()

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise InvariantError(f"unknown experiment kind {self.kind!r}")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise InvariantError(f"schemes must be a non-empty subset of {SCHEMES}")
        for key, values in self.sweep.items():
            if not np.isscalar(values) and len(values) == 0:
                raise InvariantError(f"sweep {key!r} is empty")

    def for_kind(self, kind):
        """Same run settings for another experiment; its own sweep applies only if kinds match."""
        if kind == self.kind:
            return self
        return replace(self, kind=kind, sweep={})


# config key -> (attribute, converter to SI)
_NETWORK_FIELDS = {
    "lambda_p_per_km2": ("lambda_p", lambda v: v / 1e6),
    "n": ("n", int),
    "sigma_m": ("sigma", float),
    "lambda_bs_per_km2": ("lambda_bs", lambda v: v / 1e6),
    "p_d_dbm": ("p_d", dbm_to_watt),
    "p_b_dbm": ("p_b", dbm_to_watt),
    "w_d_mhz": ("w_d", lambda v: v * 1e6),
    "w_b_mhz": ("w_b", lambda v: v * 1e6),
    "theta_db": ("theta", db_to_linear),
    "alpha": ("alpha", float),
}
_CONTENT_FIELDS = ("n_files", "cache_size", "zipf_beta", "mean_file_size_mbits", "file_sizes_mbits")
_EXPERIMENT_FIELDS = ("kind", "sweep", "schemes", "mc")
_MC_FIELDS = ("realizations", "seed", "window_radius_m", "workers")
_SWEEP_KEYS = {
    "fig3_coverage_vs_sigma": ("sigma_m", "theta_db"),
    "fig4_energy_vs_beta": ("beta",),
    "fig5_energy_vs_n": ("n",),
    "validate_coverage": ("sigma_m",),
    "validate_laplace": ("s_times_p_d", "sigma_m"),
    "validate_placement": ("policies", "draws"),
}


def _number(obj, key, path, integer=False):
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing field")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return int(v) if integer else float(v)


def _reject_unknown(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown field")


def parse_network(obj, path="network"):
    _reject_unknown(obj, _NETWORK_FIELDS, path)
    kwargs = {}
    for key, (attr, conv) in _NETWORK_FIELDS.items():
        v = _number(obj, key, path, integer=(key == "n"))
        if key == "alpha" and not v > 2:
            raise ConfigError(f"{path}.{key}", "path-loss exponent must exceed 2")
        if key not in ("theta_db", "p_d_dbm", "p_b_dbm") and not v > 0:
            raise ConfigError(f"{path}.{key}", "must be positive")
        kwargs[attr] = conv(v)
    return NetworkConfig(**kwargs)


def parse_content(obj, path="content"):
    _reject_unknown(obj, _CONTENT_FIELDS, path)
    n_files = _number(obj, "n_files", path, integer=True)
    cache = _number(obj, "cache_size", path, integer=True)
    beta = _number(obj, "zipf_beta", path)
    if not 1 <= cache < n_files:
        raise ConfigError(f"{path}.cache_size", f"need 1 <= cache_size < n_files ({n_files})")
    if beta < 0:
        raise ConfigError(f"{path}.zipf_beta", "must be non-negative")
    if "file_sizes_mbits" in obj:
        sizes = obj["file_sizes_mbits"]
        if not isinstance(sizes, list) or len(sizes) != n_files:
            raise ConfigError(f"{path}.file_sizes_mbits", f"expected a list of {n_files} sizes")
        try:
            sizes = np.array(sizes, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}.file_sizes_mbits", "sizes must be numbers") from None
        if np.any(~np.isfinite(sizes)) or np.any(sizes <= 0):
            raise ConfigError(f"{path}.file_sizes_mbits", "sizes must be positive")
    else:
        mean = _number(obj, "mean_file_size_mbits", path)
        if not mean > 0:
            raise ConfigError(f"{path}.mean_file_size_mbits", "must be positive")
        sizes = np.full(n_files, mean)
    return ContentConfig(n_files, cache, beta, sizes)


def parse_experiment(obj, path="experiment"):
    _reject_unknown(obj, _EXPERIMENT_FIELDS, path)
    kind = obj.get("kind", "fig3_coverage_vs_sigma")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"{path}.kind", f"must be one of {EXPERIMENT_KINDS}")
    sweep = obj.get("sweep", {})
    _reject_unknown(sweep, _SWEEP_KEYS[kind], f"{path}.sweep")
    for key, values in sweep.items():
        if isinstance(values, (int, float)) and not isinstance(values, bool):
            continue
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}.sweep.{key}", "expected a non-empty list")
    schemes = tuple(obj.get("schemes", SCHEMES))
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"{path}.schemes", f"unknown scheme {s!r}")
    mc_obj = obj.get("mc", {})
    _reject_unknown(mc_obj, _MC_FIELDS, f"{path}.mc")
    mc = McSpec()
    if "realizations" in mc_obj:
        r = _number(mc_obj, "realizations", f"{path}.mc", integer=True)
        if r < 1:
            raise ConfigError(f"{path}.mc.realizations", "must be >= 1")
        mc = replace(mc, realizations=r)
    if "seed" in mc_obj:
        mc = replace(mc, seed=_number(mc_obj, "seed", f"{path}.mc", integer=True))
    if mc_obj.get("window_radius_m") is not None:
        w = _number(mc_obj, "window_radius_m", f"{path}.mc")
        if not w > 0:
            raise ConfigError(f"{path}.mc.window_radius_m", "must be positive")
        mc = replace(mc, window_radius_m=w)
    if "workers" in mc_obj:
        k = _number(mc_obj, "workers", f"{path}.mc", integer=True)
        if k < 1:
            raise ConfigError(f"{path}.mc.workers", "must be >= 1")
        mc = replace(mc, workers=k)
    return ExperimentSpec(kind, dict(sweep), schemes, mc)


def parse_config(data):
    _reject_unknown(data, ("network", "content", "experiment"), "$")
    for section in ("network", "content"):
        if section not in data:
            raise ConfigError(f"$.{section}", "missing section")
    return (parse_network(data["network"], "$.network"),
            parse_content(data["content"], "$.content"),
            parse_experiment(data.get("experiment", {}), "$.experiment"))


def load_config(path=None):
    """Read a JSON config file; ``None`` loads the shipped parameter-table defaults."""
    if path is None:
        text = resources.files("d2dcache").joinpath("defaults.json").read_text()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_config(data)

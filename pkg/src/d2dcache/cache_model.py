"""Content popularity, probabilistic cache placement and baseline policies.

File indices are 0-based in arrays; CSV files and user-facing tables use
1-based file ranks (file 1 is the most popular).
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ParameterError

SUM_TOL = 1e-9


@dataclass(frozen=True)
class ContentConfig:
    n_files: int
    cache_size: int
    zipf_beta: float = 1.0
    file_sizes: np.ndarray = None  # Mbits per file

    def __post_init__(self):
        if int(self.n_files) != self.n_files or int(self.cache_size) != self.cache_size:
            raise InvariantError("n_files and cache_size must be integers")
        if not 1 <= self.cache_size < self.n_files:
            raise InvariantError(f"need 1 <= M < N_f, got M={self.cache_size}, N_f={self.n_files}")
        if self.zipf_beta < 0:
            raise InvariantError("zipf_beta must be non-negative")
        sizes = self.file_sizes
        if sizes is None:
            sizes = np.full(int(self.n_files), 100.0)
        sizes = np.asarray(sizes, dtype=float)
        if sizes.shape != (int(self.n_files),):
            raise InvariantError(f"expected {self.n_files} file sizes, got {sizes.shape}")
        if np.any(sizes <= 0):
            raise InvariantError("file sizes must be positive")
        object.__setattr__(self, "file_sizes", sizes)

    @property
    def popularity(self):
        return zipf_popularity(self.n_files, self.zipf_beta)


@dataclass(frozen=True)
class CachingPolicy:
    """Per-file caching probabilities ``b`` with ``sum(b) == M``."""

    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or b.size == 0:
            raise InvariantError("caching policy must be a non-empty vector")
        if np.any(b < -SUM_TOL) or np.any(b > 1 + SUM_TOL):
            raise InvariantError("caching probabilities must lie in [0, 1]")
        total = b.sum()
        if abs(total - round(total)) > SUM_TOL or round(total) < 1:
            raise InvariantError(f"caching probabilities must sum to a cache size, got {total!r}")
        object.__setattr__(self, "b", np.clip(b, 0.0, 1.0))

    @property
    def cache_size(self):
        return int(round(self.b.sum()))

    @property
    def n_files(self):
        return self.b.size

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["file_index", "b"])
            for i, v in enumerate(self.b, start=1):
                w.writerow([i, repr(float(v))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        idx = [int(r["file_index"]) for r in rows]
        if idx != list(range(1, len(rows) + 1)):
            raise InvariantError("file_index column must be 1..N_f in order")
        return cls(np.array([float(r["b"]) for r in rows]))


@dataclass(frozen=True)
class AccessSplit:
    p_self: np.ndarray
    p_d2d: np.ndarray
    p_bs: np.ndarray


def zipf_popularity(n_files, beta):
    """Request probabilities q_i proportional to i^-beta, i = 1..n_files."""
    if int(n_files) != n_files or n_files < 1:
        raise ParameterError("n_files must be a positive integer")
    if beta < 0:
        raise ParameterError("beta must be non-negative")
    w = np.arange(1, int(n_files) + 1, dtype=float) ** (-float(beta))
    return w / w.sum()


def _block_edges(b):
    # cumulative segment ends; ends within rounding of a block boundary are
    # snapped onto it so fully cached files own exactly one unit block
    edges = np.cumsum(b)
    m = round(edges[-1])
    near = np.abs(edges - np.round(edges)) <= SUM_TOL
    edges[near] = np.round(edges[near])
    edges[-1] = m
    return edges, int(m)


def _distinct(picks, n_files):
    # rounding can still let two consecutive points hit the same segment;
    # push later picks forward so every row is strictly increasing in range
    m = picks.shape[-1]
    shift = np.arange(m)
    q = np.maximum.accumulate(picks - shift, axis=-1)
    return np.minimum(q, n_files - m) + shift


def place_files(policy, rng=None, u=None):
    """Draw the set of cached files for one device.

    The probabilities are laid end to end over ``M`` unit blocks; one uniform
    ``u`` is drawn and in every block ``k`` the file whose segment covers
    ``k + u`` is cached.  Returns ``M`` distinct, sorted 0-based indices.
    """
    if not isinstance(policy, CachingPolicy):
        policy = CachingPolicy(policy)
    if u is None:
        if rng is None:
            raise ParameterError("need either rng or u")
        u = rng.random()
    if not 0.0 <= u < 1.0:
        raise ParameterError("u must lie in [0, 1)")
    edges, m = _block_edges(policy.b)
    picks = np.searchsorted(edges, np.arange(m) + u, side="right")
    return _distinct(picks, policy.n_files)


def place_files_batch(policy, rng, draws):
    """``draws`` independent placements, shape ``(draws, M)``."""
    if not isinstance(policy, CachingPolicy):
        policy = CachingPolicy(policy)
    edges, m = _block_edges(policy.b)
    u = rng.random(int(draws))
    points = u[:, None] + np.arange(m)[None, :]
    picks = np.searchsorted(edges, points, side="right")
    return _distinct(picks, policy.n_files)


def access_split(policy, n):
    """Self / D2D / BS retrieval probabilities per file for clusters of ``n`` devices."""
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    b = policy.b if isinstance(policy, CachingPolicy) else np.asarray(policy, dtype=float)
    miss_all = (1.0 - b) ** int(n)
    return AccessSplit(b.copy(), (1.0 - b) - miss_all, miss_all)


def simulate_access(policy, n, trials, rng):
    """Empirical self/D2D/BS frequencies from sampled cluster caches.

    Each trial fills ``n`` independent device caches with :func:`place_files`
    and resolves a request for every file at device 0.
    """
    if not isinstance(policy, CachingPolicy):
        policy = CachingPolicy(policy)
    n, trials = int(n), int(trials)
    nf = policy.n_files
    hits_self = np.zeros(nf, dtype=np.int64)
    hits_d2d = np.zeros(nf, dtype=np.int64)
    batch = 4096
    done = 0
    while done < trials:
        k = min(batch, trials - done)
        caches = place_files_batch(policy, rng, k * n).reshape(k, n, -1)
        held = np.zeros((k, n, nf), dtype=bool)
        np.put_along_axis(held, caches, True, axis=2)
        own = held[:, 0, :]
        others = held[:, 1:, :].any(axis=1)
        hits_self += own.sum(axis=0)
        hits_d2d += (~own & others).sum(axis=0)
        done += k
    p_self = hits_self / trials
    p_d2d = hits_d2d / trials
    return AccessSplit(p_self, p_d2d, 1.0 - p_self - p_d2d)


def baseline_cpf(content):
    """Cache the M most popular files everywhere."""
    b = np.zeros(content.n_files)
    b[: content.cache_size] = 1.0
    return CachingPolicy(b)


def baseline_rc(content):
    """Uniform caching, b_i = M / N_f, regardless of popularity."""
    return CachingPolicy(np.full(content.n_files, content.cache_size / content.n_files))


def capped_proportional(weights, total):
    """Scale ``weights`` to sum to ``total`` with every entry capped at 1.

    Mass above the cap is handed back to the uncapped entries in proportion
    to their weights, repeated until nothing exceeds 1.
    """
    w = np.asarray(weights, dtype=float)
    if total > np.count_nonzero(w > 0):
        raise ParameterError("not enough positive weights to hold the total")
    b = np.zeros_like(w)
    capped = np.zeros(w.shape, dtype=bool)
    while True:
        free = ~capped
        remaining = total - capped.sum()
        b[free] = remaining * w[free] / w[free].sum()
        over = free & (b > 1.0)
        if not over.any():
            break
        capped |= over
        b[capped] = 1.0
    return b


def baseline_zipf(content):
    """b_i proportional to popularity, clipped at 1 with redistribution."""
    return CachingPolicy(capped_proportional(content.popularity, content.cache_size))

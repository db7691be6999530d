"""Backend selection for the hot Monte Carlo kernels.

The compiled extension (``d2dcache._kernels``) is used when it was built;
otherwise the numpy fallback runs.  Set ``D2DCACHE_PURE_PYTHON=1`` to force
the fallback.
"""
import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if os.environ.get("D2DCACHE_PURE_PYTHON", "").strip() not in ("", "0"):
    _active = _kernels_py
else:
    _active = _compiled if _compiled is not None else _kernels_py

BACKEND = "compiled" if _active is _compiled else "python"


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.append("compiled")
    return names


def interference_sums(counts, u_rad, u_ang, off_x, off_y, fading,
                      window_radius, sigma, tx_power, alpha, backend=None):
    """Per-realization aggregate interference power.

    Realization ``i`` owns the next ``counts[i]`` entries of the flat
    per-interferer arrays.  Interferer ``k`` sits at the parent location
    ``window_radius * sqrt(u_rad[k])`` at angle ``2*pi*u_ang[k]``, displaced
    by ``sigma * (off_x[k], off_y[k])``, and contributes
    ``tx_power * fading[k] * d**-alpha``.  Sums use Neumaier compensation.
    """
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    arrays = [np.ascontiguousarray(a, dtype=np.float64)
              for a in (u_rad, u_ang, off_x, off_y, fading)]
    total = int(counts.sum())
    if counts.size and counts.min() < 0:
        raise ValueError("negative interferer count")
    for a in arrays:
        if a.shape != (total,):
            raise ValueError(f"expected {total} interferer entries, got {a.shape}")

    if backend is None:
        impl = _active
    elif backend == "python":
        impl = _kernels_py
    elif backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        impl = _compiled
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return impl.interference_sums(counts, *arrays, float(window_radius),
                                  float(sigma), float(tx_power), float(alpha))

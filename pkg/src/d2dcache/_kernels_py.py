"""Pure numpy version of the compiled kernels (used when the extension is absent)."""
import numpy as np


def interference_sums(counts, u_rad, u_ang, off_x, off_y, fading,
                      window_radius, sigma, tx_power, alpha):
    counts = np.asarray(counts, dtype=np.int64)
    n_real = counts.shape[0]
    if n_real == 0:
        return np.empty(0)

    rho = window_radius * np.sqrt(u_rad)
    phi = (2.0 * np.pi) * u_ang
    x = rho * np.cos(phi) + sigma * off_x
    y = rho * np.sin(phi) + sigma * off_y
    d2 = x * x + y * y
    with np.errstate(divide="ignore"):
        if alpha == 4.0:
            terms = tx_power * fading / (d2 * d2)
        else:
            terms = tx_power * fading * np.power(d2, -0.5 * alpha)

    # pad to a (realization, interferer) grid so Neumaier runs column-wise;
    # zero padding leaves both the sum and the compensation untouched
    width = int(counts.max()) if n_real else 0
    grid = np.zeros((n_real, width))
    rows = np.repeat(np.arange(n_real), counts)
    starts = np.cumsum(counts) - counts
    cols = np.arange(terms.shape[0]) - np.repeat(starts, counts)
    grid[rows, cols] = terms

    s = np.zeros(n_real)
    c = np.zeros(n_real)
    for j in range(width):
        term = grid[:, j]
        t = s + term
        big = np.abs(s) >= np.abs(term)
        c += np.where(big, (s - t) + term, (term - t) + s)
        s = t
    return s + c

"""Special functions needed by the Monte Carlo validation layer.

Only the regularized lower incomplete gamma is needed (for chi-square
probability transforms), so it is implemented directly: a power series on
x < s + 1 and a modified Lentz continued fraction elsewhere.  Both iterate
to near machine precision, comfortably past the 1e-10 the callers require.
"""

import math

import numpy as np

_TINY = 1e-300
_EPS = 1e-16
_MAX_ITER = 600


def _lower_series(s: float, x: np.ndarray) -> np.ndarray:
    """P(s, x) for x < s + 1 via the ascending series."""
    out = np.zeros_like(x)
    active = x > 0
    if not active.any():
        return out
    xa = x[active]
    term = np.full_like(xa, 1.0 / s)
    total = term.copy()
    denom = s
    for _ in range(_MAX_ITER):
        denom += 1.0
        term = term * xa / denom
        total += term
        if np.all(term <= total * _EPS):
            break
    log_front = s * np.log(xa) - xa - math.lgamma(s)
    out[active] = total * np.exp(log_front)
    return out


def _upper_contfrac(s: float, x: np.ndarray) -> np.ndarray:
    """Q(s, x) for x >= s + 1 via modified Lentz."""
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d[np.abs(d) < _TINY] = _TINY
        c = b + an / c
        c[np.abs(c) < _TINY] = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            break
    log_front = s * np.log(x) - x - math.lgamma(s)
    return np.exp(log_front) * h


def gammainc_lower_reg(s: float, x) -> np.ndarray:
    """Regularized lower incomplete gamma P(s, x), elementwise over x."""
    if s <= 0:
        raise ValueError(f"shape parameter must be positive, got {s!r}")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise ValueError("incomplete gamma requires x >= 0")
    out = np.empty_like(x)
    small = x < s + 1.0
    out[small] = _lower_series(s, x[small])
    if np.any(~small):
        out[~small] = 1.0 - _upper_contfrac(s, x[~small])
    np.clip(out, 0.0, 1.0, out=out)
    return out[0] if scalar else out


def chi2_cdf(x, df: float) -> np.ndarray:
    """CDF of the chi-square distribution with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")
    x = np.asarray(x, dtype=float)
    clipped = np.maximum(x, 0.0)
    return gammainc_lower_reg(0.5 * df, 0.5 * clipped)


def ks_uniform_distance(values) -> float:
    """Kolmogorov-Smirnov distance between a sample and Uniform(0, 1).

    `values` are probability-transformed draws; the statistic is the usual
    sup-distance between their empirical CDF and the identity.
    """
    u = np.sort(np.asarray(values, dtype=float))
    n = u.size
    if n == 0:
        raise ValueError("KS distance needs at least one value")
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - u)
    d_minus = np.max(u - (grid - 1.0 / n))
    return float(max(d_plus, d_minus))

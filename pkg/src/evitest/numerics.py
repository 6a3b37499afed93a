"""Distribution functions, quantiles and order-statistic helpers.

Everything here is a pure function. Scalar inputs return Python floats,
array inputs return ndarrays, so the samplers in :mod:`evitest.simulate`
can call the same functions on whole columns.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ParameterError

SQRT_PI = math.sqrt(math.pi)


def _out(x, scalar):
    return float(x) if scalar else x


def _check_df(df):
    if not np.all(np.asarray(df) > 0) or np.any(np.isnan(df)):
        raise ParameterError(f"degrees of freedom must be > 0, got {df!r}")


def _check_open_unit(u, name="u"):
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ParameterError(f"{name} must lie strictly inside (0, 1), got {u!r}")
    return arr


@dataclass(frozen=True)
class TopOrderStats:
    values: np.ndarray  # X_{n,n}, X_{n-1,n}, ..., X_{n-k,n}
    k: int
    n: int

    @property
    def threshold(self):
        return float(self.values[-1])


def top_order_statistics(sample, k):
    """Return the ``k + 1`` largest values of `sample` in weakly descending order."""
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ParameterError("empty sample")
    k = int(k)
    if k < 1 or k >= n:
        raise ParameterError(f"k must satisfy 1 <= k <= n-1 (n={n}), got {k}")
    top = np.partition(x, n - k - 1)[n - k - 1:]
    return TopOrderStats(values=np.sort(top)[::-1].copy(), k=k, n=n)


def student_t_cdf(x, df):
    """Student-t distribution function for real (possibly non-integer) df."""
    _check_df(df)
    scalar = np.ndim(x) == 0 and np.ndim(df) == 0
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)):
        raise ParameterError("student_t_cdf: x is NaN")
    return _out(special.stdtr(df, xa), scalar)


def student_t_sf(x, df):
    """Upper tail 1 - F(x), accurate far into the right tail."""
    _check_df(df)
    scalar = np.ndim(x) == 0 and np.ndim(df) == 0
    return _out(special.stdtr(df, -np.asarray(x, dtype=float)), scalar)


def student_t_quantile(u, df):
    _check_df(df)
    scalar = np.ndim(u) == 0 and np.ndim(df) == 0
    ua = _check_open_unit(u)
    return _out(special.stdtrit(df, ua), scalar)


def cauchy_sf(x):
    """1 - St_1(x) evaluated as atan2(1, x)/pi; no cancellation for large x."""
    scalar = np.ndim(x) == 0
    return _out(np.arctan2(1.0, np.asarray(x, dtype=float)) / np.pi, scalar)


def chi_square_quantile(u, df):
    if int(df) != df or df < 1:
        raise ParameterError(f"chi-square df must be a positive integer, got {df!r}")
    ua = _check_open_unit(u)
    return _out(special.chdtri(df, 1.0 - ua), np.ndim(u) == 0)


def chi_square_sf(x, df):
    if df < 1:
        raise ParameterError(f"chi-square df must be >= 1, got {df!r}")
    return float(special.chdtrc(df, max(float(x), 0.0)))


def normal_quantile(u):
    ua = _check_open_unit(u)
    return _out(special.ndtri(ua), np.ndim(u) == 0)


def frechet1_cdf(x):
    """exp(-1/x) for x > 0 and 0 otherwise."""
    scalar = np.ndim(x) == 0
    xa = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(xa > 0, np.exp(-1.0 / np.where(xa > 0, xa, 1.0)), 0.0)
    return _out(out, scalar)


def frechet1_sf(x):
    """1 - exp(-1/x) via expm1 so the upper tail keeps full precision."""
    scalar = np.ndim(x) == 0
    xa = np.asarray(x, dtype=float)
    out = np.where(xa > 0, -np.expm1(-1.0 / np.where(xa > 0, xa, 1.0)), 1.0)
    return _out(out, scalar)


def frechet1_quantile(u):
    ua = _check_open_unit(u)
    return _out(-1.0 / np.log(ua), np.ndim(u) == 0)


def gumbel_limit_cdf(x):
    """Limit law of the normalized max statistic: exp(-exp(-x/2)/sqrt(pi))."""
    return math.exp(-math.exp(-x / 2.0) / SQRT_PI) if x > -1400 else 0.0


def gumbel_limit_sf(x):
    """1 - gumbel_limit_cdf(x), computed with expm1 to keep small p-values exact."""
    if x < -1400:
        return 1.0
    return -math.expm1(-math.exp(-x / 2.0) / SQRT_PI)


def gumbel_test_quantile(alpha):
    """Critical value q_alpha, the (1 - alpha) quantile of the limit law."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    return -math.log(math.pi) - 2.0 * math.log(-math.log1p(-alpha))

"""Per-dimension Hill estimation of the extreme value index."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, ParameterError
from .numerics import normal_quantile


@dataclass(frozen=True)
class KChoice:
    """Number of upper order statistics used in each dimension."""

    per_dim: tuple
    n: int

    def __post_init__(self):
        ks = tuple(int(k) for k in self.per_dim)
        if not ks:
            raise ParameterError("KChoice needs at least one dimension")
        for j, k in enumerate(ks):
            if k < 1 or k > self.n - 1:
                raise ParameterError(
                    f"k for dimension {j} must satisfy 1 <= k <= n-1 (n={self.n}), got {k}")
        object.__setattr__(self, "per_dim", ks)

    @classmethod
    def uniform(cls, k, p, n):
        return cls((int(k),) * int(p), int(n))

    @property
    def p(self):
        return len(self.per_dim)

    @property
    def is_uniform(self):
        return len(set(self.per_dim)) == 1

    def as_array(self):
        return np.asarray(self.per_dim, dtype=float)


@dataclass(frozen=True)
class HillEstimates:
    gamma_hat: np.ndarray
    k_choice: KChoice
    thresholds: np.ndarray
    notes: tuple = field(default=())

    @property
    def p(self):
        return self.gamma_hat.size

    @property
    def degenerate(self):
        """Indices of dimensions whose estimate is exactly zero (ties at the top)."""
        return tuple(int(j) for j in np.flatnonzero(self.gamma_hat == 0.0))


def _hill_from_top(top_desc, k):
    # top_desc[0..k-1] are X_{n,n}..X_{n-k+1,n}, top_desc[k] = X_{n-k,n}.
    # add.accumulate is strictly sequential (i = 1..k), unlike np.sum whose
    # order depends on array layout; scalar and matrix paths must agree exactly.
    block = top_desc.reshape(k + 1, -1)
    thr = block[k]
    g = np.add.accumulate(np.log(block[:k] / thr), axis=0)[-1] / k
    if top_desc.ndim == 1:
        return g[0], thr[0]
    return g, thr


def hill_estimate(sample, k):
    """Hill estimator from the top `k` order statistics.

    Returns ``(gamma_hat, threshold)`` where threshold is ``X_{n-k,n}``.
    Only the top ``k + 1`` values need to be positive.
    """
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    k = int(k)
    if n < 2 or k < 1 or k > n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= n-1 (n={n}), got {k}")
    top = np.sort(np.partition(x, n - k - 1)[n - k - 1:])[::-1]
    if not top[k] > 0:
        raise DomainError("Hill undefined: non-positive tail threshold")
    g, thr = _hill_from_top(top, k)
    return float(g), float(thr)


def hill_estimates(data, ks):
    """Column-wise Hill estimates for an ``n x p`` data matrix."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ParameterError("data must be a 2-D n x p array")
    n, p = data.shape
    if ks.n != n or ks.p != p:
        raise ParameterError(
            f"KChoice is for n={ks.n}, p={ks.p} but data is {n} x {p}")
    if ks.is_uniform:
        k = ks.per_dim[0]
        top = np.partition(data, n - k - 1, axis=0)[n - k - 1:]
        top = np.sort(top, axis=0)[::-1]
        bad = np.flatnonzero(~(top[k] > 0))
        if bad.size:
            raise DomainError(
                f"Hill undefined: non-positive tail threshold in dimension {int(bad[0])}")
        gamma, thr = _hill_from_top(top, k)
    else:
        gamma = np.empty(p)
        thr = np.empty(p)
        for j, k in enumerate(ks.per_dim):
            try:
                gamma[j], thr[j] = hill_estimate(data[:, j], k)
            except DomainError as exc:
                raise DomainError(f"{exc} in dimension {j}") from None
    notes = ()
    if any(k < math.log(p) ** 2 for k in ks.per_dim) and p > 1:
        notes = (f"k below log(p)^2 = {math.log(p) ** 2:.1f}; the Gumbel calibration may be poor",)
    return HillEstimates(np.asarray(gamma, dtype=float), ks, np.asarray(thr, dtype=float), notes)


def hill_confidence_interval(gamma_hat, k, level=0.95):
    """Normal-approximation interval gamma_hat * (1 -/+ z / sqrt(k))."""
    if not 0.0 < level < 1.0:
        raise ParameterError(f"level must lie in (0, 1), got {level!r}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    half = normal_quantile((1.0 + level) / 2.0) / math.sqrt(k)
    return gamma_hat * (1.0 - half), gamma_hat * (1.0 + half)

"""Max-type tests of H0 (indices equal a given vector) and H0* (all indices equal).

The statistic is the largest squared standardized deviation of the Hill
estimates, calibrated against the Gumbel-type limit
``P(T - 2 log p + log log p <= x) -> exp(-exp(-x/2) / sqrt(pi))``.
"""

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np

from .errors import DomainError, ParameterError
from .hill import HillEstimates, KChoice, hill_estimates
from .numerics import gumbel_limit_sf, gumbel_test_quantile


@dataclass(frozen=True)
class NullSpec:
    """Either ``NullSpec.specified(gamma0)`` or ``NullSpec.equal()``."""

    gamma0: Optional[tuple] = None

    def __post_init__(self):
        if self.gamma0 is not None:
            g = tuple(float(v) for v in self.gamma0)
            if not g:
                raise ParameterError("gamma0 must be non-empty")
            if not all(v > 0 and math.isfinite(v) for v in g):
                raise ParameterError("gamma0 entries must be finite and > 0")
            object.__setattr__(self, "gamma0", g)

    @classmethod
    def specified(cls, gamma0):
        return cls(tuple(gamma0))

    @classmethod
    def equal(cls):
        return cls(None)

    @property
    def is_equal(self):
        return self.gamma0 is None

    @property
    def kind(self):
        return "equal" if self.is_equal else "specified"


@dataclass(frozen=True)
class TestReport:
    test: str
    statistic: float
    normalized: float
    p_value: float
    reject: bool
    alpha: float
    threshold: float
    per_dim_contrib: tuple
    argmax_dim: int
    gamma_bar: Optional[float] = None
    df: Optional[int] = None
    notes: tuple = field(default=())

    __test__ = False  # not a pytest class


def _contribs(gamma_hat, k, denom):
    return k * (gamma_hat / denom - 1.0) ** 2


def _max_and_argmax(contribs):
    j = int(np.argmax(contribs))  # first occurrence on ties
    return float(contribs[j]), j


def statistic_T(estimates, gamma0):
    """T = max_j k_j (gamma_hat_j / gamma0_j - 1)^2.

    Returns ``(T, contribs, argmax)``; argmax is the smallest index attaining the max.
    """
    g0 = np.asarray(gamma0, dtype=float)
    if g0.shape != estimates.gamma_hat.shape:
        raise ParameterError(
            f"gamma0 has length {g0.size} but there are {estimates.p} estimates")
    if not np.all(g0 > 0):
        raise ParameterError("gamma0 entries must be > 0")
    contribs = _contribs(estimates.gamma_hat, estimates.k_choice.as_array(), g0)
    t, j = _max_and_argmax(contribs)
    return t, contribs, j


def common_index(estimates):
    """Average of the Hill estimates, the plug-in common index under H0*."""
    gbar = float(np.mean(estimates.gamma_hat))
    if not gbar > 0:
        raise DomainError("all Hill estimates degenerate")
    return gbar


def statistic_T_star(estimates):
    """T* = max_j k_j (gamma_hat_j / gamma_bar - 1)^2 with gamma_bar the mean estimate.

    Returns ``(T_star, gamma_bar, contribs, argmax)``.
    """
    gbar = common_index(estimates)
    contribs = _contribs(estimates.gamma_hat, estimates.k_choice.as_array(), gbar)
    t, j = _max_and_argmax(contribs)
    return t, gbar, contribs, j


def rejection_threshold(p, alpha):
    if p < 2:
        raise ParameterError("max-test calibration requires p >= 2")
    return 2.0 * math.log(p) - math.log(math.log(p)) + gumbel_test_quantile(alpha)


def calibrate(statistic, p, alpha):
    """Normalize a max statistic and attach its limiting p-value and decision.

    Returns ``(normalized, p_value, reject)``. The decision uses the threshold
    form ``statistic >= 2 log p - log log p + q_alpha`` so that a statistic
    sitting exactly on the boundary is rejected.
    """
    if p < 2:
        raise ParameterError("max-test calibration requires p >= 2")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    normalized = statistic - 2.0 * math.log(p) + math.log(math.log(p))
    p_value = gumbel_limit_sf(normalized)
    reject = bool(statistic >= rejection_threshold(p, alpha))
    return normalized, p_value, reject


def max_report(test, statistic, contribs, argmax, p, alpha, gamma_bar=None, notes=()):
    normalized, p_value, reject = calibrate(statistic, p, alpha)
    return TestReport(
        test=test,
        statistic=float(statistic),
        normalized=float(normalized),
        p_value=float(p_value),
        reject=reject,
        alpha=float(alpha),
        threshold=rejection_threshold(p, alpha),
        per_dim_contrib=tuple(float(c) for c in contribs),
        argmax_dim=int(argmax),
        gamma_bar=gamma_bar,
        notes=tuple(notes),
    )


def report_from_estimates(estimates, null, alpha=0.05):
    """Run T (specified null) or T* (equal null) on precomputed Hill estimates."""
    notes = list(estimates.notes)
    if estimates.degenerate:
        notes.append(f"zero Hill estimates in dimensions {list(estimates.degenerate)}")
    if null.is_equal:
        t, gbar, contribs, j = statistic_T_star(estimates)
        return max_report("T*", t, contribs, j, estimates.p, alpha, gamma_bar=gbar, notes=notes)
    t, contribs, j = statistic_T(estimates, null.gamma0)
    return max_report("T", t, contribs, j, estimates.p, alpha, notes=notes)


def run_max_test(data, ks, null, alpha=0.05):
    """Hill estimation followed by T or T*; returns a :class:`TestReport`."""
    if not isinstance(ks, KChoice):
        data = np.asarray(data, dtype=float)
        ks = KChoice.uniform(ks, data.shape[1], data.shape[0])
    return report_from_estimates(hill_estimates(data, ks), null, alpha)

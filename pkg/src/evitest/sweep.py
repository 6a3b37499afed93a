"""Running several tests on one dataset, and sweeping the tail sample size k."""

from dataclasses import dataclass, field

import numpy as np

from .dependence import (
    approx_omega_from_R, omega_report, tail_dependence_matrix, wald_report, zeta,
)
from .errors import DomainError, ParameterError, SingularityError
from .hill import KChoice, hill_confidence_interval, hill_estimates
from .maxtest import common_index, report_from_estimates

TEST_KINDS = ("max", "wald", "omega")


def parse_tests(spec):
    tests = [t.strip().lower() for t in spec.split(",")] if isinstance(spec, str) else list(spec)
    tests = [t for t in tests if t]
    if not tests:
        raise ParameterError("empty test list")
    bad = [t for t in tests if t not in TEST_KINDS]
    if bad:
        raise ParameterError(f"unknown tests {bad}; choose from {TEST_KINDS}")
    return tests


def run_tests(data, k, null, tests=("max",), alpha=0.05, ridge=0.0, omega=None):
    """Hill estimates plus one :class:`TestReport` per requested test kind.

    `k` is an int (uniform) or a :class:`KChoice`. The omega test uses the
    supplied precision matrix, or the inverse of the empirical tail-dependence
    matrix when `omega` is None.
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    ks = k if isinstance(k, KChoice) else KChoice.uniform(k, p, n)
    tests = parse_tests(tests)
    est = hill_estimates(data, ks)
    sigma = None
    reports = []
    for t in tests:
        if t == "max":
            reports.append(report_from_estimates(est, null, alpha))
            continue
        gbar = common_index(est) if null.is_equal else None
        if t == "omega" and omega is not None:
            reports.append(omega_report(zeta(est, null), omega, alpha, gamma_bar=gbar))
            continue
        if not ks.is_uniform:
            raise ParameterError(f"test {t!r} needs a common k across dimensions")
        if sigma is None:
            sigma = tail_dependence_matrix(data, ks.per_dim[0])
        if t == "wald":
            reports.append(wald_report(zeta(est, null), sigma, alpha, ridge))
        else:
            omega_r = approx_omega_from_R(sigma, ridge)
            reports.append(omega_report(zeta(est, null), omega_r, alpha, gamma_bar=gbar))
    return est, reports


@dataclass
class SweepResult:
    k_grid: list
    tests: list
    alpha: float
    # results[i][test] is a TestReport, or None where the test failed at k_grid[i]
    results: list
    failures: dict = field(default_factory=dict)
    column_names: list = None
    # {"k", "level", "gamma_hat", "ci_lo", "ci_hi"} for the Hill panel of the chart
    hill_ci: dict = None

    def curve(self, test):
        return [None if r[test] is None else r[test].p_value for r in self.results]

    def test_labels(self):
        labels = {}
        for t in self.tests:
            for r in self.results:
                if r[t] is not None:
                    labels[t] = r[t].test
                    break
            else:
                labels[t] = t
        return labels


def sweep_k(data, k_min, k_max, step, null, tests=("max",), alpha=0.05, ridge=0.0, omega=None):
    """p-values of the selected tests for k = k_min, k_min + step, ..., <= k_max."""
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    if step < 1:
        raise ParameterError("step must be >= 1")
    if k_min < 2 or k_max > n - 1:
        raise ParameterError(f"need 2 <= k_min and k_max <= n-1 (n={n})")
    grid = list(range(int(k_min), int(k_max) + 1, int(step)))
    if not grid:
        raise ParameterError("empty k grid")
    tests = parse_tests(tests)
    results, failures = [], {}
    for k in grid:
        row = {}
        for t in tests:
            try:
                row[t] = run_tests(data, k, null, [t], alpha, ridge, omega)[1][0]
            except (SingularityError, DomainError) as exc:
                row[t] = None
                failures[(k, t)] = str(exc)
        results.append(row)
    return SweepResult(grid, tests, alpha, results, failures)


def hill_intervals(data, k, level=0.95):
    """Per-dimension Hill estimates with normal-approximation confidence limits."""
    data = np.asarray(data, dtype=float)
    est = hill_estimates(data, KChoice.uniform(k, data.shape[1], data.shape[0]))
    lo, hi = zip(*(hill_confidence_interval(g, k, level) for g in est.gamma_hat))
    return {"k": int(k), "level": level, "gamma_hat": [float(g) for g in est.gamma_hat],
            "ci_lo": [float(v) for v in lo], "ci_hi": [float(v) for v in hi]}

"""Tail-dependence matrix, Wald-type benchmarks and the precision-weighted max statistic."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg

from .errors import ParameterError, ParseError, SingularityError
from .hill import KChoice, hill_estimates
from .maxtest import TestReport, common_index, max_report
from .numerics import chi_square_quantile, chi_square_sf, student_t_cdf

PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class TailDepMatrix:
    entries: np.ndarray
    k: int
    n: int
    notes: tuple = field(default=())

    @property
    def p(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class PrecisionMatrix:
    entries: np.ndarray
    source: str = "supplied"  # or "inverted_r"
    ridge: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError("precision matrix must be square")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-8):
            raise ParameterError("precision matrix must be symmetric")
        if not np.all(np.diag(a) > 0):
            raise ParameterError("precision matrix needs a strictly positive diagonal")
        object.__setattr__(self, "entries", a)

    @property
    def p(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class ZetaVector:
    values: np.ndarray
    starred: bool = False
    # k_j and gamma_hat_j / gamma0_j - 1, kept so squares match T exactly
    k: np.ndarray = None
    deviation: np.ndarray = None

    def squared(self):
        if self.k is not None and self.deviation is not None:
            return self.k * self.deviation ** 2
        return self.values ** 2


def tail_dependence_matrix(data, k):
    """Empirical pairwise tail-dependence coefficients.

    Entry (i, j) is the number of rows where both column i and column j
    strictly exceed their own ``X_{n-k,n}``, divided by k.
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    k = int(k)
    if k < 1 or k > n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= n-1 (n={n}), got {k}")
    thr = np.partition(data, n - k - 1, axis=0)[n - k - 1]
    exceed = (data > thr).astype(float)
    # integer counts are exact in float64, so the product is exactly symmetric
    entries = (exceed.T @ exceed) / k
    notes = ()
    diag = np.diag(entries)
    if np.any(diag != 1.0):
        short = np.flatnonzero(diag != 1.0)
        notes = (f"ties at the threshold: diagonal below 1 in dimensions {short.tolist()}",)
    return TailDepMatrix(entries, k, n, notes)


def zeta(estimates, null):
    """Standardized deviations sqrt(k_j) (gamma_hat_j / gamma0_j - 1)."""
    k = estimates.k_choice.as_array()
    if null.is_equal:
        denom = common_index(estimates)
    else:
        denom = np.asarray(null.gamma0, dtype=float)
        if denom.shape != estimates.gamma_hat.shape:
            raise ParameterError(
                f"gamma0 has length {denom.size} but there are {estimates.p} estimates")
    dev = estimates.gamma_hat / denom - 1.0
    return ZetaVector(np.sqrt(k) * dev, starred=null.is_equal, k=k, deviation=dev)


def _cholesky(matrix, ridge):
    a = np.asarray(matrix, dtype=float)
    if ridge:
        a = a + ridge * np.eye(a.shape[0])
    try:
        c = linalg.cho_factor(a, lower=True, check_finite=True)
        pivots = np.diag(c[0]) ** 2
    except linalg.LinAlgError:
        _, d, _ = linalg.ldl(a, lower=True)
        pivots = np.linalg.eigvalsh(d) if d.size else np.array([0.0])
        c = None
    smallest = float(np.min(pivots))
    if c is None or smallest < PIVOT_TOL:
        raise SingularityError(
            f"matrix is not positive definite: smallest pivot {smallest:.3g} "
            f"(tolerance {PIVOT_TOL:g}); retry with a positive ridge", pivot=smallest)
    return c


def wald_statistic(z, sigma, ridge=0.0):
    """Quadratic form z' (Sigma + ridge I)^{-1} z via a Cholesky solve."""
    s = sigma.entries if isinstance(sigma, TailDepMatrix) else np.atleast_2d(sigma)
    v = np.asarray(z.values if isinstance(z, ZetaVector) else z, dtype=float)
    if s.shape != (v.size, v.size):
        raise ParameterError(f"sigma is {s.shape} but zeta has length {v.size}")
    if ridge < 0:
        raise ParameterError("ridge must be >= 0")
    c = _cholesky(s, ridge)
    return max(float(v @ linalg.cho_solve(c, v)), 0.0)


def approx_omega_from_R(sigma, ridge=0.0):
    """Precision matrix (Sigma + ridge I)^{-1} standing in for the unknown Omega."""
    s = sigma.entries if isinstance(sigma, TailDepMatrix) else np.asarray(sigma, dtype=float)
    if ridge < 0:
        raise ParameterError("ridge must be >= 0")
    c = _cholesky(s, ridge)
    inv = linalg.cho_solve(c, np.eye(s.shape[0]))
    inv = (inv + inv.T) / 2.0
    return PrecisionMatrix(inv, source="inverted_r", ridge=float(ridge))


def statistic_T_omega(z, omega):
    """max_j eta_j^2 / omega_jj with eta = Omega zeta. Returns ``(T, contribs, argmax)``."""
    w = omega.entries if isinstance(omega, PrecisionMatrix) else np.asarray(omega, dtype=float)
    v = np.asarray(z.values if isinstance(z, ZetaVector) else z, dtype=float)
    if w.shape != (v.size, v.size):
        raise ParameterError(f"omega is {w.shape} but zeta has length {v.size}")
    d = np.diag(w)
    if not np.all(d > 0):
        raise ParameterError("omega must have a strictly positive diagonal")
    if isinstance(z, ZetaVector) and np.count_nonzero(w - np.diag(d)) == 0:
        # diagonal Omega: eta_j^2 / omega_jj = omega_jj * zeta_j^2
        contribs = d * z.squared()
    else:
        eta = w @ v
        contribs = eta ** 2 / d
    j = int(np.argmax(contribs))
    return float(contribs[j]), contribs, j


def _uniform_k(data, ks):
    data = np.asarray(data, dtype=float)
    if not isinstance(ks, KChoice):
        ks = KChoice.uniform(ks, data.shape[1], data.shape[0])
    if not ks.is_uniform:
        raise ParameterError("the tail-dependence matrix needs one common k for all dimensions")
    return data, ks


def wald_report(z, sigma, alpha, ridge=0.0):
    """Wald decision from a zeta vector and a tail-dependence matrix."""
    p = z.values.size
    df = p - 1 if z.starred else p
    if df < 1:
        raise ParameterError("the starred Wald test needs p >= 2")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    t = wald_statistic(z, sigma, ridge)
    thr = chi_square_quantile(1.0 - alpha, df)
    return TestReport(
        test="TW*" if z.starred else "TW",
        statistic=t,
        normalized=t,
        p_value=chi_square_sf(t, df),
        reject=bool(t > thr),
        alpha=float(alpha),
        threshold=thr,
        per_dim_contrib=tuple(float(c) for c in z.squared()),
        argmax_dim=int(np.argmax(z.squared())),
        df=df,
        notes=tuple(sigma.notes) if isinstance(sigma, TailDepMatrix) else (),
    )


def wald_test(data, ks, null, alpha=0.05, ridge=0.0):
    """Wald-type benchmark; chi-square with p (specified) or p - 1 (equal) df."""
    data, ks = _uniform_k(data, ks)
    est = hill_estimates(data, ks)
    sigma = tail_dependence_matrix(data, ks.per_dim[0])
    return wald_report(zeta(est, null), sigma, alpha, ridge)


def omega_report(z, omega, alpha, gamma_bar=None):
    t, contribs, j = statistic_T_omega(z, omega)
    name = "TOmega*" if z.starred else "TOmega"
    return max_report(name, t, contribs, j, z.values.size, alpha, gamma_bar=gamma_bar)


def omega_test(data, ks, null, alpha=0.05, omega=None, ridge=0.0):
    """Precision-weighted max test; without `omega` the inverse of the empirical
    tail-dependence matrix (plus ridge) is plugged in."""
    data = np.asarray(data, dtype=float)
    if omega is None:
        data, ks = _uniform_k(data, ks)
        omega = approx_omega_from_R(tail_dependence_matrix(data, ks.per_dim[0]), ridge)
    elif not isinstance(ks, KChoice):
        ks = KChoice.uniform(ks, data.shape[1], data.shape[0])
    est = hill_estimates(data, ks)
    gbar = common_index(est) if null.is_equal else None
    return omega_report(zeta(est, null), omega, alpha, gamma_bar=gbar)


def elliptical_tail_dependence(rho, df):
    """Tail-dependence coefficient of a bivariate t with correlation rho and df degrees of freedom."""
    if not -1.0 < rho < 1.0:
        raise ParameterError("rho must lie in (-1, 1)")
    x = -math.sqrt((df + 1.0) * (1.0 - rho) / (1.0 + rho))
    return 2.0 * student_t_cdf(x, df + 1.0)


def load_omega(path, p=None):
    """Read a dense whitespace-separated p x p matrix; rejects asymmetric input."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            vals = []
            for col, tok in enumerate(line.split(), start=1):
                try:
                    v = float(tok)
                except ValueError:
                    raise ParseError(f"non-numeric entry {tok!r}", row=lineno, column=col) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite entry {tok!r}", row=lineno, column=col)
                vals.append(v)
            if rows and len(vals) != len(rows[0]):
                raise ParseError("ragged row", row=lineno)
            rows.append(vals)
    a = np.array(rows, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParseError(f"omega file must hold a square matrix, got shape {a.shape}")
    if p is not None and a.shape[0] != p:
        raise ParameterError(f"omega is {a.shape[0]} x {a.shape[0]} but data has p={p}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-8):
        raise ParseError("omega matrix is not symmetric within 1e-8")
    return PrecisionMatrix((a + a.T) / 2.0, source="supplied")

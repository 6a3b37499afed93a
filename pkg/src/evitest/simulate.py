"""Data-generating processes for the size and power experiments.

Models A and B are built on iid bivariate Cauchy pairs (scale matrix with
off-diagonal 0.7) shared by dimensions 2i-1 and 2i; models C and D on p + 1
iid unit Frechet factors, dimension j being the max of factors j and j + 1
at half scale. Randomness comes from Philox, a counter-based generator,
keyed by (master_seed, stream_id, *cell key), so each replication can be
generated independently of scheduling.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, ParameterError
from .numerics import cauchy_sf, frechet1_sf, student_t_quantile
from .dependence import elliptical_tail_dependence

MODELS = ("A", "B", "C", "D")
CAUCHY_OFFDIAG = 0.7
_FLOAT_MAX = np.finfo(float).max


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int = 0


def make_rng(seed, *key):
    """Independent Philox stream for ``(master_seed, stream_id, *key)``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed))
    ss = np.random.SeedSequence(
        entropy=int(seed.master_seed) & (2 ** 64 - 1),
        spawn_key=(int(seed.stream_id),) + tuple(int(v) for v in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ModelSpec:
    model: str
    n: int
    p: int
    gamma: tuple = None  # defaults to all ones
    frechet_exponent: str = "inverse"  # model D: "inverse" -> -1/gamma, "direct" -> -gamma

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.n < 2 or self.p < 2:
            raise ParameterError("models need n >= 2 and p >= 2")
        g = (1.0,) * self.p if self.gamma is None else tuple(float(v) for v in self.gamma)
        if len(g) != self.p:
            raise ParameterError(f"gamma has length {len(g)}, expected p={self.p}")
        if not all(v > 0 for v in g):
            raise ParameterError("gamma entries must be > 0")
        if self.frechet_exponent not in ("inverse", "direct"):
            raise ParameterError("frechet_exponent must be 'inverse' or 'direct'")
        object.__setattr__(self, "gamma", g)


@dataclass(frozen=True)
class AltSpec:
    m: int
    support: tuple
    deltas: tuple


def bivariate_cauchy_pairs(count, offdiag=CAUCHY_OFFDIAG, seed=0):
    """``count x 2`` draws of Z/|W|, Z ~ N(0, [[1, r], [r, 1]]) and W ~ N(0, 1)."""
    if not -1.0 < offdiag < 1.0:
        raise ParameterError("offdiag must lie in (-1, 1)")
    rng = make_rng(seed)
    return _cauchy_block(rng, int(count), 1, offdiag)[:, 0, :]


def _cauchy_block(rng, n, pairs, offdiag):
    z = rng.standard_normal((n, pairs, 2))
    w = rng.standard_normal((n, pairs))
    z[..., 1] = offdiag * z[..., 0] + math.sqrt(1.0 - offdiag * offdiag) * z[..., 1]
    with np.errstate(divide="ignore"):
        return z / np.abs(w)[..., None]


def _frechet_factors(rng, n, count):
    u = rng.random((n, count))
    with np.errstate(divide="ignore"):
        return -1.0 / np.log(u)


def latent(spec, rng):
    """Latent matrix X-tilde before the marginal transforms."""
    n, p = spec.n, spec.p
    if spec.model in ("A", "B"):
        pairs = (p + 1) // 2
        return _cauchy_block(rng, n, pairs, CAUCHY_OFFDIAG).reshape(n, 2 * pairs)[:, :p]
    z = _frechet_factors(rng, n, p + 1)
    return np.maximum(z[:, :-1] / 2.0, z[:, 1:] / 2.0)


def _student_t_transform(xt, gamma):
    out = xt.copy()
    for j, g in enumerate(gamma):
        if g == 1.0:
            continue  # St_1^{-1}(St_1(x)) = x
        col = xt[:, j]
        # work with the tail probability of |x| to keep precision far out
        s = cauchy_sf(np.abs(col))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = -student_t_quantile(np.clip(s, np.finfo(float).tiny, 0.5), 1.0 / g)
        q = np.where(s > 0, q, np.inf)
        out[:, j] = np.sign(col) * q
    return out


def transform(spec, xt):
    g = np.asarray(spec.gamma)
    with np.errstate(divide="ignore", over="ignore"):
        if spec.model == "A":
            return _student_t_transform(xt, spec.gamma)
        if spec.model == "B":
            return cauchy_sf(xt) ** (-g)
        if spec.model == "C":
            return xt ** g
        expo = -1.0 / g if spec.frechet_exponent == "inverse" else -g
        return frechet1_sf(xt) ** expo


def generate(spec, seed, *key, return_diagnostics=False):
    """Draw an ``n x p`` sample from `spec`.

    Infinite values (e.g. a zero denominator in Z/|W|) are saturated to the
    largest finite float; their count is returned when `return_diagnostics`.
    """
    rng = make_rng(seed, *key)
    x = transform(spec, latent(spec, rng))
    bad = ~np.isfinite(x)
    n_sat = int(bad.sum())
    if n_sat:
        x = np.where(bad, np.copysign(_FLOAT_MAX, np.nan_to_num(x)), x)
    if return_diagnostics:
        return x, {"saturated": n_sat}
    return x


def alternative_size(p):
    """m = floor(p^{1/4}) computed in integers."""
    m = int(round(p ** 0.25))
    while m ** 4 > p:
        m -= 1
    while (m + 1) ** 4 <= p:
        m += 1
    return m


def draw_alternative(p, ks, seed, *key):
    """Sparse alternative around gamma0 = 1.

    ``m = floor(p^{1/4})`` indices drawn without replacement, each moved to
    ``1 +/- 2 sqrt(log p / k_j)`` with a fair sign. Returns ``(gamma, AltSpec)``.
    """
    if p < 2:
        raise ParameterError("p must be >= 2")
    kvals = np.asarray(ks.per_dim if hasattr(ks, "per_dim") else [ks] * p, dtype=float)
    if kvals.size != p:
        raise ParameterError(f"k choice has {kvals.size} entries, expected {p}")
    rng = make_rng(seed, *key)
    m = alternative_size(p)
    support = np.sort(rng.choice(p, size=m, replace=False))
    signs = np.where(rng.integers(0, 2, size=m) == 1, 1.0, -1.0)
    deltas = signs * 2.0 * np.sqrt(math.log(p) / kvals[support])
    gamma = np.ones(p)
    gamma[support] += deltas
    if np.any(gamma <= 0):
        raise DomainError("alternative produced a non-positive index; k is too small for this p")
    return gamma, AltSpec(m, tuple(int(s) for s in support), tuple(float(d) for d in deltas))


def model_tail_dependence(model, p):
    """Population tail-dependence matrix (R_ij(1,1)) of a model."""
    r = np.eye(p)
    if model in ("A", "B"):
        lam = elliptical_tail_dependence(CAUCHY_OFFDIAG, 1.0)
        for j in range(0, p - 1, 2):
            r[j, j + 1] = r[j + 1, j] = lam
    elif model in ("C", "D"):
        idx = np.arange(p - 1)
        r[idx, idx + 1] = r[idx + 1, idx] = 0.5
    else:
        raise ParameterError(f"unknown model {model!r}")
    return r

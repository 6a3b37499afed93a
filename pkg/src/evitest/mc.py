"""Monte Carlo size/power engine and comparison against reference tables."""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import asdict, dataclass, field
import io
import json
import math
from importlib import resources

import numpy as np

from . import __version__
from .dependence import (
    PrecisionMatrix, approx_omega_from_R, omega_report, tail_dependence_matrix,
    wald_report, zeta,
)
from .errors import DomainError, EVIError, ParameterError, SingularityError
from .hill import KChoice, hill_estimates
from .maxtest import NullSpec, report_from_estimates
from .simulate import MODELS, ModelSpec, SeedSpec, draw_alternative, generate, model_tail_dependence

# TOmega uses the model's population tail-dependence matrix, TOmegaR the
# inverse of the empirical one.
TESTS = ("T", "T*", "TOmega", "TOmegaR", "TW", "TW*")
HYPOTHESES = ("null", "alternative")
INVALID_FAILURE_SHARE = 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple = MODELS
    tests: tuple = ("T",)
    n: int = 1000
    p_values: tuple = (50, 80, 100)
    k_values: tuple = (50, 80)
    alpha: float = 0.05
    replications: int = 1000
    hypothesis: str = "null"
    master_seed: int = 20240101
    ridge: float = 0.0
    fixed_alternative: bool = False
    frechet_exponent: str = "inverse"

    def __post_init__(self):
        for name in ("models", "tests", "p_values", "k_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        bad = [m for m in self.models if m not in MODELS]
        if bad or not self.models:
            raise ParameterError(f"unknown models {bad}; choose from {MODELS}")
        bad = [t for t in self.tests if t not in TESTS]
        if bad or not self.tests:
            raise ParameterError(f"unknown tests {bad}; choose from {TESTS}")
        if self.hypothesis not in HYPOTHESES:
            raise ParameterError(f"hypothesis must be one of {HYPOTHESES}")
        if self.replications < 1:
            raise ParameterError("replications must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError("alpha must lie in (0, 1)")
        if any(p < 2 for p in self.p_values) or not self.p_values:
            raise ParameterError("every p must be >= 2")
        if any(k < 1 or k > self.n - 1 for k in self.k_values) or not self.k_values:
            raise ParameterError(f"every k must satisfy 1 <= k <= n-1 (n={self.n})")


@dataclass(frozen=True)
class McCell:
    model: str
    test: str
    p: int
    k: int
    hypothesis: str
    rejection_rate: float  # NaN when the cell is invalid
    mc_stderr: float
    replications: int
    rejections: int
    failures: int

    @property
    def valid(self):
        return self.failures <= INVALID_FAILURE_SHARE * self.replications


@dataclass
class McReport:
    cells: list
    provenance: dict = field(default_factory=dict)

    def cell(self, model, test, p, k):
        for c in self.cells:
            if (c.model, c.test, c.p, c.k) == (model, test, p, k):
                return c
        raise KeyError((model, test, p, k))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for c in self.cells:
            w.writerow([c.model, c.test, c.p, c.k, c.hypothesis, repr(c.rejection_rate),
                        repr(c.mc_stderr), c.replications, c.rejections, c.failures,
                        int(c.valid)])
        return buf.getvalue()

    def to_json(self):
        cells = []
        for c in self.cells:
            d = asdict(c)
            d["valid"] = c.valid
            for key in ("rejection_rate", "mc_stderr"):
                if math.isnan(d[key]):
                    d[key] = None
            cells.append(d)
        return json.dumps({"schema_version": 1, "kind": "mc", "provenance": self.provenance,
                           "cells": cells}, indent=2)


CSV_FIELDS = ("model", "test", "p", "k", "hypothesis", "rejection_rate", "mc_stderr",
              "replications", "rejections", "failures", "valid")


def read_report_csv(text):
    rows = csv.DictReader(io.StringIO(text))
    cells = []
    for r in rows:
        cells.append(McCell(
            model=r["model"], test=r["test"], p=int(r["p"]), k=int(r["k"]),
            hypothesis=r["hypothesis"], rejection_rate=float(r["rejection_rate"]),
            mc_stderr=float(r["mc_stderr"]), replications=int(r["replications"]),
            rejections=int(r["rejections"]), failures=int(r["failures"])))
    return McReport(cells)


def _cell_key(config, model, p, k):
    return (MODELS.index(model), p, k, HYPOTHESES.index(config.hypothesis))


def _replication(config, model, p, k, model_omega, r):
    """Outcome per test for one replication: 1 reject, 0 accept, None failure."""
    key = _cell_key(config, model, p, k)
    ks = KChoice.uniform(k, p, config.n)
    gamma = None
    if config.hypothesis == "alternative":
        alt_stream = 0 if config.fixed_alternative else r
        gamma, _ = draw_alternative(p, ks, SeedSpec(config.master_seed, alt_stream), *key, 1)
    spec = ModelSpec(model, config.n, p, gamma, frechet_exponent=config.frechet_exponent)
    x = generate(spec, SeedSpec(config.master_seed, r), *key, 0)

    out = {}
    try:
        est = hill_estimates(x, ks)
    except DomainError:
        return {t: None for t in config.tests}
    specified = NullSpec.specified(np.ones(p))
    equal = NullSpec.equal()
    sigma = None
    for test in config.tests:
        try:
            if test == "T":
                rep = report_from_estimates(est, specified, config.alpha)
            elif test == "T*":
                rep = report_from_estimates(est, equal, config.alpha)
            elif test == "TOmega":
                rep = omega_report(zeta(est, specified), model_omega, config.alpha)
            else:
                if sigma is None:
                    sigma = tail_dependence_matrix(x, k)
                if test == "TOmegaR":
                    omega = approx_omega_from_R(sigma, config.ridge)
                    rep = omega_report(zeta(est, specified), omega, config.alpha)
                else:
                    null = equal if test == "TW*" else specified
                    rep = wald_report(zeta(est, null), sigma, config.alpha, config.ridge)
            out[test] = int(rep.reject)
        except (SingularityError, DomainError):
            out[test] = None
    return out


def _summarize(model, test, p, k, hypothesis, outcomes):
    reps = len(outcomes)
    failures = sum(o is None for o in outcomes)
    rejections = sum(o for o in outcomes if o is not None)
    ok = reps - failures
    if failures > INVALID_FAILURE_SHARE * reps or ok == 0:
        rate = stderr = float("nan")
    else:
        rate = rejections / ok
        stderr = math.sqrt(rate * (1.0 - rate) / ok)
    return McCell(model, test, p, k, hypothesis, rate, stderr, reps, rejections, failures)


def run_experiment(config, threads=1, progress=None):
    """Run every (model, p, k) cell of `config`; all tests share each replication's data.

    Replication r of a cell always uses stream r, so the report does not depend
    on `threads`.
    """
    if threads < 1:
        raise ParameterError("threads must be >= 1")
    cells = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for model in config.models:
            for p in config.p_values:
                model_omega = None
                if "TOmega" in config.tests:
                    model_omega = approx_omega_from_R(model_tail_dependence(model, p))
                    model_omega = PrecisionMatrix(model_omega.entries, source="supplied")
                for k in config.k_values:
                    def job(r, model=model, p=p, k=k, model_omega=model_omega):
                        return _replication(config, model, p, k, model_omega, r)

                    reps = range(config.replications)
                    results = list(pool.map(job, reps, chunksize=16) if pool else map(job, reps))
                    for test in config.tests:
                        cells.append(_summarize(model, test, p, k, config.hypothesis,
                                                [res[test] for res in results]))
                    if progress:
                        progress(model, p, k)
    finally:
        if pool:
            pool.shutdown()
    prov = {"config": asdict(config), "master_seed": config.master_seed,
            "code_version": __version__, "generator": "Philox/SeedSequence"}
    return McReport(cells, prov)


@dataclass(frozen=True)
class ReferenceRow:
    table: str
    hypothesis: str
    model: str
    test: str
    p: int
    k: int
    k_alt: int
    value: float


def load_reference(path=None):
    """Reference table rows; the bundled Tables 1-2 transcription when `path` is None."""
    if path is None:
        text = resources.files("evitest").joinpath("data/reference_tables.csv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append(ReferenceRow(r["table"], r["hypothesis"], r["model"], r["test"], int(r["p"]),
                                 int(r["k"]), int(r["k_alt"] or r["k"]), float(r["value"])))
    return rows


@dataclass(frozen=True)
class Comparison:
    rows: list
    max_deviation: float
    flagged: int
    tolerance: float


def compare_tables(report, reference, tolerance=0.03, skip_unmatched=False):
    """Absolute deviation of each report cell from the matching reference entry.

    A reference row matches a cell with the same model, test, p and hypothesis
    whose k equals either the reference's k label or its alternate k.
    """
    if isinstance(reference, (str, bytes)) or reference is None:
        reference = load_reference(reference)
    index = {}
    for ref in reference:
        for kk in {ref.k, ref.k_alt}:
            index.setdefault((ref.hypothesis, ref.model, ref.test, ref.p, kk), ref)
    rows, missing = [], []
    for c in report.cells:
        ref = index.get((c.hypothesis, c.model, c.test, c.p, c.k))
        if ref is None:
            missing.append((c.model, c.test, c.p, c.k, c.hypothesis))
            continue
        dev = abs(c.rejection_rate - ref.value) if c.valid else float("nan")
        rows.append({"model": c.model, "test": c.test, "p": c.p, "k": c.k,
                     "hypothesis": c.hypothesis, "observed": c.rejection_rate,
                     "reference": ref.value, "deviation": dev,
                     "flag": not (dev <= tolerance)})
    if missing and not skip_unmatched:
        raise ParameterError(f"no reference entry for cells {missing}")
    if not rows:
        raise ParameterError("no report cell matches the reference table")
    devs = [r["deviation"] for r in rows if not math.isnan(r["deviation"])]
    return Comparison(rows, max(devs) if devs else float("nan"),
                      sum(r["flag"] for r in rows), tolerance)

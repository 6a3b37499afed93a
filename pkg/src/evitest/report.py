"""JSON / CSV / SVG emission of test runs and k-sweeps, and JSON re-ingestion."""

import csv
from dataclasses import asdict, dataclass, field
import io
import json
import math
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .errors import ParameterError
from .hill import hill_confidence_interval
from .maxtest import TestReport
from .sweep import SweepResult

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "svg")
_REPORT_FIELDS = ("test", "statistic", "normalized", "p_value", "reject", "alpha", "threshold",
                  "argmax_dim", "gamma_bar", "df")


@dataclass
class TestRun:
    """Everything the `test` subcommand produces for one dataset and one k."""

    column_names: list
    k: int
    null_kind: str
    gamma0: list
    gamma_hat: np.ndarray
    thresholds: np.ndarray
    reports: list
    ci_level: float = 0.95
    provenance: dict = field(default_factory=dict)

    __test__ = False

    def intervals(self):
        return [hill_confidence_interval(g, self.k, self.ci_level) for g in self.gamma_hat]


def _report_dict(r):
    if r is None:
        return None
    d = asdict(r)
    d["per_dim_contrib"] = list(d["per_dim_contrib"])
    d["notes"] = list(d["notes"])
    return d


def _report_from_dict(d):
    if d is None:
        return None
    d = dict(d)
    d["per_dim_contrib"] = tuple(d["per_dim_contrib"])
    d["notes"] = tuple(d.get("notes", ()))
    return TestReport(**d)


def to_payload(result):
    prov = {"code_version": __version__}
    if isinstance(result, TestRun):
        if not result.reports:
            raise ParameterError("nothing to report: empty test list")
        prov.update(result.provenance)
        lo, hi = zip(*result.intervals()) if len(result.gamma_hat) else ((), ())
        return {
            "schema_version": SCHEMA_VERSION, "kind": "test", "provenance": prov,
            "columns": list(result.column_names), "k": result.k,
            "null": {"kind": result.null_kind, "gamma0": result.gamma0},
            "hill": {"gamma_hat": [float(g) for g in result.gamma_hat],
                     "thresholds": [float(t) for t in result.thresholds],
                     "ci_level": result.ci_level,
                     "ci_lo": [float(v) for v in lo], "ci_hi": [float(v) for v in hi]},
            "reports": [_report_dict(r) for r in result.reports],
        }
    if isinstance(result, SweepResult):
        if not result.tests or not result.k_grid:
            raise ParameterError("nothing to report: empty test list or k grid")
        return {
            "schema_version": SCHEMA_VERSION, "kind": "sweep", "provenance": prov,
            "alpha": result.alpha, "tests": list(result.tests), "k_grid": list(result.k_grid),
            "points": [{"k": k, "results": {t: _report_dict(row[t]) for t in result.tests}}
                       for k, row in zip(result.k_grid, result.results)],
            "failures": [{"k": k, "test": t, "error": msg}
                         for (k, t), msg in sorted(result.failures.items())],
            "hill_ci": result.hill_ci,
            "columns": result.column_names,
        }
    raise ParameterError(f"cannot report a {type(result).__name__}")


def load_report(source):
    """Parse a JSON report (path or text); TestReport entries are rebuilt as objects."""
    if isinstance(source, str) and source.lstrip().startswith("{"):
        payload = json.loads(source)
    else:
        with open(source, encoding="utf-8") as fh:
            payload = json.load(fh)
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ParameterError(f"unsupported schema version {payload.get('schema_version')!r}")
    if payload["kind"] == "test":
        payload["reports"] = [_report_from_dict(d) for d in payload["reports"]]
    elif payload["kind"] == "sweep":
        for pt in payload["points"]:
            pt["results"] = {t: _report_from_dict(d) for t, d in pt["results"].items()}
    return payload


def _csv_text(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    fmt = lambda v: "" if v is None else (repr(v) if isinstance(v, float) else v)  # noqa: E731
    if isinstance(result, TestRun):
        if not result.reports:
            raise ParameterError("nothing to report: empty test list")
        w.writerow(("k",) + _REPORT_FIELDS)
        for r in result.reports:
            w.writerow([result.k] + [fmt(getattr(r, f)) for f in _REPORT_FIELDS])
    else:
        to_payload(result)  # validates
        w.writerow(("k",) + _REPORT_FIELDS)
        for k, row in zip(result.k_grid, result.results):
            for t in result.tests:
                r = row[t]
                if r is None:
                    w.writerow([k, t] + [""] * (len(_REPORT_FIELDS) - 1))
                else:
                    w.writerow([k] + [fmt(getattr(r, f)) for f in _REPORT_FIELDS])
    return buf.getvalue()


# ---------------------------------------------------------------- SVG

_W, _H, _PAD = 440, 320, 48
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _f(v):
    return f"{v:.2f}"


def _axes(x0, title, xlabel, ylabel):
    x1, y0, y1 = x0 + _W - _PAD, _PAD, _H - _PAD
    return [
        f'<g class="panel">',
        f'<text x="{_f(x0 + (_W - _PAD) / 2)}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line class="axis" x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{_f(x0 + (_W - _PAD) / 2)}" y="{_H - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="{x0 - 34}" y="{_f((y0 + y1) / 2)}" font-size="12" '
        f'transform="rotate(-90 {x0 - 34} {_f((y0 + y1) / 2)})" text-anchor="middle">{escape(ylabel)}</text>',
    ]


def _scale(lo, hi, a, b):
    if hi == lo:
        hi = lo + 1.0
    return lambda v: a + (v - lo) * (b - a) / (hi - lo)


def _pvalue_panel(result, x0):
    out = _axes(x0, "p-value against k", "k", "p-value")
    sx = _scale(min(result.k_grid), max(result.k_grid), x0, x0 + _W - _PAD)
    sy = _scale(0.0, 1.0, _H - _PAD, _PAD)
    out.append(f'<line class="alpha" x1="{x0}" y1="{_f(sy(result.alpha))}" x2="{x0 + _W - _PAD}" '
               f'y2="{_f(sy(result.alpha))}" stroke="gray" stroke-dasharray="4 3"/>')
    labels = result.test_labels()
    for i, t in enumerate(result.tests):
        color = _COLORS[i % len(_COLORS)]
        segment = []
        segments = []
        for k, pv in zip(result.k_grid, result.curve(t)):
            if pv is None:
                if segment:
                    segments.append(segment)
                segment = []
            else:
                segment.append(f"{_f(sx(k))},{_f(sy(pv))}")
        if segment:
            segments.append(segment)
        for seg in segments:
            out.append(f'<polyline class="curve" data-test="{escape(labels[t])}" fill="none" '
                       f'stroke="{color}" points="{" ".join(seg)}"/>')
        out.append(f'<text x="{x0 + 8}" y="{_PAD + 14 * (i + 1)}" font-size="11" fill="{color}">'
                   f'{escape(labels[t])}</text>')
    out.append("</g>")
    return out


def _hill_panel(gamma_hat, lo, hi, k, level, x0):
    out = _axes(x0, f"Hill estimates, k={k}, {round(level * 100)}% limits", "dimension", "gamma")
    p = len(gamma_hat)
    sx = _scale(0, max(p - 1, 1), x0 + 10, x0 + _W - _PAD - 10)
    ymin, ymax = min(min(lo), 0.0), max(hi)
    sy = _scale(ymin, ymax * 1.05, _H - _PAD, _PAD)
    for j in range(p):
        x = _f(sx(j))
        out.append(f'<line class="whisker" x1="{x}" y1="{_f(sy(lo[j]))}" x2="{x}" y2="{_f(sy(hi[j]))}" stroke="black"/>')
        out.append(f'<circle class="estimate" cx="{x}" cy="{_f(sy(gamma_hat[j]))}" r="2.5" fill="#1f77b4"/>')
    out.append("</g>")
    return out


def _svg_text(result):
    panels = []
    if isinstance(result, SweepResult):
        to_payload(result)
        panels.append(_pvalue_panel(result, _PAD))
        if result.hill_ci:
            h = result.hill_ci
            panels.append(_hill_panel(h["gamma_hat"], h["ci_lo"], h["ci_hi"], h["k"], h["level"],
                                      _W + _PAD))
    else:
        to_payload(result)
        lo, hi = zip(*result.intervals())
        panels.append(_hill_panel(list(result.gamma_hat), lo, hi, result.k, result.ci_level, _PAD))
    width = len(panels) * _W + _PAD
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{_H}" '
             f'viewBox="0 0 {width} {_H}">',
             f'<rect width="{width}" height="{_H}" fill="white"/>']
    for p in panels:
        lines.extend(p)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render(result, fmt):
    if fmt == "json":
        return json.dumps(to_payload(result), indent=2) + "\n"
    if fmt == "csv":
        return _csv_text(result)
    if fmt == "svg":
        return _svg_text(result)
    raise ParameterError(f"format must be one of {FORMATS}")


def emit_report(result, fmt, out_path):
    """Write `result` (a TestRun or SweepResult) as json, csv or svg."""
    text = render(result, fmt)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return out_path

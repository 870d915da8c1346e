"""Rate fitting and the convergence report shared by all experiments."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

SLOPE_WINDOW = (0.85, 1.15)
DEFAULT_SLACK = 3.0


class RateFitWarning(UserWarning):
    pass


def fit_rate(eps, err):
    """Least-squares line through (log eps, log err).

    Returns ``(slope, intercept, r2)``.  Zero errors are floored at machine
    epsilon with a warning.
    """
    eps = np.asarray(eps, dtype=float)
    err = np.asarray(err, dtype=float)
    if eps.shape != err.shape or eps.ndim != 1:
        raise ValueError("eps and err must be 1-D and of equal length")
    if eps.size < 4:
        raise ValueError("need at least 4 points to fit a rate")
    if np.any(eps <= 0) or np.any(err < 0) or not np.all(np.isfinite(err)):
        raise ValueError("eps must be positive and err non-negative and finite")
    tiny = np.finfo(float).eps
    if np.any(err < tiny):
        warnings.warn("zero error values floored at machine epsilon", RateFitWarning, stacklevel=2)
        err = np.maximum(err, tiny)
    lx, ly = np.log(eps), np.log(err)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _clean(obj):
    """Make ``obj`` JSON-friendly with exact float round-tripping."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ConvergenceReport:
    """Per-eps errors of one experiment against a reference rate.

    ``reference`` holds the per-eps comparison quantity (eps, delta(eps), a
    corrector bound, ...) and ``slack`` the multiplier applied to it.
    """

    experiment: str
    eps: np.ndarray
    errors: np.ndarray
    reference: np.ndarray
    reference_name: str = "eps"
    slack: float = DEFAULT_SLACK
    slope_window: tuple | None = SLOPE_WINDOW
    min_slope: float | None = None
    extra_columns: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        self.reference = np.asarray(self.reference, dtype=float)
        if np.any(self.errors < 0):
            raise ValueError("errors must be non-negative")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RateFitWarning)
            self.slope, self.intercept, self.r2 = fit_rate(self.eps, self.errors)

    @property
    def within_slack(self) -> np.ndarray:
        return self.errors <= self.slack * self.reference

    @property
    def slope_ok(self) -> bool:
        ok = True
        if self.slope_window is not None:
            ok = self.slope_window[0] <= self.slope <= self.slope_window[1]
        if self.min_slope is not None:
            ok = ok and self.slope >= self.min_slope
        return bool(ok)

    @property
    def passed(self) -> bool:
        return bool(self.slope_ok and np.all(self.within_slack))

    def to_dict(self) -> dict:
        table = []
        for i, e in enumerate(self.eps):
            row = {"eps": e, "error": self.errors[i], "reference": self.reference[i],
                   "within_slack": bool(self.within_slack[i])}
            for name, col in self.extra_columns.items():
                row[name] = col[i]
            table.append(row)
        return _clean({
            "experiment": self.experiment,
            "reference_name": self.reference_name,
            "slack": self.slack,
            "table": table,
            "fit": {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                    "window": list(self.slope_window) if self.slope_window else None,
                    "min_slope": self.min_slope, "ok": self.slope_ok},
            "pass": self.passed,
            "meta": self.meta,
        })

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            extra = list(self.extra_columns)
            w.writerow(["eps", "error", "reference"] + extra)
            for i, e in enumerate(self.eps):
                w.writerow([repr(float(e)), repr(float(self.errors[i])), repr(float(self.reference[i]))]
                           + [repr(float(self.extra_columns[k][i])) for k in extra])

"""Run a configured experiment and write its artifacts.

Artifacts in the output directory:

* ``report.json``: experiment id, config echo, per-eps table, fit, pass flag
* ``errors.csv``: eps, error, reference and any extra columns
* ``trajectory_<name>.csv`` for the exported trajectories
* ``errors.png`` and ``trajectory_<name>.png`` figures

Exit codes: 0 pass, 1 a rate assertion failed, 2 configuration error
(including a resonant direction), 3 runtime error.
"""

from __future__ import annotations

import json
import logging
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import ConfigError, ExperimentConfig, build_field
from .field import FieldError, PeriodicScalarField
from .report import ConvergenceReport, _clean
from .shear import ResonanceError

log = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


@dataclass
class SuiteResult:
    status: int
    report: ConvergenceReport | None
    message: str = ""
    out_dir: Path | None = None


def _point(p, dim, default=0.0):
    if p is None:
        return default if dim == 1 else np.zeros(dim)
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.size != dim:
        raise ConfigError(f"p must have {dim} entries", "p")
    return float(arr[0]) if dim == 1 else arr


def execute(cfg: ExperimentConfig) -> ConvergenceReport:
    """Run the experiment named in ``cfg`` and return its report."""
    common = dict(tol=cfg.ode_tol, slack=cfg.slack, workers=cfg.workers)
    kind = cfg.experiment
    if kind == "theorem1":
        G = build_field(cfg)
        if G.dim != 1:
            raise ConfigError("theorem1 needs a one-dimensional field", "field")
        return ex.run_theorem1(G, _point(cfg.p, 1), cfg.T, cfg.eps_ladder, **common)
    if kind == "theorem2a":
        G = build_field(cfg)
        if G.dim != len(cfg.a):
            raise ConfigError("direction a and profile dimension differ", "a")
        return ex.run_theorem2a(cfg.a, G, _point(cfg.p, G.dim), cfg.T, cfg.eps_ladder, **common)
    if kind == "theorem2b":
        F = build_field(cfg)
        if isinstance(F, PeriodicScalarField) or getattr(F, "dim", 0) != 2:
            raise ConfigError("theorem2b needs a planar vector field", "field")
        return ex.run_theorem2b(F, _point(cfg.p, 2), cfg.T, cfg.eps_ladder, t0=cfg.t0,
                                allow_resonant=cfg.allow_resonant, **common)
    if kind == "transport":
        from .transport import sine_problem

        H = build_field(cfg)
        if not isinstance(H, PeriodicScalarField) or H.dim != 1:
            raise ConfigError("transport needs a one-dimensional periodic speed", "field")
        prob = sine_problem(H, n=int(cfg.params.get("grid_n", 3001)), T=cfg.T)
        return ex.run_transport(prob, cfg.eps_ladder, t=cfg.t, **common)
    params = dict(cfg.params)
    params["eps_ladder"] = cfg.eps_ladder
    params.setdefault("slack", cfg.slack)
    if kind in ("example1", "example2", "example5"):
        params.setdefault("T", cfg.T)
        params.setdefault("tol", cfg.ode_tol)
        params.setdefault("workers", cfg.workers)
        if cfg.p is not None:
            params.setdefault("p", cfg.p if kind != "example2" else _point(cfg.p, 1))
    elif kind == "example3":
        params.setdefault("T", cfg.T)
    elif kind == "example4":
        params.setdefault("tol", cfg.ode_tol)
        params.setdefault("workers", cfg.workers)
        if cfg.t is not None:
            params.setdefault("t", cfg.t)
    return ex.run_example(kind, params)


def _write_trajectories(report, out: Path) -> list[str]:
    from .plotting import plot_trajectory

    names = []
    for name, traj in sorted(getattr(report, "trajectories", {}).items()):
        traj.to_csv(out / f"trajectory_{name}.csv", n_per_unit=2000.0)
        plot_trajectory(traj, out / f"trajectory_{name}.png", f"{report.experiment}: {name}")
        names.append(name)
    return names


def write_artifacts(cfg: ExperimentConfig, report: ConvergenceReport, out: Path, figures: bool = True) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    doc["config"] = _clean(cfg.echo())
    doc["trajectories"] = sorted(getattr(report, "trajectories", {}))
    (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    report.to_csv(out / "errors.csv")
    if figures:
        from .plotting import plot_errors

        plot_errors(report, out / "errors.png")
        _write_trajectories(report, out)
    return doc


def run_suite(cfg: ExperimentConfig, out_dir=None, figures: bool = True) -> SuiteResult:
    """Execute ``cfg``, write artifacts and map the outcome to an exit status."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    try:
        report = execute(cfg)
    except ConfigError as exc:
        return SuiteResult(EXIT_CONFIG, None, str(exc))
    except ResonanceError as exc:
        return SuiteResult(EXIT_CONFIG, None, f"refused: {exc}")
    except FieldError as exc:
        return SuiteResult(EXIT_CONFIG, None, str(exc))
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure\n%s", traceback.format_exc())
        return SuiteResult(EXIT_RUNTIME, None, f"{type(exc).__name__}: {exc}")
    try:
        write_artifacts(cfg, report, out, figures=figures)
    except OSError as exc:
        return SuiteResult(EXIT_RUNTIME, report, f"cannot write artifacts: {exc}")
    status = EXIT_PASS if report.passed else EXIT_FAIL
    msg = (f"{report.experiment}: slope {report.slope:.4f}, "
           f"{int(np.sum(report.within_slack))}/{report.eps.size} within slack -> "
           f"{'pass' if report.passed else 'FAIL'}")
    return SuiteResult(status, report, msg, out)

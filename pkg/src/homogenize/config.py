"""Declarative experiment configuration (YAML).

A config is a single mapping::

    experiment: theorem2a          # theorem1 | theorem2a | theorem2b | transport | example1..5
    field:                         # builtin name + params, or Fourier triples
      builtin: cos_profile
      params: {dim: 2, mean: 1.0, amp: 0.5}
    a: [1.0, 1.618033988749895]    # theorem2a only
    p: [0.0, 0.0]
    T: 1.0
    t0: 0.1                        # theorem2b only
    eps_ladder: {base: 2, from: 4, to: 8}   # or an explicit list
    tolerances: {ode: 1.0e-10, slack: 3.0}
    output: {dir: out/theorem2a}
    workers: 1
    params: {}                     # extra keyword arguments for the runner

Errors carry the line number and the dotted field name.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import yaml

from .field import FieldError, FourierSeries, PeriodicScalarField, builtin

KINDS = ("theorem1", "theorem2a", "theorem2b", "transport",
         "example1", "example2", "example3", "example4", "example5")
KNOWN_KEYS = {"experiment", "field", "a", "p", "T", "t0", "eps_ladder", "tolerances", "output",
              "workers", "params", "allow_resonant", "t"}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.field, self.line, self.source = field, line, source
        where = source or "<config>"
        if line is not None:
            where += f":{line}"
        if field:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}")


def _line_map(node, prefix=(), out=None) -> dict:
    """Dotted key path -> 1-based line of the value node."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = prefix + (str(k.value),)
            out[".".join(path)] = k.start_mark.line + 1
            _line_map(v, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            path = prefix + (str(i),)
            out[".".join(path)] = v.start_mark.line + 1
            _line_map(v, path, out)
    return out


@dataclass
class ExperimentConfig:
    experiment: str
    eps_ladder: list
    field: dict | None = None
    a: list | None = None
    p: object = None
    T: float = 1.0
    t0: float = 0.1
    t: float | None = None
    ode_tol: float = 1e-10
    slack: float = 3.0
    output_dir: str = "out"
    workers: int = 1
    allow_resonant: bool = False
    params: dict = dc_field(default_factory=dict)
    raw: dict = dc_field(default_factory=dict, repr=False)
    source: str | None = None

    def echo(self) -> dict:
        """The parsed config as plain data (goes into report.json)."""
        return {"experiment": self.experiment, "eps_ladder": list(self.eps_ladder),
                "field": self.field, "a": self.a, "p": self.p, "T": self.T, "t0": self.t0, "t": self.t,
                "tolerances": {"ode": self.ode_tol, "slack": self.slack},
                "output": {"dir": self.output_dir}, "workers": self.workers,
                "allow_resonant": self.allow_resonant, "params": self.params}


def _ladder(spec, err):
    if isinstance(spec, dict):
        missing = {"base", "from", "to"} - set(spec)
        if missing:
            raise err(f"ladder mapping needs keys base, from, to (missing {sorted(missing)})", "eps_ladder")
        base, lo, hi = float(spec["base"]), int(spec["from"]), int(spec["to"])
        if base <= 1:
            raise err("ladder base must exceed 1", "eps_ladder.base")
        if hi < lo:
            raise err("ladder 'to' must not be below 'from'", "eps_ladder.to")
        eps = [base ** -k for k in range(lo, hi + 1)]
    elif isinstance(spec, list):
        try:
            eps = [float(v) for v in spec]
        except (TypeError, ValueError):
            raise err("ladder entries must be numbers", "eps_ladder") from None
    else:
        raise err("eps_ladder must be a list or a {base, from, to} mapping", "eps_ladder")
    if len(eps) < 4:
        raise err(f"ladder needs at least 4 entries, got {len(eps)}", "eps_ladder")
    if any(not np.isfinite(e) or e <= 0 for e in eps):
        raise err("ladder entries must be positive", "eps_ladder")
    for i, (x, y) in enumerate(zip(eps, eps[1:])):
        if y >= x:
            raise err(f"ladder must be strictly decreasing (entry {i + 1} = {y!r} >= {x!r})",
                      f"eps_ladder.{i + 1}" if isinstance(spec, list) else "eps_ladder")
    return eps


def _positive(value, name, err):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise err(f"{name} must be a number", name) from None
    if not np.isfinite(v) or v <= 0:
        raise err(f"{name} must be positive, got {value!r}", name)
    return v


def parse_config(text: str, source: str | None = None) -> ExperimentConfig:
    """Parse and validate YAML text."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", None,
                          mark.line + 1 if mark else None, source) from None
    lines = _line_map(node) if node is not None else {}

    def err(msg, key=None):
        line = None
        if key:
            parts = key.split(".")
            while parts and line is None:
                line = lines.get(".".join(parts))
                parts.pop()
        return ConfigError(msg, key, line, source)

    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping", None, 1, source)
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise err(f"unknown key {unknown[0]!r}", unknown[0])
    kind = data.get("experiment")
    if kind not in KINDS:
        raise err(f"experiment must be one of {', '.join(KINDS)}; got {kind!r}", "experiment")
    if "eps_ladder" not in data:
        raise err("missing eps_ladder", "experiment")
    eps = _ladder(data["eps_ladder"], err)
    tols = data.get("tolerances") or {}
    if not isinstance(tols, dict):
        raise err("tolerances must be a mapping", "tolerances")
    ode_tol = _positive(tols.get("ode", 1e-10), "tolerances.ode", err)
    slack = _positive(tols.get("slack", 3.0), "tolerances.slack", err)
    T = _positive(data.get("T", 1.0), "T", err)
    t0 = float(data.get("t0", 0.1))
    if not 0 <= t0 < T:
        raise err("t0 must lie in [0, T)", "t0")
    t = data.get("t")
    if t is not None:
        t = float(t)
        if not 0 < t <= T:
            raise err("t must lie in (0, T]", "t")
    workers = data.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise err("workers must be a positive integer", "workers")
    out = data.get("output") or {}
    if not isinstance(out, dict):
        raise err("output must be a mapping", "output")
    params = data.get("params") or {}
    if not isinstance(params, dict):
        raise err("params must be a mapping", "params")
    fld = data.get("field")
    if fld is not None and not isinstance(fld, dict):
        raise err("field must be a mapping with 'builtin' or 'fourier'", "field")
    if kind in ("theorem1", "theorem2a", "theorem2b", "transport") and fld is None:
        raise err(f"{kind} needs a field", "experiment")
    a = data.get("a")
    if kind == "theorem2a":
        if not isinstance(a, list) or not a:
            raise err("theorem2a needs a direction list a", "a" if "a" in data else "experiment")
        try:
            a = [float(v) for v in a]
        except (TypeError, ValueError):
            raise err("a must be a list of numbers", "a") from None
    cfg = ExperimentConfig(kind, eps, fld, a, data.get("p"), T, t0, t, ode_tol, slack,
                           str(out.get("dir", "out")), workers, bool(data.get("allow_resonant", False)),
                           params, data, source)
    if fld is not None:
        try:
            build_field(cfg)
        except (FieldError, ValueError, TypeError) as exc:
            raise err(str(exc), "field") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, None, str(path)) from None
    return parse_config(text, str(path))


def build_field(cfg: ExperimentConfig):
    """Field object described by ``cfg.field``."""
    spec = cfg.field or {}
    if "builtin" in spec:
        return builtin(spec["builtin"], spec.get("params") or {})
    if "fourier" in spec:
        four = spec["fourier"]
        if not isinstance(four, dict) or "dim" not in four or "coefficients" not in four:
            raise ValueError("fourier field needs dim and coefficients")
        series = FourierSeries.from_triples(int(four["dim"]), four["coefficients"])
        if series.conjugate_symmetry_error() > 1e-12:
            raise ValueError("fourier coefficients must describe a real field (c_-m = conj c_m)")
        return PeriodicScalarField.from_fourier(series)
    raise ValueError("field needs a 'builtin' or 'fourier' entry")

"""Initial value problem solvers for oscillatory systems.

The adaptive path wraps scipy's Dormand-Prince 8(5,3) pair with dense output.
Oscillatory problems ``dX/dt = F(X/eps)`` are solved in the fast variable
``Z = X/eps``, ``s = t/eps``.  Fields with jump discontinuities across
coordinate thresholds are integrated region by region, with crossings
located by root finding and sticking handled by the Filippov sliding rule.

``oracle_solve`` is an independent fixed-step classical RK4 in the original
variable; it shares no code with the adaptive path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp as _scipy_solve_ivp
from scipy.integrate._ivp.common import OdeSolution
from scipy.interpolate import CubicHermiteSpline

from .field import PeriodicVectorField

FAST_THRESHOLD = 1.0 / 8.0
STEPS_PER_PERIOD = 20


class IntegrationError(RuntimeError):
    """Integrator gave up; carries the last accepted state."""

    def __init__(self, message, t_last=None, x_last=None):
        self.t_last = t_last
        self.x_last = None if x_last is None else np.asarray(x_last, dtype=float)
        super().__init__(f"{message} (last good t={t_last}, x={None if x_last is None else self.x_last.tolist()})")


class RhsEvaluationError(IntegrationError):
    """Right-hand side produced a non-finite value."""


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped solution samples with a dense interpolant.

    ``states`` has shape ``(N, d)``.  Calling the trajectory evaluates the
    interpolant; node times return the stored states exactly.
    """

    times: np.ndarray
    states: np.ndarray
    interpolant: Callable = dc_field(repr=False)
    meta: dict = dc_field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        out = np.asarray(self.interpolant(flat), dtype=float).reshape(len(flat), self.dim)
        idx = np.clip(np.searchsorted(self.times, flat), 0, len(self.times) - 1)
        exact = self.times[idx] == flat
        out[exact] = self.states[idx[exact]]
        return out.reshape(t.shape + (self.dim,))

    def sample(self, n_per_unit: float, extra=None) -> tuple[np.ndarray, np.ndarray]:
        """Union of node times and a uniform grid with ``n_per_unit`` points per unit time."""
        n = int(np.ceil((self.t1 - self.t0) * n_per_unit)) + 1
        grid = np.linspace(self.t0, self.t1, max(n, 2))
        ts = np.union1d(grid, self.times)
        if extra is not None:
            ts = np.union1d(ts, extra)
        return ts, self(ts)

    def to_csv(self, path, n_per_unit: float | None = None) -> None:
        ts, xs = (self.times, self.states) if n_per_unit is None else self.sample(n_per_unit)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x_{i + 1}" for i in range(self.dim)])
            for t, x in zip(ts, xs):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in x])


def _guard(rhs):
    def wrapped(t, x):
        v = np.asarray(rhs(t, x), dtype=float)
        if not np.isfinite(v).all():
            raise RhsEvaluationError("non-finite right-hand side", t, x)
        return v
    return wrapped


def _from_solution(sol, nfev, method, tol, extra_meta=None) -> Trajectory:
    times = np.asarray(sol.t, dtype=float)
    states = np.asarray(sol.y, dtype=float).T
    meta = {"solver": method, "tol": tol, "steps": len(times) - 1, "nfev": int(nfev)}
    meta.update(extra_meta or {})
    dense = sol.sol

    def interp(t):
        return np.asarray(dense(t)).T

    return Trajectory(times, states, interp, meta)


def solve_ivp(rhs, t_span, x0, tol: float = 1e-10, *, max_step: float = np.inf,
              method: str = "DOP853", events=None, atol: float | None = None) -> Trajectory:
    """Adaptive embedded Runge-Kutta solution with dense output.

    Local error per step is held below ``tol`` (relative, and absolute unless
    ``atol`` overrides it).
    """
    t0, t1 = (float(v) for v in t_span)
    if not t1 > t0:
        raise ValueError("t_span must satisfy t1 > t0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    sol = _scipy_solve_ivp(_guard(rhs), (t0, t1), x0, method=method, rtol=tol,
                           atol=tol if atol is None else atol,
                           max_step=max_step, dense_output=True, events=events)
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}",
                               float(sol.t[-1]), sol.y[:, -1])
    return _from_solution(sol, sol.nfev, method, tol)


def _speed_bound(F, dim, n=32):
    from .field import lattice
    pts = lattice(n if dim <= 2 else 8, dim).reshape(-1, dim)
    v = np.linalg.norm(F(pts), axis=-1)
    return max(float(v.max()), 1e-12)


def _rescale(traj: Trajectory, eps: float, extra_meta) -> Trajectory:
    """Map a fast-variable trajectory Z(s) to X(t) = eps Z(t/eps)."""
    inner = traj.interpolant

    def interp(t):
        return eps * np.asarray(inner(np.asarray(t) / eps))

    meta = dict(traj.meta)
    meta.update(extra_meta)
    return Trajectory(eps * traj.times, eps * traj.states, interp, meta)


def solve_oscillatory(F, eps: float, t_span, p, tol: float = 1e-10, *, fast: bool | None = None,
                      speed: float | None = None) -> Trajectory:
    """Solve ``dX/dt = F(X/eps)`` (or ``F(t, X/eps)`` for a callable) from ``X(t0) = p``.

    ``F`` is a :class:`PeriodicVectorField` or a callable ``F(t, u)`` where
    ``t`` is the slow time.  For ``eps < 1/8`` the problem is solved in the
    fast variable; the step is capped so that every unit period of ``F`` is
    crossed in at least 20 steps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    p = np.atleast_1d(np.asarray(p, dtype=float))
    dim = p.size
    t0, t1 = (float(v) for v in t_span)
    if fast is None:
        fast = eps < FAST_THRESHOLD
    if isinstance(F, PeriodicVectorField):
        if F.dim != dim:
            raise ValueError("initial point and field dimension differ")
        if speed is None:
            speed = _speed_bound(F, dim)
        if F.switching is not None:
            return _solve_switching(F, eps, (t0, t1), p, tol, speed)
        field_fn = F.fn
        velocity = lambda t, u: field_fn(u)  # noqa: E731
    else:
        velocity = F
        if speed is None:
            speed = 1.0
    meta = {"eps": eps, "fast": bool(fast)}
    if fast:
        def rhs(s, z):
            return velocity(eps * s, z)
        traj = solve_ivp(rhs, (t0 / eps, t1 / eps), p / eps, tol=tol, atol=tol / eps,
                         max_step=1.0 / (STEPS_PER_PERIOD * speed))
        return _rescale(traj, eps, meta)

    def rhs(t, x):
        return velocity(t, x / eps)

    traj = solve_ivp(rhs, (t0, t1), p, tol=tol, max_step=eps / (STEPS_PER_PERIOD * speed))
    traj.meta.update(meta)
    return traj


# ---------------------------------------------------------------------------
# Piecewise fields with coordinate-threshold switching
# ---------------------------------------------------------------------------

_CLAMP = 1e-9


def _region_rhs(F, axis, lo, hi):
    """F evaluated with the switching coordinate clamped inside [lo, hi]."""
    span = hi - lo
    fn = F.fn

    def rhs(s, z):
        zc = np.array(z, dtype=float)
        zc[axis] = min(max(zc[axis], lo + _CLAMP * span), hi - _CLAMP * span)
        return fn(zc)

    return rhs


def _solve_switching(F, eps, t_span, p, tol, speed, max_events: int = 1_000_000) -> Trajectory:
    axis, spacing = F.switching
    s0, s1 = t_span[0] / eps, t_span[1] / eps
    z = p / eps
    s = s0
    ts, ys, interps, n_events, n_slide = [s0], [z.copy()], [], 0, 0
    max_step = 1.0 / (STEPS_PER_PERIOD * speed)

    def region_of(zi, direction):
        k = np.floor(zi / spacing)
        if np.isclose(zi / spacing, np.round(zi / spacing), rtol=0, atol=1e-12):
            k = np.round(zi / spacing) - (1 if direction < 0 else 0)
        return k * spacing, (k + 1) * spacing

    direction = np.sign(F.fn(z)[axis]) or 1.0
    lo, hi = region_of(z[axis], direction)
    sliding = None  # (boundary, rhs) while held on a threshold

    while s < s1:
        if n_events > max_events:
            raise IntegrationError("too many switching events", s * eps, eps * z)
        if sliding is None:
            rhs = _region_rhs(F, axis, lo, hi)
            ev_lo = lambda t, y, lo=lo: y[axis] - lo  # noqa: E731
            ev_hi = lambda t, y, hi=hi: y[axis] - hi  # noqa: E731
            ev_lo.terminal, ev_lo.direction = True, -1
            ev_hi.terminal, ev_hi.direction = True, 1
            events = [ev_lo, ev_hi]
        else:
            boundary, rhs, exit_ev = sliding
            events = [exit_ev]
        sol = _scipy_solve_ivp(_guard(rhs), (s, s1), z, method="DOP853", rtol=tol, atol=tol / eps,
                               max_step=max_step, dense_output=True, events=events)
        if sol.status == -1:
            raise IntegrationError(f"integration failed: {sol.message}", s * eps, eps * z)
        ts.extend(sol.t[1:])
        ys.extend(sol.y[:, 1:].T)
        interps.extend(sol.sol.interpolants)
        s, z = float(sol.t[-1]), sol.y[:, -1].copy()
        if sol.status != 1:
            break
        n_events += 1
        if sliding is not None:
            # one side stopped opposing the threshold: leave the sliding mode
            sliding = None
            direction = np.sign(F.fn(z)[axis]) or 1.0
            lo, hi = region_of(z[axis], direction)
            continue
        hit_hi = len(sol.t_events[1]) > 0
        boundary = hi if hit_hi else lo
        z[axis] = boundary
        ys[-1] = z.copy()
        incoming = np.sign(boundary - (lo + hi) / 2.0)
        new_lo, new_hi = (hi, hi + spacing) if hit_hi else (lo - spacing, lo)
        rhs_in = _region_rhs(F, axis, lo, hi)
        rhs_new = _region_rhs(F, axis, new_lo, new_hi)
        v_new = rhs_new(s, z)[axis]
        if v_new * incoming > 0:
            lo, hi = new_lo, new_hi
            continue
        # Filippov sliding: convex combination with zero normal velocity
        n_slide += 1

        def slide_rhs(t, y, rhs_in=rhs_in, rhs_new=rhs_new, b=boundary):
            yb = np.array(y, dtype=float)
            yb[axis] = b
            fi, fn_ = rhs_in(t, yb), rhs_new(t, yb)
            denom = fi[axis] - fn_[axis]
            alpha = 0.0 if denom == 0 else -fn_[axis] / denom
            v = alpha * fi + (1.0 - alpha) * fn_
            v[axis] = 0.0
            return v

        def exit_ev(t, y, rhs_in=rhs_in, rhs_new=rhs_new, b=boundary, sgn=incoming):
            # stays positive while the incoming side pushes into the threshold
            # and the far side does not pull away from it
            yb = np.array(y, dtype=float)
            yb[axis] = b
            vi, vn = rhs_in(t, yb)[axis] * sgn, rhs_new(t, yb)[axis] * sgn
            return min(vi, -vn) + 1e-14

        exit_ev.terminal, exit_ev.direction = True, -1
        sliding = (boundary, slide_rhs, exit_ev)

    times = np.asarray(ts, dtype=float)
    states = np.asarray(ys, dtype=float)
    keep = np.concatenate([[True], np.diff(times) > 0])
    times, states = times[keep], states[keep]
    good = [ip for ip in interps if ip.t_max > ip.t_min]
    sol = OdeSolution(times, good) if len(good) == len(times) - 1 else None
    if sol is None:
        inner = CubicHermiteSpline(times, states, np.gradient(states, times, axis=0), axis=0)
    else:
        def inner(s_):
            return np.asarray(sol(s_)).T

    fast_traj = Trajectory(times, states, inner,
                           {"solver": "DOP853+switching", "tol": tol, "steps": len(times) - 1,
                            "events": n_events, "sliding_segments": n_slide})
    return _rescale(fast_traj, eps, {"eps": eps, "fast": True})


# ---------------------------------------------------------------------------
# Fixed-step oracle
# ---------------------------------------------------------------------------


def rk4(rhs, t_span, x0, h: float) -> Trajectory:
    """Classical fixed-step fourth-order Runge-Kutta with cubic Hermite dense output."""
    t0, t1 = (float(v) for v in t_span)
    n = int(np.ceil((t1 - t0) / h - 1e-9))
    h = (t1 - t0) / n
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    times = t0 + h * np.arange(n + 1)
    states = np.empty((n + 1, x.size))
    derivs = np.empty_like(states)
    states[0] = x
    k1 = np.asarray(rhs(t0, x), dtype=float)
    for i in range(n):
        t = times[i]
        derivs[i] = k1
        k2 = np.asarray(rhs(t + h / 2, x + h / 2 * k1), dtype=float)
        k3 = np.asarray(rhs(t + h / 2, x + h / 2 * k2), dtype=float)
        k4 = np.asarray(rhs(t + h, x + h * k3), dtype=float)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise IntegrationError("non-finite oracle state", float(times[i]), states[i])
        states[i + 1] = x
        k1 = np.asarray(rhs(times[i + 1], x), dtype=float)
    derivs[n] = k1
    spline = CubicHermiteSpline(times, states, derivs, axis=0)
    return Trajectory(times, states, spline, {"solver": "rk4", "h": h, "steps": n})


def oracle_solve(F, eps: float, t_span, p, h_step: float) -> Trajectory:
    """Fixed-step RK4 directly on ``dX/dt = F(X/eps)``; requires ``h_step <= eps/1000``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if h_step > eps / 1000 * (1 + 1e-12):
        raise ValueError("oracle step must satisfy h_step <= eps/1000")
    if isinstance(F, PeriodicVectorField):
        fn = F.fn
        rhs = lambda t, x: fn(x / eps)  # noqa: E731
    else:
        rhs = lambda t, x: F(t, x / eps)  # noqa: E731
    traj = rk4(rhs, t_span, p, h_step)
    traj.meta["eps"] = eps
    return traj

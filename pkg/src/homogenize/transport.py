"""The 1-D transport equation  v_t + H(x/eps) v_x = 0.

The solution is constant along characteristics dx/dt = H(x/eps), so
v(x, t) = v0(foot) where foot is where the characteristic through (x, t)
started.  Because H does not depend on t, every characteristic is a time
shift of a single master characteristic, which gives all feet from one ODE
solve.  The homogenized solution is the travelling wave v0(x - c t) with the
harmonic-mean speed c = 1 / mean(1/H).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar

from .averaging import running_integral
from .field import PeriodicScalarField, PeriodicVectorField, positivity_bounds
from .homog1d import invert_trajectory, periodic_mean_1d, solve_eps_1d
from .integrate import IntegrationError, solve_ivp
from .report import ConvergenceReport, fit_rate
from .workers import ordered_map


@dataclass(frozen=True)
class TransportProblem:
    H: PeriodicScalarField
    v0: object
    v0_lipschitz: float
    grid: np.ndarray
    T: float = 1.0
    bounds: tuple = dc_field(default=(0.0, 0.0))

    def __post_init__(self):
        if self.H.dim != 1:
            raise ValueError("transport speed must be one-dimensional")
        lo, hi = positivity_bounds(self.H, grid_n=1024)
        if not np.isfinite(self.v0_lipschitz) or self.v0_lipschitz < 0:
            raise ValueError("initial profile needs a finite Lipschitz constant")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "bounds", (lo, hi))

    @property
    def speed(self) -> float:
        """Homogenized speed c = 1 / mean(1/H)."""
        return 1.0 / periodic_mean_1d(self.H.reciprocal())

    def v_homogenized(self, t: float) -> np.ndarray:
        return np.asarray(self.v0(self.grid - self.speed * t), dtype=float)


def sine_problem(H: PeriodicScalarField, n: int = 3001, T: float = 1.0) -> TransportProblem:
    """v0 = sin(2 pi x) on a grid of [0, 1).

    An odd number of points keeps the fast phases x/eps spread over the whole
    cell for dyadic eps.
    """
    return TransportProblem(H, lambda x: np.sin(2.0 * np.pi * np.asarray(x)), 2.0 * np.pi,
                            np.arange(n) / n, T)


@dataclass
class TransportSnapshot:
    x: np.ndarray
    t: float
    eps: float
    v: np.ndarray
    foot: np.ndarray
    failed: np.ndarray

    def to_csv(self, path, v_ref=None) -> None:
        v_ref = np.full_like(self.v, np.nan) if v_ref is None else np.asarray(v_ref)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "v_eps", "v0", "abs_diff"])
            for row in zip(self.x, self.v, v_ref, np.abs(self.v - v_ref)):
                w.writerow([repr(float(c)) for c in row])


def _master_feet(prob: TransportProblem, eps: float, t, x, tol: float) -> np.ndarray:
    """Feet of the characteristics through (x, t) for one or several times t.

    Returns an array of shape ``t.shape + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    G = prob.H.reciprocal()
    M = periodic_mean_1d(G)
    g_max = 1.0 / prob.bounds[0]
    # feet lie within eps * max(G) / M of the homogenized feet x - t / M
    start = float(x.min()) - float(t_arr.max()) / M - 2.0 * eps * (1.0 + g_max / M)
    # crossing a distance D takes at most M D + eps max(G)
    tau_end = M * (float(x.max()) - start) + 2.0 * eps * g_max
    master = solve_eps_1d(G, eps, start, tau_end, tol=tol)
    tau_of = invert_trajectory(master)
    tau_x = np.asarray(tau_of(x))[..., 0]
    feet = np.asarray(master(tau_x[None, :] - t_arr[:, None]))[..., 0]
    return feet.reshape(np.shape(t) + x.shape)


def _mirrored(G: PeriodicScalarField) -> PeriodicScalarField:
    fn = G.fn
    return PeriodicScalarField(1, lambda u, t=0.0: fn(-np.asarray(u), t), name=f"mirror({G.name})",
                               kinks=G.kinks)


def _direct_foot(prob: TransportProblem, eps: float, t: float, x: float, tol: float) -> float:
    # backward characteristic dy/ds = -H(y/eps); w = -y runs forward with H(-w/eps)
    w = solve_eps_1d(_mirrored(prob.H.reciprocal()), eps, -x, t, tol=tol)
    return -float(w.states[-1, 0])


def transport_solve_eps(prob: TransportProblem, eps: float, t: float, method: str = "master",
                        tol: float = 1e-10, workers: int = 1) -> TransportSnapshot:
    """v^eps(., t) on the problem grid by tracing characteristics back to t = 0."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0.0 <= t <= prob.T:
        raise ValueError("t must lie in [0, T]")
    x = prob.grid
    failed = np.zeros(x.size, dtype=bool)
    if t == 0.0:
        foot = x.copy()
    elif method == "master":
        foot = _master_feet(prob, eps, t, x, tol)
    elif method == "direct":
        def one(xi):
            try:
                return _direct_foot(prob, eps, t, xi, tol)
            except IntegrationError:
                return np.nan
        foot = np.array(ordered_map(one, x, workers))
        failed = ~np.isfinite(foot)
    else:
        raise ValueError(f"unknown method {method!r}")
    v = np.full(x.size, np.nan)
    v[~failed] = prob.v0(foot[~failed])
    return TransportSnapshot(x.copy(), t, eps, v, foot, failed)


def delta_all_phases(G: PeriodicScalarField, eps: float, S: float, per_unit: int = 4096) -> float:
    """eps sup_{u0} sup_{0 <= s <= S/eps} |int_{u0}^{u0+s} (G - M(G))|.

    Once S/eps covers a full period this is eps times the oscillation of the
    running integral over one period.
    """
    M = periodic_mean_1d(G)
    span = S / eps
    reach = min(span, 1.0)
    edges, I = running_integral(lambda u, _x: G(u), M, 0.0, 1.0 + reach, per_unit=per_unit)
    if span >= 1.0:
        one = edges <= 1.0
        return eps * float(I[one].max() - I[one].min())
    n = int(np.searchsorted(edges, 1.0))
    w = int(np.floor(reach * per_unit))
    best = 0.0
    for k in range(0, n, 4):
        best = max(best, float(np.abs(I[k:k + w + 1] - I[k]).max()))
    return eps * best


def _window_times(prob: TransportProblem, eps: float, t: float, n_times: int) -> np.ndarray:
    period = eps * periodic_mean_1d(prob.H.reciprocal())
    return np.linspace(max(0.0, t - period), t, n_times)


def window_error(prob: TransportProblem, eps: float, t: float, n_times: int = 32,
                 tol: float = 1e-10) -> float:
    """sup of |v^eps - v0(. - c s)| over the grid and over s in one cell-crossing window ending at t.

    At a fixed time the error depends on how far the characteristics are
    through their current cell; at whole multiples of the crossing time it
    nearly vanishes.  Taking the sup over one crossing time removes that
    arithmetic coincidence.
    """
    times = _window_times(prob, eps, t, n_times)
    feet = _master_feet(prob, eps, times, prob.grid, tol)
    return _window_sup(prob, times, feet)


def _window_sup(prob, times, feet) -> float:
    v = prob.v0(feet)
    v_hom = prob.v0(prob.grid[None, :] - prob.speed * times[:, None])
    return float(np.abs(v - v_hom).max())


def transport_error(prob: TransportProblem, eps_ladder, t: float | None = None, slack: float = 3.0,
                    method: str = "master", tol: float = 1e-10, workers: int = 1,
                    slope_window=(0.9, 1.1), window: bool = True) -> ConvergenceReport:
    """sup over the grid of |v^eps(., t) - v0(. - c t)| for each eps.

    The reference is Lip(v0) delta(eps), with delta taken over all starting
    phases of the characteristic.  With ``window`` the sup over one crossing
    time ending at t is added as the extra column ``error_window``, together
    with its fitted slope in the metadata.
    """
    t = prob.T if t is None else float(t)
    eps_ladder = [float(e) for e in eps_ladder]
    if len(eps_ladder) < 4 or any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing with at least 4 entries")
    c = prob.speed
    v_hom = prob.v_homogenized(t)
    G = prob.H.reciprocal()
    reach = prob.bounds[1] * t

    def one(eps):
        d = delta_all_phases(G, eps, reach)
        if method == "master" and t > 0:
            # one master solve serves the fixed time and the crossing window
            times = _window_times(prob, eps, t, 32) if window else np.array([t])
            feet = _master_feet(prob, eps, times, prob.grid, tol)
            err = float(np.abs(prob.v0(feet[-1]) - v_hom).max())
            win = _window_sup(prob, times, feet) if window else np.nan
            return err, d, 0, win
        snap = transport_solve_eps(prob, eps, t, method=method, tol=tol)
        ok = ~snap.failed
        err = float(np.abs(snap.v[ok] - v_hom[ok]).max()) if ok.any() else np.nan
        win = window_error(prob, eps, t, tol=tol) if window and t > 0 else np.nan
        return err, d, int(snap.failed.sum()), win

    out = ordered_map(one, eps_ladder, workers)
    errors = np.array([o[0] for o in out])
    deltas = np.array([o[1] for o in out])
    ref = prob.v0_lipschitz * deltas
    M = 1.0 / c
    theta = np.mod(t / (np.array(eps_ladder) * M), 1.0)
    meta = {"t": t, "speed": c, "v0_lipschitz": prob.v0_lipschitz, "method": method, "tol": tol,
            "grid_points": int(prob.grid.size), "failures": [o[2] for o in out],
            "field": prob.H.name, "field_params": dict(prob.H.params)}
    extra = {"delta": deltas, "crossing_phase": theta}
    if window and t > 0:
        win = np.array([o[3] for o in out])
        extra["error_window"] = win
        meta["slope_window_error"] = fit_rate(eps_ladder, win)[0]
    return ConvergenceReport("transport", eps_ladder, errors, ref, "lip*delta", slack=slack,
                             slope_window=slope_window, extra_columns=extra, meta=meta)


def characteristic_constancy(prob: TransportProblem, eps: float, x0: float, n: int = 50,
                             tol: float = 1e-10) -> float:
    """Variation of v^eps along the forward characteristic from (x0, 0)."""
    H = prob.H
    times = np.linspace(0.0, prob.T, n + 1)[1:]
    traj = solve_eps_1d(H.reciprocal(), eps, x0, prob.T, tol=tol)
    v_start = float(prob.v0(np.array([x0]))[0])
    worst = 0.0
    for t in times:
        xt = float(traj(t)[0])
        sub = TransportProblem(H, prob.v0, prob.v0_lipschitz, np.array([xt]), prob.T)
        snap = transport_solve_eps(sub, eps, t, tol=tol)
        worst = max(worst, abs(float(snap.v[0]) - v_start))
    return worst


def translation_check(prob: TransportProblem, eps: float, cells: int = 1, tol: float = 1e-10):
    """Deviation of v^eps(., t) from the best translate of v0 at t = cells * (cell crossing time).

    Crossing one cell of length eps takes eps * mean(1/H), after which every
    characteristic has moved by exactly ``cells * eps``.
    Returns ``(best_shift, max_deviation)``.
    """
    t = cells * eps * periodic_mean_1d(prob.H.reciprocal())
    if t > prob.T:
        raise ValueError("requested crossing time exceeds the horizon")
    snap = transport_solve_eps(prob, eps, t, tol=tol)
    x = prob.grid

    def misfit(shift):
        return float(np.abs(snap.v - prob.v0(x - shift)).max())

    guess = cells * eps
    res = minimize_scalar(misfit, bounds=(guess - eps, guess + eps), method="bounded",
                          options={"xatol": 1e-13})
    return float(res.x), float(res.fun)


def counterexample_demo(p=(0.3, 0.0), eps_list=(1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256),
                        T: float = 1.0) -> dict:
    """Endpoints X^eps(T) for F = (0, sin 2 pi x1).

    X1 stays at p1 and X2 moves with speed sin(2 pi p1 / eps), so the
    endpoints keep jumping as eps shrinks: there is no limit to certify.
    """
    from .field import shear_counterexample

    F: PeriodicVectorField = shear_counterexample()
    p = np.asarray(p, dtype=float)
    ends = []
    for eps in eps_list:
        traj = solve_ivp(lambda t, x, e=eps: F(x / e), (0.0, T), p, tol=1e-10)
        ends.append(traj.states[-1].tolist())
    ends = np.array(ends)
    predicted = p[1] + T * np.sin(2.0 * np.pi * p[0] / np.array(eps_list))
    return {"eps": list(map(float, eps_list)), "endpoints": ends.tolist(),
            "predicted_x2": predicted.tolist(),
            "x2_spread": float(ends[:, 1].max() - ends[:, 1].min()), "certified": False}

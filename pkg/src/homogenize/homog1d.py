"""One-dimensional homogenization: dX/dt = 1/G(t, X/eps).

The trajectory is strictly increasing, so it can be inverted to
``t = h(xi)`` which solves the slowly varying system dh/dxi = G(h, xi/eps).
Averaging that system in its fast argument and inverting back gives the
homogenized trajectory X0.

Fields follow the :class:`~homogenize.field.ScalarField` call convention
``G(u, t)``: ``u`` is the fast (spatial) argument and ``t`` the slow time.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .averaging import delta_of_eps, integrate_fast
from .field import PeriodicVectorField, PositivityError, ScalarField, positivity_bounds
from .integrate import Trajectory, solve_ivp, solve_oscillatory
from .report import ConvergenceReport, fit_rate
from .roots import bracketed_newton
from .workers import ordered_map


class InversionError(ValueError):
    """The trajectory is not strictly increasing and cannot be inverted."""

    def __init__(self, index, t, value):
        self.index, self.t, self.value = index, t, value
        super().__init__(f"trajectory not strictly increasing at node {index} (t={t!r}, x={value!r})")


def _check_positive(G: ScalarField, T: float) -> tuple[float, float]:
    times = np.linspace(0.0, T, 17) if G.time_dependent else None
    lam, Lam = positivity_bounds(G, grid_n=512, times=times)
    return lam, Lam


def solve_eps_1d(G: ScalarField, eps: float, p: float, T: float, tol: float = 1e-10) -> Trajectory:
    """Trajectory of dX/dt = 1/G(t, X/eps), X(0) = p, on [0, T]."""
    if G.dim != 1:
        raise ValueError("G must be one-dimensional")
    lam, _ = _check_positive(G, T)
    if not G.time_dependent:
        # every fast period is crossed in time exactly M(G), so 1/M(G) is
        # the speed that gives STEPS_PER_PERIOD steps per period
        speed = 1.0 / periodic_mean_1d(G)
        if G.kinks:
            # piecewise-smooth profile: restart the integrator at every kink
            F = PeriodicVectorField(1, lambda x: 1.0 / G(x)[..., None], name=f"1/{G.name}",
                                    switching=(0, float(G.kinks)))
            return solve_oscillatory(F, eps, (0.0, T), [p], tol=tol, speed=speed)
    else:
        speed = 1.0 / lam

    def velocity(t, u):
        return np.atleast_1d(1.0 / G(u, t))

    return solve_oscillatory(velocity, eps, (0.0, T), [p], tol=tol, speed=speed)


def invert_trajectory(traj: Trajectory, derivative=None) -> Trajectory:
    """Inverse function h of a strictly increasing scalar trajectory.

    The result maps state values back to times: ``h(traj(t)) = t``.  Node
    values are exact; between nodes the dense output of ``traj`` is inverted
    by bracketed Newton (when ``derivative(t)`` is supplied) or secant steps.
    """
    if traj.dim != 1:
        raise ValueError("only scalar trajectories can be inverted")
    x = traj.states[:, 0]
    dx = np.diff(x)
    bad = np.flatnonzero(~(dx > 0))
    if bad.size:
        k = int(bad[0]) + 1
        raise InversionError(k, float(traj.times[k]), float(x[k]))
    times = traj.times
    fn = lambda t: np.asarray(traj(t))[..., 0]  # noqa: E731

    def interp(xi):
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi).ravel()
        if np.any(flat < x[0] - 1e-12 * max(1, abs(x[0]))) or np.any(flat > x[-1] + 1e-12 * max(1, abs(x[-1]))):
            raise ValueError("value outside the range of the trajectory")
        flat = np.clip(flat, x[0], x[-1])
        k = np.clip(np.searchsorted(x, flat, side="right") - 1, 0, len(x) - 2)
        out = bracketed_newton(fn, derivative, flat, times[k], times[k + 1], x[k], x[k + 1])
        exact = flat == x[k]
        out[exact] = times[k][exact]
        out[flat == x[-1]] = times[-1]
        res = out.reshape(np.shape(xi) + (1,))
        return res

    meta = dict(traj.meta)
    meta["inverse_of"] = traj.meta.get("solver", "trajectory")
    return Trajectory(x.copy(), times[:, None].copy(), interp, meta)


@dataclass(frozen=True)
class Homogenized1D:
    """Averaged system: G0(t), its solution h0(xi) and the inverse X0(t).

    ``beta`` is set when G does not depend on t (then X0 = p + beta t).
    Unpacks as ``(X0, beta)``.
    """

    X0: object
    beta: float | None
    G0: object
    h0: Trajectory | None
    p: float
    T: float

    def __iter__(self):
        return iter((self.X0, self.beta))


def periodic_mean_1d(G: ScalarField, t: float = 0.0, tol: float = 1e-13) -> float:
    """Mean of G(., t) over one period by adaptive Gauss-Legendre."""
    return integrate_fast(G, t, 0.0, 1.0, tol=tol, width=1.0 / 16)


def homogenized_1d(G: ScalarField, p: float, T: float, tol: float = 1e-11) -> Homogenized1D:
    """Solve dh0/dxi = G0(h0), h0(p) = 0, and invert to X0 on [0, T]."""
    if not G.time_dependent:
        M = periodic_mean_1d(G)
        if not M > 0:
            raise PositivityError(M, None)
        beta = 1.0 / M

        def X0(t):
            return p + beta * np.asarray(t, dtype=float)

        return Homogenized1D(X0, beta, lambda t: np.full(np.shape(t), M), None, p, T)

    cache: dict[float, float] = {}

    def G0(t):
        key = float(t)
        if key not in cache:
            cache[key] = periodic_mean_1d(G, key)
        return cache[key]

    lam, _ = _check_positive(G, T)
    xi_max = p + 1.05 * T / lam + 1e-9
    h0 = solve_ivp(lambda xi, h: np.array([G0(h[0])]), (p, xi_max), [0.0], tol=tol)
    G0v = np.vectorize(G0, otypes=[float])
    X_of_t = invert_trajectory(h0, derivative=lambda xi: G0v(np.asarray(h0(xi))[..., 0]))

    def X0(t):
        return np.asarray(X_of_t(t))[..., 0]

    return Homogenized1D(X0, None, G0v, h0, p, T)


@dataclass
class Homog1DResult:
    X_eps: Trajectory
    h_eps: Trajectory
    X0: object
    beta: float | None
    error: float
    eps: float
    meta: dict = dc_field(default_factory=dict)


def sample_times(traj: Trajectory, T: float, eps: float, per_period: int = 64, t0: float = 0.0) -> np.ndarray:
    """Uniform grid with ``per_period`` points per unit of t/eps, merged with the solver nodes."""
    n = max(2000, int(np.ceil(per_period * (T - t0) / eps)))
    grid = np.linspace(t0, T, n + 1)
    nodes = traj.times[(traj.times >= t0) & (traj.times <= T)]
    return np.union1d(grid, nodes)


def pipeline_1d(G: ScalarField, eps: float, p: float, T: float, tol: float = 1e-10,
                homog: Homogenized1D | None = None) -> Homog1DResult:
    """Solve, invert, average and compare for a single eps."""
    X = solve_eps_1d(G, eps, p, T, tol=tol)
    h = invert_trajectory(X, derivative=lambda t: 1.0 / G(np.asarray(X(t))[..., 0] / eps, t))
    homog = homog or homogenized_1d(G, p, T)
    t = sample_times(X, T, eps)
    err = float(np.max(np.abs(X(t)[:, 0] - homog.X0(t))))
    return Homog1DResult(X, h, homog.X0, homog.beta, err, eps, {"samples": int(t.size)})


def delta_inverted(G: ScalarField, eps: float, p: float, S: float, T: float, n_D: int = 64) -> float:
    """delta(eps) of the inverted system dh/dxi = G(h, xi/eps) started at xi = p.

    The fast argument starts at p/eps, so the running integral is shifted
    accordingly; xi - p ranges over [0, S].
    """
    shift = p / eps
    G_shift = lambda tau, x: G(tau + shift, x)  # noqa: E731
    if G.time_dependent:
        D = np.linspace(0.0, T, n_D)
        G0 = lambda x: periodic_mean_1d(G, x)  # noqa: E731
    else:
        D = None
        G0 = periodic_mean_1d(G)
    return delta_of_eps(G_shift, G0, D, S, eps)


def rate_1d(G: ScalarField, p: float, T: float, eps_ladder, tol: float = 1e-10,
            slack: float = 3.0, workers: int = 1, slope_window=(0.9, 1.1)) -> ConvergenceReport:
    """Sup error of X^eps against X0 over [0, T] for each eps, compared with delta(eps)."""
    eps_ladder = [float(e) for e in eps_ladder]
    if len(eps_ladder) < 4 or any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing with at least 4 entries")
    homog = homogenized_1d(G, p, T)

    def one(eps):
        res = pipeline_1d(G, eps, p, T, tol=tol, homog=homog)
        S = max(float(res.X_eps.states[-1, 0]), float(homog.X0(T))) - p
        return res.error, delta_inverted(G, eps, p, S, T)

    out = ordered_map(one, eps_ladder, workers)
    errors = np.array([o[0] for o in out])
    deltas = np.array([o[1] for o in out])
    meta = {"p": p, "T": T, "tol": tol, "beta": homog.beta, "field": G.name,
            "field_params": dict(G.params)}
    if np.all(deltas > 0) and np.all(errors > 0):
        meta["slope_vs_delta"] = float(np.polyfit(np.log(deltas), np.log(errors), 1)[0])
        meta["slope_delta_vs_eps"] = fit_rate(eps_ladder, deltas)[0]
    return ConvergenceReport("theorem1", eps_ladder, errors, deltas, "delta", slack=slack,
                             slope_window=slope_window, extra_columns={"delta": deltas}, meta=meta)

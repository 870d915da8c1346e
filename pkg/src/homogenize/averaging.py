"""Time averages, the rate function delta(eps), and the slow-system comparison.

Throughout, ``G(tau, x)`` is a vectorized callable: ``tau`` is the fast
variable (an array), ``x`` the slow parameter (a scalar).  One-dimensional
:class:`~homogenize.field.ScalarField` objects already follow this
convention, with ``x`` passed as their ``t`` argument.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar

from .integrate import solve_ivp

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X12, _GL_W12 = np.polynomial.legendre.leggauss(12)
_CHUNK = 1 << 15


class AveragingError(RuntimeError):
    """The time average did not converge."""


class QuadratureError(AveragingError):
    """Adaptive quadrature could not reach the requested accuracy."""


def _panels(G, x, a, b, nodes=_GL_X, weights=_GL_W):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    tau = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(G(tau, x), dtype=float)
    if vals.shape != tau.shape:
        vals = np.broadcast_to(vals, tau.shape)
    return (vals @ weights) * half


def integrate_fast(G, x, a: float, b: float, tol: float = 1e-10, width: float = 0.25,
                   max_refine: int = 8) -> float:
    """Integral of G(tau, x) over [a, b] by composite Gauss-Legendre with error control.

    Panels start at ``width`` and are halved until the 8- and 12-point rules
    agree within ``tol``.
    """
    if b == a:
        return 0.0
    for _ in range(max_refine + 1):
        n = max(int(np.ceil(abs(b - a) / width)), 1)
        edges = np.linspace(a, b, n + 1)
        lo = hi = 0.0
        for start in range(0, n, _CHUNK):
            e = edges[start:start + _CHUNK + 1]
            lo += _panels(G, x, e[:-1], e[1:]).sum()
            hi += _panels(G, x, e[:-1], e[1:], _GL_X12, _GL_W12).sum()
        if abs(hi - lo) <= tol:
            return float(hi)
        width /= 2.0
    raise QuadratureError(f"quadrature on [{a}, {b}] stalled at error {abs(hi - lo):.3g}")


def time_average(G, y, ell: float, tol: float = 1e-10) -> float:
    """(1/ell) * integral_0^ell G(s, y) ds with absolute error <= tol."""
    if not ell > 0:
        raise ValueError("ell must be positive")
    return integrate_fast(G, y, 0.0, ell, tol=tol * ell) / ell


def g0_limit(G, y, ell0: float = 1.0, tol: float = 1e-8, max_doublings: int = 20):
    """Limit of the time average over the ladder ell0, 2 ell0, 4 ell0, ...

    Declared converged when two successive values differ by less than ``tol``.
    Returns ``(value, ladder)`` where ladder lists ``(ell, average)`` pairs.
    """
    ladder = [(ell0, time_average(G, y, ell0))]
    for _ in range(max_doublings):
        ell = 2.0 * ladder[-1][0]
        ladder.append((ell, time_average(G, y, ell)))
        if abs(ladder[-1][1] - ladder[-2][1]) < tol:
            return ladder[-1][1], ladder
    raise AveragingError(f"time average at y={y} not converged after ell={ladder[-1][0]:g}: "
                         f"last step {abs(ladder[-1][1] - ladder[-2][1]):.3g}")


def g0_periodic(G, y, period: float = 1.0) -> float:
    """Average of G(., y) over one period."""
    return time_average(G, y, period, tol=1e-13)


def running_integral(G, G0_value: float, x, tau_max: float, per_unit: int = 64,
                     n_min: int = 512):
    """Cumulative integral I(tau) = int_0^tau [G(s, x) - G0] ds on a uniform grid.

    Returns ``(edges, I)`` with ``I[0] = 0``.
    """
    n = max(n_min, int(np.ceil(tau_max * per_unit)))
    edges = np.linspace(0.0, tau_max, n + 1)
    vals = np.empty(n)
    shifted = lambda tau, x_: np.asarray(G(tau, x_), dtype=float) - G0_value  # noqa: E731
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        vals[start:stop] = _panels(shifted, x, edges[start:stop], edges[start + 1:stop + 1])
    return edges, np.concatenate([[0.0], np.cumsum(vals)])


def _refine_peak(G, G0_value, x, edges, I, j):
    """Maximize |I| on the two panels around grid index j."""
    lo_idx = max(j - 1, 0)
    hi_idx = min(j + 1, len(edges) - 1)
    a, b = edges[lo_idx], edges[hi_idx]
    base = I[lo_idx]
    shifted = lambda tau, x_: np.asarray(G(tau, x_), dtype=float) - G0_value  # noqa: E731

    def neg_abs(tau):
        if tau <= a:
            return -abs(base)
        piece = _panels(shifted, x, np.array([a]), np.array([tau]), _GL_X12, _GL_W12)[0]
        return -abs(base + piece)

    res = minimize_scalar(neg_abs, bounds=(a, b), method="bounded", options={"xatol": 1e-10 * max(b, 1)})
    return max(abs(I[j]), -float(res.fun))


def _resolve_D(D, G0):
    if D is None:
        D = np.array([0.0])
    elif isinstance(D, tuple) and len(D) == 2 and np.isscalar(D[0]):
        D = np.linspace(float(D[0]), float(D[1]), 64)
    D = np.atleast_1d(np.asarray(D, dtype=float))
    if callable(G0):
        g0 = np.array([float(G0(x)) for x in D])
    else:
        g0 = np.atleast_1d(np.asarray(G0, dtype=float))
        if g0.size == 1:
            g0 = np.full(D.size, float(g0[0]))
        elif g0.size != D.size:
            raise ValueError(f"inconsistent G0 sampling grid: {g0.size} values for {D.size} points of D")
    return D, g0


def delta_curve(G, G0, D, T: float, eps_list, per_unit: int = 64, n_s: int = 512) -> np.ndarray:
    """delta(eps) for every eps in ``eps_list``.

    delta(eps) = sup_{x in D} sup_{s <= T} eps |int_0^{s/eps} [G(tau, x) - G0(x)] dtau|.

    ``D`` is an array of slow points, a ``(lo, hi)`` box (sampled at 64
    points) or None for x-free G.  ``G0`` is a callable, a scalar, or an array
    aligned with D.  The running integral is computed once up to
    ``T / min(eps)`` with at least ``n_s`` and at least ``per_unit`` panels
    per unit fast time, and the peak is refined locally.
    """
    eps_arr = np.atleast_1d(np.asarray(eps_list, dtype=float))
    if np.any(eps_arr <= 0) or T <= 0:
        raise ValueError("eps and T must be positive")
    D, g0 = _resolve_D(D, G0)
    out = np.zeros(eps_arr.size)
    tau_max = T / eps_arr.min()
    for x, g0x in zip(D, g0):
        edges, I = running_integral(G, g0x, x, tau_max, per_unit=per_unit, n_min=n_s)
        absI = np.abs(I)
        for k, eps in enumerate(eps_arr):
            limit = np.searchsorted(edges, T / eps, side="right")
            j = int(np.argmax(absI[:limit]))
            if j == 0:
                peak = 0.0 if absI[min(1, limit - 1)] == 0 and absI[:limit].max() == 0 else absI[j]
            else:
                sub_edges = edges[:limit]
                peak = _refine_peak(G, g0x, x, sub_edges, I[:limit], j) if j < limit - 1 else absI[j]
            out[k] = max(out[k], eps * peak)
    return out


def delta_of_eps(G, G0, D, T: float, eps: float, **kw) -> float:
    """delta(eps) for a single eps; see :func:`delta_curve`."""
    return float(delta_curve(G, G0, D, T, [eps], **kw)[0])


def bogolyubov_bound(G, G0, D, T: float, eps: float, per_unit: int = 128) -> float:
    """Delta(eps, T): the same supremum written in the stretched variable xi.

    sup_{x in D} sup_{0 <= eps xi <= T} eps |int_0^xi [G(tau, x) - G0(x)] dtau|.
    Evaluated on a grid twice as fine as :func:`delta_curve` uses by default.
    """
    D, g0 = _resolve_D(D, G0)
    best = 0.0
    for x, g0x in zip(D, g0):
        edges, I = running_integral(G, g0x, x, T / eps, per_unit=per_unit, n_min=1024)
        j = int(np.argmax(np.abs(I)))
        peak = _refine_peak(G, g0x, x, edges, I, j) if 0 < j < len(I) - 1 else abs(I[j])
        best = max(best, eps * peak)
    return best


@dataclass(frozen=True)
class BogolyubovResult:
    sup_error: float
    bound: float
    slack: float
    eps: float
    T: float

    @property
    def ratio(self) -> float:
        return self.sup_error / self.bound if self.bound > 0 else (0.0 if self.sup_error == 0 else np.inf)

    @property
    def flagged(self) -> bool:
        return self.sup_error > self.slack * self.bound


def bogolyubov_compare(G, G0, x0: float, eps: float, T: float, tol: float = 1e-11,
                       slack: float = 3.0, n_D: int = 64) -> BogolyubovResult:
    """Compare dtheta/dxi = eps G(xi, theta) with its averaged system over 0 <= eps xi <= T.

    Both systems are integrated in the slow time ``s = eps xi``.  D is the
    hull of both trajectories.
    """
    g0_fn = G0 if callable(G0) else (lambda h, c=float(G0): c)
    exact = solve_ivp(lambda s, h: np.atleast_1d(G(s / eps, h[0])), (0.0, T), [x0], tol=tol,
                      max_step=eps / 20.0)
    avg = solve_ivp(lambda s, h: np.atleast_1d(g0_fn(h[0])), (0.0, T), [x0], tol=tol)
    s = np.union1d(np.linspace(0.0, T, int(np.ceil(50 * T / eps)) + 1), exact.times)
    a, b = exact(s)[:, 0], avg(s)[:, 0]
    sup_error = float(np.abs(a - b).max())
    lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
    D = np.linspace(lo, hi, n_D) if hi > lo else np.array([lo])
    bound = bogolyubov_bound(G, G0, D, T, eps)
    return BogolyubovResult(sup_error, bound, slack, eps, T)


@dataclass(frozen=True)
class AveragingReport:
    """delta(eps) over a ladder, with the sampled average G0 and the fitted slope."""

    eps: np.ndarray
    delta: np.ndarray
    D: np.ndarray
    T: float
    G0_samples: np.ndarray
    slope: float
    extras: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eps": [float(e) for e in self.eps],
            "delta": [float(d) for d in self.delta],
            "D": [float(x) for x in self.D],
            "T": float(self.T),
            "G0": [float(g) for g in self.G0_samples],
            "slope": float(self.slope),
            **self.extras,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def averaging_report(G, G0, D, T: float, eps_list) -> AveragingReport:
    eps = np.asarray(eps_list, dtype=float)
    delta = delta_curve(G, G0, D, T, eps)
    Dr, g0 = _resolve_D(D, G0)
    positive = delta > 0
    slope = float(np.polyfit(np.log(eps[positive]), np.log(delta[positive]), 1)[0]) if positive.sum() >= 2 else float("nan")
    return AveragingReport(eps, delta, Dr, T, g0, slope)

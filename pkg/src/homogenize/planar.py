"""Planar fields with an invariant density.

For F on the 2-torus with a positive density rho solving div(rho F) = 0, the
field b = rho F is divergence free and the chart of :class:`TassaChart`,
built from running integrals of b, straightens the flow into the shear flow
dy/dt = (1, gamma) / G(y).  The limit drift is then B = (1, gamma) / M(G),
which works out to the torus mean of rho F.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import (TWO_PI, FieldError, FourierSeries, PeriodicScalarField, PeriodicVectorField,
                    fourier_of, lattice, mean_over_torus)
from .integrate import solve_ivp, solve_oscillatory
from .report import ConvergenceReport
from .roots import bracketed_newton
from .shear import CorrectorError, ResonanceError, build_corrector, diophantine_badness, line_distance
from .workers import ordered_map


class LiouvilleError(RuntimeError):
    """No band-limited density reaches the requested residual."""


class ChartError(ValueError):
    """The straightening chart cannot be built (a component of rho F changes sign)."""


class ResonanceWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# Spectral helpers on the uniform grid
# ---------------------------------------------------------------------------


def _grid(n: int) -> np.ndarray:
    return lattice(n, 2)


def _spectral_partial(values: np.ndarray, axis: int) -> np.ndarray:
    n = values.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1, 1]
    shape[axis] = n
    spec = np.fft.fft(values, axis=axis) * (1j * TWO_PI * k.reshape(shape))
    return np.fft.ifft(spec, axis=axis).real


def spectral_divergence(vec: np.ndarray) -> np.ndarray:
    """div of a periodic vector field sampled on an (n, n, 2) grid."""
    return _spectral_partial(vec[..., 0], 0) + _spectral_partial(vec[..., 1], 1)


def _real_basis_modes(max_degree: int) -> np.ndarray:
    r = np.arange(-max_degree, max_degree + 1)
    m = np.stack(np.meshgrid(r, r, indexing="ij"), -1).reshape(-1, 2)
    keep = (m[:, 0] > 0) | ((m[:, 0] == 0) & (m[:, 1] > 0))
    return m[keep]


# ---------------------------------------------------------------------------
# Invariant density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantDensity:
    rho: PeriodicScalarField
    log_density: FourierSeries
    residual: float
    normalization: float
    max_degree: int

    @property
    def mean(self) -> float:
        return 1.0


def solve_liouville(F: PeriodicVectorField, max_degree: int = 16, tol: float = 1e-8,
                    grid_n: int = 64) -> InvariantDensity:
    """Positive density rho = exp(u) / c with div(rho F) = 0.

    With rho = exp(u) the equation becomes linear, F . grad u = -div F, and is
    solved by least squares over the real Fourier modes of u up to
    ``max_degree``.  ``c`` makes the mean of rho equal to 1.  The reported
    residual is the grid maximum of |div(rho F)| computed spectrally.
    """
    if F.dim != 2:
        raise ValueError("planar fields only")
    n = max(grid_n, 4 * max_degree)
    x = _grid(n)
    Fv = F(x)
    divF = spectral_divergence(Fv)
    modes = _real_basis_modes(max_degree)
    phase = TWO_PI * (x.reshape(-1, 2) @ modes.T.astype(float))
    c, s = np.cos(phase), np.sin(phase)
    # derivative of cos(2 pi <m,x>) along F is -2 pi <m,F> sin(...), and of sin is +2 pi <m,F> cos(...)
    mF = TWO_PI * (Fv.reshape(-1, 2) @ modes.T.astype(float))
    A = np.hstack([-mF * s, mF * c])
    rhs = -divF.ravel()
    if np.max(np.abs(rhs)) == 0.0:
        coef = np.zeros(A.shape[1])
    else:
        coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    K = len(modes)
    a_cos, a_sin = coef[:K], coef[K:]
    # u = sum a_cos cos + a_sin sin  ->  complex coefficients (a_cos - i a_sin)/2 at m, conj at -m
    cm = 0.5 * (a_cos - 1j * a_sin)
    keep = np.abs(cm) > 0
    u_series = FourierSeries(2, np.vstack([modes[keep], -modes[keep]]),
                             np.concatenate([cm[keep], np.conj(cm[keep])]))
    u_vals = u_series(x)
    shift = float(u_vals.max())
    norm = float(np.exp(u_vals - shift).mean())

    def rho_fn(y, t=0.0):
        return np.exp(u_series(y) - shift) / norm

    rho = PeriodicScalarField(2, rho_fn, name="invariant_density", params={"max_degree": max_degree})
    residual = float(np.abs(spectral_divergence(rho_fn(x)[..., None] * Fv)).max())
    if residual > tol:
        raise LiouvilleError(f"density residual {residual:.3g} exceeds {tol:.3g} at degree {max_degree}")
    return InvariantDensity(rho, u_series, residual, norm * np.exp(shift), max_degree)


def unit_density() -> InvariantDensity:
    rho = PeriodicScalarField.constant(1.0, 2)
    return InvariantDensity(rho, FourierSeries(2, np.zeros((0, 2)), np.zeros(0)), 0.0, 1.0, 0)


# ---------------------------------------------------------------------------
# Straightening chart
# ---------------------------------------------------------------------------


def _restrict_axis1(series: FourierSeries, x2: float = 0.0) -> FourierSeries:
    """1-D series in x1 of the 2-D series evaluated at fixed x2."""
    table: dict[int, complex] = {}
    for m, c in zip(series.modes, series.coeffs):
        table[int(m[0])] = table.get(int(m[0]), 0.0) + c * np.exp(1j * TWO_PI * m[1] * x2)
    items = sorted(table.items())
    return FourierSeries(1, np.array([[k] for k, _ in items]), np.array([c for _, c in items]))


def _antiderivative_1d(series: FourierSeries) -> tuple[float, FourierSeries]:
    """Mean and zero-mean periodic antiderivative of a 1-D series."""
    k = series.modes[:, 0]
    mean = complex(series.coeffs[k == 0].sum()).real
    nz = k != 0
    return mean, FourierSeries(1, series.modes[nz], series.coeffs[nz] / (TWO_PI * 1j * k[nz]))


@dataclass
class TassaChart:
    """Chart y = f(x) turning dx/dt = F into dy/dt = (1, gamma) / G(y).

    f1(x) = (1/b2_bar) int_0^x1 b2(s, 0) ds
    f2(x) = (1/b1_bar) int_0^x2 b1(x1, s) ds
    """

    F: PeriodicVectorField
    rho: InvariantDensity
    b1: FourierSeries
    b2: FourierSeries
    b_bar: tuple
    gamma: float
    fit_residual: float
    _p1: FourierSeries = dc_field(repr=False)
    _c1: float = dc_field(repr=False)
    _P2: FourierSeries = dc_field(repr=False)
    _Q2: FourierSeries = dc_field(repr=False)
    _R2: FourierSeries = dc_field(repr=False)
    _b2_edge: FourierSeries = dc_field(repr=False)
    _bounds: tuple = dc_field(repr=False, default=(1.0, 1.0))
    meta: dict = dc_field(default_factory=dict)

    # f and its partial derivatives -------------------------------------

    def f1(self, x1):
        x1 = np.asarray(x1, dtype=float)
        return (self._c1 * x1 + self._p1(x1) - float(self._p1(0.0))) / self.b_bar[1]

    def f2(self, x):
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        return (self._P2(x) + self._Q2(x1) + x2 * self._R2(x1)) / self.b_bar[0]

    def f(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([self.f1(x[..., 0]), self.f2(x)], axis=-1)

    def jacobian_matrix(self, x):
        """Df from the series (no use of the divergence identity)."""
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        d11 = self._b2_edge(x1) / self.b_bar[1]
        gP = self._P2.gradient(x)
        d21 = (gP[..., 0] + self._Q2.gradient(x1)[..., 0] + x2 * self._R2.gradient(x1)[..., 0]) / self.b_bar[0]
        d22 = (gP[..., 1] + self._R2(x1)) / self.b_bar[0]
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0], out[..., 1, 0], out[..., 1, 1] = d11, d21, d22
        return out

    def jacobian(self, x):
        """(b1(x)/b1_bar) (b2(x1, 0)/b2_bar)."""
        x = np.asarray(x, dtype=float)
        return (self.b1(x) / self.b_bar[0]) * (self._b2_edge(x[..., 0]) / self.b_bar[1])

    # inverse --------------------------------------------------------------

    def g(self, y):
        """Inverse chart by monotone 1-D solves, first in x1 then in x2."""
        y = np.asarray(y, dtype=float)
        shape = y.shape
        yf = y.reshape(-1, 2)
        pad1, pad2 = self._bounds
        y1 = yf[:, 0]
        x1 = bracketed_newton(self.f1, lambda t: self._b2_edge(t) / self.b_bar[1], y1,
                              y1 - pad1, y1 + pad1)
        y2 = yf[:, 1]

        def f2_of(t):
            return self.f2(np.stack([x1, t], axis=-1))

        def d2_of(t):
            return self.b1(np.stack([x1, t], axis=-1)) / self.b_bar[0]

        x2 = bracketed_newton(f2_of, d2_of, y2, y2 - pad2, y2 + pad2)
        return np.stack([x1, x2], axis=-1).reshape(shape)

    # shear profile ----------------------------------------------------------

    def G_profile_values(self, y):
        """G(y) with 1/G(y) = (b2(g1(y), 0)/b2_bar) F1(g(y))."""
        x = self.g(y)
        return self.b_bar[1] / (self._b2_edge(x[..., 0]) * self.F(x)[..., 0])

    @property
    def G_profile(self) -> PeriodicScalarField:
        return PeriodicScalarField(2, lambda y, t=0.0: self.G_profile_values(y), name="shear_profile")

    @property
    def a(self) -> np.ndarray:
        return np.array([1.0, self.gamma])

    # diagnostics -----------------------------------------------------------

    def translation_violation(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        fx = self.f(x)
        errs = [self.f(x + e1) - fx - e1, self.f(x + e2) - fx - e2]
        return float(max(np.abs(e).max() for e in errs))

    def bbar_constancy(self, n: int = 64) -> float:
        """Variation of int_0^1 b1(x1, s) ds over x1 and of int_0^1 b2(s, x2) ds over x2."""
        s = np.arange(n) / n
        col = self._R2(s)
        m2 = self.b2.modes[:, 0] == 0
        row = FourierSeries(1, self.b2.modes[m2][:, 1:], self.b2.coeffs[m2])(s)
        return float(max(np.abs(col - self.b_bar[0]).max(), np.abs(row - self.b_bar[1]).max()))

    def flow_gamma(self, n: int = 32) -> tuple[float, float]:
        """Mean and spread of (Df F)_2 / (Df F)_1 on a grid."""
        x = _grid(n).reshape(-1, 2)
        v = np.einsum("...ij,...j->...i", self.jacobian_matrix(x), self.F(x))
        ratio = v[:, 1] / v[:, 0]
        return float(ratio.mean()), float(ratio.max() - ratio.min())

    def to_csv(self, path, n: int = 32) -> None:
        x = _grid(n).reshape(-1, 2)
        fx = self.f(x)
        gx = self.g(x)
        G = self.G_profile_values(x)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2", "f1", "f2", "g1", "g2", "G_profile"])
            for row in zip(x[:, 0], x[:, 1], fx[:, 0], fx[:, 1], gx[:, 0], gx[:, 1], G):
                w.writerow([repr(float(v)) for v in row])


def _b_field(F, rho):
    rfn = rho.rho
    comps = []
    for i in range(2):
        comps.append(PeriodicScalarField(2, lambda x, t=0.0, i=i: rfn(x) * F(x)[..., i], name=f"b{i + 1}"))
    return comps


def build_tassa_chart(F: PeriodicVectorField, rho: InvariantDensity | None = None, grid_n: int = 128,
                      max_degree: int | None = None, fit_tol: float = 1e-9) -> TassaChart:
    """Fourier construction of the straightening chart for b = rho F."""
    if F.dim != 2:
        raise ValueError("planar fields only")
    rho = rho or unit_density()
    deg = max_degree or grid_n // 4
    b1f, b2f = _b_field(F, rho)
    x = _grid(grid_n)
    for i, comp in enumerate((b1f, b2f)):
        vals = comp(x)
        if vals.min() * vals.max() <= 0:
            k = np.unravel_index(np.argmin(np.abs(vals)), vals.shape)
            raise ChartError(f"component b{i + 1} of rho F changes sign near x = {x[k].tolist()}")
    b1 = fourier_of(b1f, deg, grid_n=grid_n)
    b2 = fourier_of(b2f, deg, grid_n=grid_n)
    fit_residual = max(b1.residual, b2.residual)
    if fit_residual > fit_tol:
        warnings.warn(f"Fourier fit of rho F has residual {fit_residual:.3g}", RuntimeWarning, stacklevel=2)
    b1_bar, b2_bar = b1.mean, b2.mean
    if b1_bar == 0 or b2_bar == 0:
        raise ChartError("rho F has a component with zero mean")
    edge = _restrict_axis1(b2, 0.0)
    c1, p1 = _antiderivative_1d(edge)
    # f2 pieces: modes with m2 != 0 integrate to A e^{2 pi i <m,x>} - A e^{2 pi i m1 x1}
    m2 = b1.modes[:, 1]
    nz = m2 != 0
    A = b1.coeffs[nz] / (TWO_PI * 1j * m2[nz])
    P2 = FourierSeries(2, b1.modes[nz], A)
    q: dict[int, complex] = {}
    for m, c in zip(b1.modes[nz], A):
        q[int(m[0])] = q.get(int(m[0]), 0.0) - c
    Q2 = FourierSeries(1, np.array([[k] for k in sorted(q)]).reshape(-1, 1), np.array([q[k] for k in sorted(q)]))
    R2 = FourierSeries(1, b1.modes[~nz][:, :1], b1.coeffs[~nz])
    chart = TassaChart(F, rho, b1, b2, (b1_bar, b2_bar), b2_bar / b1_bar, fit_residual,
                       p1, c1, P2, Q2, R2, edge)
    s = np.arange(grid_n) / grid_n
    pad1 = float(np.abs(chart.f1(s) - s).max()) + 0.5
    pad2 = float(np.abs(chart.f2(x) - x[..., 1]).max()) + 0.5
    chart._bounds = (pad1, pad2)
    chart.meta = {"grid_n": grid_n, "max_degree": deg, "b_bar": [b1_bar, b2_bar]}
    return chart


# ---------------------------------------------------------------------------
# Rotation number and drift
# ---------------------------------------------------------------------------


def _long_run(F, p, T, tol=1e-10):
    return solve_ivp(lambda t, x: F(x), (0.0, 2.0 * T), p, tol=tol)


def rotation_number_empirical(F: PeriodicVectorField, T_long: float = 1000.0, p=None,
                              tol: float = 1e-10) -> float:
    """(x2(T) - p2) / (x1(T) - p1) for the eps = 1 flow, Richardson-extrapolated from T and 2T."""
    p = np.zeros(2) if p is None else np.asarray(p, dtype=float)
    traj = _long_run(F, p, T_long, tol)
    r = []
    for T in (T_long, 2.0 * T_long):
        d = traj(T) - p
        if d[0] == 0:
            raise FieldError("first coordinate does not advance; rotation number undefined")
        r.append(d[1] / d[0])
    return float(2.0 * r[1] - r[0])


@dataclass(frozen=True)
class DriftResult:
    B: np.ndarray
    gamma: float
    gamma_flow: float
    gamma_empirical: float
    M: float
    B_arithmetic: np.ndarray
    B_long_time: np.ndarray
    resonant: bool
    diophantine: dict
    p_spread: float | None = None

    def to_dict(self) -> dict:
        return {"B": self.B.tolist(), "gamma": self.gamma, "gamma_flow": self.gamma_flow,
                "gamma_empirical": self.gamma_empirical, "M": self.M,
                "B_arithmetic": self.B_arithmetic.tolist(), "B_long_time": self.B_long_time.tolist(),
                "resonant": self.resonant, "diophantine": self.diophantine, "p_spread": self.p_spread}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def profile_mean_y(chart: TassaChart, n: int = 128) -> float:
    y = _grid(n)
    return float(chart.G_profile_values(y).mean())


def effective_drift(F: PeriodicVectorField, rho: InvariantDensity | None = None,
                    chart: TassaChart | None = None, T_long: float = 1000.0, p=None,
                    starts: int = 0) -> DriftResult:
    """B = (1, gamma) / M(G) from the chart, with independent cross-checks.

    Cross-checks: the empirical rotation number, the arithmetic mean of rho F
    and the long-time drift (X(T) - p)/T at eps = 1.  A rational gamma
    triggers a :class:`ResonanceWarning`; ``starts > 0`` then measures the
    spread of long-time drifts over that many starting points.
    """
    rho = rho or unit_density()
    chart = chart or build_tassa_chart(F, rho)
    p = np.zeros(2) if p is None else np.asarray(p, dtype=float)
    M = profile_mean_y(chart)
    B = chart.a / M
    gamma_flow, _ = chart.flow_gamma()
    gamma_emp = rotation_number_empirical(F, T_long, p)
    traj = _long_run(F, p, T_long)
    B_long = (traj(2.0 * T_long) - traj(T_long)) / T_long
    dio = diophantine_badness(chart.a)
    resonant = dio.resonant or _near_rational(chart.gamma)
    spread = None
    if resonant:
        warnings.warn(f"rotation number {chart.gamma:.12g} is rational: the limit may depend on p",
                      ResonanceWarning, stacklevel=2)
    if starts:
        drifts = []
        for q in lattice(int(np.ceil(np.sqrt(starts))), 2).reshape(-1, 2)[:starts]:
            tr = solve_ivp(lambda t, x: F(x), (0.0, T_long), q, tol=1e-10)
            drifts.append((tr(T_long) - q) / T_long)
        drifts = np.array(drifts)
        spread = float(np.abs(drifts - drifts.mean(axis=0)).max())
    B_arith = np.array([mean_over_torus(PeriodicScalarField(2, lambda x, t=0.0, i=i: rho.rho(x) * F(x)[..., i]),
                                        grid_n=128) for i in range(2)])
    return DriftResult(B, chart.gamma, gamma_flow, gamma_emp, M, B_arith, B_long, bool(resonant),
                       dio.to_dict(), spread)


def _near_rational(x: float, q_max: int = 50, tol: float = 1e-12) -> bool:
    q = np.arange(1, q_max + 1)
    return bool(np.any(np.abs(q * x - np.round(q * x)) < tol))


# ---------------------------------------------------------------------------
# Convergence
# ---------------------------------------------------------------------------


def chart_constant(chart: TassaChart, n: int = 64) -> float | None:
    """K with |X^eps(t) - (p + B t)| <= K eps, via the chart and the shear corrector.

    K = 2 sup|f - id| + 2 (|(1, gamma)| / M) sup|phi|.  None when the
    profile has a resonant mode.
    """
    s = _grid(n)
    periodic = chart.f(s) - s
    P = float(np.abs(periodic).max())
    G = chart.G_profile
    try:
        series = fourier_of(G, 16)
        corr = build_corrector(series, chart.a, tol=max(1e-8, 10 * series.residual))
    except (ResonanceError, CorrectorError):
        return None
    M = series.mean
    return 2.0 * P + 2.0 * np.linalg.norm(chart.a) / M * corr.sup_phi


def planar_convergence(F: PeriodicVectorField, p=None, T: float = 1.0, eps_ladder=(), t0: float = 0.1,
                       tol: float = 1e-10, rho: InvariantDensity | None = None, slack: float = 3.0,
                       allow_resonant: bool = False, p_spread_tol: float = 1e-2, workers: int = 1,
                       slope_window=(0.85, 1.15)) -> ConvergenceReport:
    """sup over [t0, T] of |X^eps - (p + B t)| for each eps.

    The reference column is K eps with K from :func:`chart_constant` (eps
    itself when no corrector exists).  A second error column over [0, T]
    records the sensitivity to t0.  Rational rotation numbers are refused
    unless ``allow_resonant`` is set, in which case the long-time drift must
    agree across starting points within ``p_spread_tol``.
    """
    p = np.zeros(2) if p is None else np.asarray(p, dtype=float)
    eps_ladder = [float(e) for e in eps_ladder]
    if len(eps_ladder) < 4 or any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing with at least 4 entries")
    chart = build_tassa_chart(F, rho)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResonanceWarning)
        drift = effective_drift(F, rho, chart, p=p, starts=4 if allow_resonant else 0)
    if drift.resonant:
        if not allow_resonant:
            raise ResonanceError(chart.a, (0, 0), 0.0)
        if drift.p_spread is None or drift.p_spread > p_spread_tol:
            raise ResonanceError(chart.a, (0, 0), drift.p_spread or np.nan)
    B = drift.B
    K = chart_constant(chart)

    def one(eps):
        traj = solve_oscillatory(F, eps, (0.0, T), p, tol=tol)
        return line_distance(traj, p, B, T, eps, t0=t0), line_distance(traj, p, B, T, eps, t0=0.0)

    out = ordered_map(one, eps_ladder, workers)
    errors = np.array([o[0] for o in out])
    full = np.array([o[1] for o in out])
    eps = np.array(eps_ladder)
    ref = (K if K is not None else 1.0) * eps
    meta = {"p": p.tolist(), "T": T, "t0": t0, "tol": tol, "drift": drift.to_dict(),
            "chart_constant": K, "warnings": [str(w.message) for w in caught]}
    return ConvergenceReport("theorem2b", eps, errors, ref, "K*eps" if K is not None else "eps",
                             slack=slack, slope_window=slope_window,
                             extra_columns={"error_from_zero": full}, meta=meta)


# ---------------------------------------------------------------------------
# Stream function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StreamFunction:
    """psi(x) = periodic(x) + q . x + q0 with b = (d2 psi, -d1 psi)."""

    periodic: FourierSeries
    q: np.ndarray
    q0: float
    residual: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.periodic(x) + x @ self.q + self.q0


def stream_function(F: PeriodicVectorField, rho: InvariantDensity | None = None, max_degree: int = 32,
                    grid_n: int = 128) -> StreamFunction:
    """Stream function of the divergence-free field b = rho F."""
    rho = rho or unit_density()
    b1f, b2f = _b_field(F, rho)
    b1 = fourier_of(b1f, max_degree, grid_n=grid_n)
    b2 = fourier_of(b2f, max_degree, grid_n=grid_n)
    table1, table2 = b1.as_dict(), b2.as_dict()
    modes = sorted((set(table1) | set(table2)) - {(0, 0)})
    coeffs = []
    for m in modes:
        c1, c2 = table1.get(m, 0.0), table2.get(m, 0.0)
        coeffs.append((m[1] * c1 - m[0] * c2) / (TWO_PI * 1j * (m[0] ** 2 + m[1] ** 2)))
    periodic = FourierSeries(2, np.array(modes, dtype=np.int64).reshape(-1, 2), np.array(coeffs, dtype=complex))
    q = np.array([-b2.mean, b1.mean])
    x = _grid(64).reshape(-1, 2)
    grad = periodic.gradient(x) + q
    recon = np.stack([grad[:, 1], -grad[:, 0]], axis=-1)
    bvals = np.stack([b1f(x), b2f(x)], axis=-1)
    return StreamFunction(periodic, q, 0.0, float(np.abs(recon - bvals).max()))

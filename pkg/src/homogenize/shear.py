"""Shear flows dz/dt = a / G(z/eps) on the d-torus.

For a Diophantine direction ``a`` the trajectories stay within O(eps) of
the line ``p + a t / M(G)``.  The periodic corrector phi, solving
<grad phi, a> = G - M(G), makes the bound explicit:

    z(t) - (p + a t / M) = eps (a / M) (phi(p / eps) - phi(z / eps)).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .field import (TWO_PI, FourierSeries, PeriodicScalarField, fourier_of, lattice,
                    mean_over_torus, shear as shear_field)
from .integrate import Trajectory, solve_oscillatory
from .report import ConvergenceReport
from .workers import ordered_map

RESONANCE_TOL = 1e-12


class ResonanceError(ValueError):
    """A small divisor <m, a> vanishes on the support of G."""

    def __init__(self, a, m, value):
        self.a, self.m, self.value = list(map(float, a)), tuple(int(v) for v in m), float(value)
        super().__init__(f"direction {self.a} is resonant: <m, a> = {self.value:.3g} for m = {self.m}")


class CorrectorError(RuntimeError):
    """The corrector residual exceeds the requested tolerance."""


@dataclass(frozen=True)
class DiophantineParams:
    a: np.ndarray
    kappa: float
    C_est: float
    m_max: int
    m_min: tuple
    resonant: bool

    def to_dict(self) -> dict:
        return {"a": [float(v) for v in self.a], "kappa": self.kappa, "C_est": self.C_est,
                "m_max": self.m_max, "m_min": list(self.m_min), "resonant": self.resonant}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _half_lattice(d: int, m_max: int) -> np.ndarray:
    """Nonzero integer vectors with |m|_inf <= m_max, one of each pair +-m."""
    r = np.arange(-m_max, m_max + 1)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    m = np.stack([g.ravel() for g in grids], axis=-1)
    # keep m whose first nonzero entry is positive
    nz = m != 0
    first = np.argmax(nz, axis=1)
    lead = m[np.arange(len(m)), first]
    return m[lead > 0]


def diophantine_badness(a, kappa: float = 0.5, m_max: int = 50) -> DiophantineParams:
    """Smallest |<a, m>| |m|^(d + kappa) over 0 < |m|_inf <= m_max (Euclidean |m|)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    if not np.any(a != 0):
        raise ValueError("a must be nonzero")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    d = a.size
    m = _half_lattice(d, m_max)
    dots = np.abs(m @ a)
    norms = np.linalg.norm(m, axis=1)
    score = dots * norms ** (d + kappa)
    k = int(np.argmin(score))
    resonant = bool(dots.min() < RESONANCE_TOL)
    if resonant:
        k = int(np.argmin(np.where(dots < RESONANCE_TOL, norms, np.inf)))
    return DiophantineParams(a, float(kappa), float(score[k]), int(m_max), tuple(int(v) for v in m[k]), resonant)


def continued_fraction(x: float, n: int = 12) -> list[int]:
    """First ``n`` partial quotients of x."""
    out = []
    for _ in range(n):
        q = int(np.floor(x))
        out.append(q)
        frac = x - q
        if frac < 1e-12:
            break
        x = 1.0 / frac
    return out


def convergents(x: float, n: int = 12) -> list[tuple[int, int]]:
    """Continued-fraction convergents p/q of x."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    out = []
    for q in continued_fraction(x, n):
        h0, h1 = h1, q * h1 + h0
        k0, k1 = k1, q * k1 + k0
        out.append((h1, k1))
    return out


@dataclass(frozen=True)
class CorrectorSeries:
    """phi with <grad phi, a> = G - M(G), stored without the eps factor."""

    phi: FourierSeries
    a: np.ndarray
    mean: float
    residual: float
    sup_phi: float
    abs_bound: float

    def __call__(self, y):
        return self.phi(y)

    def to_dict(self) -> dict:
        return {"a": [float(v) for v in self.a], "mean": self.mean, "residual": self.residual,
                "sup_phi": self.sup_phi, "abs_bound": self.abs_bound,
                "coefficients": self.phi.to_triples()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _as_series(G, max_degree: int = 16) -> tuple[FourierSeries, object]:
    """Fourier data of G and a callable for direct evaluation."""
    if isinstance(G, FourierSeries):
        return G, G
    if G.fourier is not None:
        return G.fourier, G
    series = fourier_of(G, max_degree)
    return series, G


def build_corrector(G, a, tol: float = 1e-10, grid_n: int | None = None) -> CorrectorSeries:
    """Solve <grad phi, a> = G - M(G) mode by mode: phi_m = G_m / (2 pi i <m, a>)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    series, direct = _as_series(G)
    if series.dim != a.size:
        raise ValueError("dimension of G and a differ")
    d = a.size
    modes, coeffs = series.modes, series.coeffs
    nonzero = np.any(modes != 0, axis=1)
    dots = modes.astype(float) @ a
    small = nonzero & (np.abs(dots) < RESONANCE_TOL) & (np.abs(coeffs) > 0)
    if np.any(small):
        k = int(np.flatnonzero(small)[0])
        raise ResonanceError(a, modes[k], dots[k])
    keep = nonzero & (np.abs(coeffs) > 0)
    phi = FourierSeries(d, modes[keep], coeffs[keep] / (TWO_PI * 1j * dots[keep]))
    mean = series.mean
    n = grid_n or (64 if d <= 2 else 24)
    pts = lattice(n, d)
    pts_flat = pts.reshape(-1, d)
    lhs = phi.gradient(pts_flat) @ a
    g_vals = np.asarray(direct(pts_flat[:, 0] if d == 1 else pts_flat), dtype=float)
    residual = float(np.abs(lhs - (g_vals - mean)).max())
    if residual > tol:
        raise CorrectorError(f"corrector residual {residual:.3g} exceeds tolerance {tol:.3g}")
    fine = lattice(min(4 * n, 256) if d <= 2 else n, d).reshape(-1, d)
    sup_phi = float(np.abs(phi(fine)).max()) if len(phi) else 0.0
    return CorrectorSeries(phi, a, mean, residual, sup_phi, phi.abs_sum())


def profile_mean(G) -> float:
    """M(G), exact from Fourier data when available."""
    if isinstance(G, FourierSeries):
        return G.mean
    if G.fourier is not None and not G.fourier.truncated and G.fourier.residual == 0.0:
        return G.fourier.mean
    if G.dim == 1:
        from .homog1d import periodic_mean_1d
        return periodic_mean_1d(G)
    return mean_over_torus(G, grid_n=256 if G.dim == 2 else 32)


def effective_line(a, G, p):
    """Base point and velocity of the limit line p + B t with B = a / M(G)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    M = profile_mean(G)
    if not M > 0:
        raise ValueError("M(G) must be positive")
    return np.asarray(p, dtype=float).reshape(-1), a / M


def line_distance(traj: Trajectory, p, B, T: float, eps: float, t0: float = 0.0, per_period: int = 64) -> float:
    """sup over [t0, T] of |X(t) - (p + B t)| on a grid with ``per_period`` points per eps."""
    n = max(2000, int(np.ceil(per_period * (T - t0) / eps)))
    t = np.union1d(np.linspace(t0, T, n + 1), traj.times[(traj.times >= t0) & (traj.times <= T)])
    X = np.asarray(traj(t))
    return float(np.linalg.norm(X - (p[None, :] + np.outer(t, B)), axis=1).max())


def conjugacy_residual(traj: Trajectory, corrector: CorrectorSeries, eps: float, n: int = 4001) -> float:
    """Deviation of w = z/eps + (a/M) phi(z/eps) from the line w(0) + a t / (eps M), in units of z.

    Returns max_t |eps (w(t) - w(0)) - a t / M|.
    """
    a, M = corrector.a, corrector.mean
    t = np.linspace(traj.t0, traj.t1, n)
    z = np.asarray(traj(t))
    phi = corrector.phi(z / eps if corrector.a.size > 1 else z[:, 0] / eps)
    w = z / eps + np.outer(phi, a / M)
    dev = eps * (w - w[0]) - np.outer(t - t[0], a / M)
    return float(np.linalg.norm(dev, axis=1).max())


def shear_convergence(a, G, p=None, T: float = 1.0, eps_ladder=(), tol: float = 1e-10,
                      slack: float = 3.0, kappa: float = 0.5, m_max: int = 50, workers: int = 1,
                      slope_window=(0.9, 1.1)) -> ConvergenceReport:
    """Distance of shear trajectories to p + a t / M(G) for each eps.

    The reference column is sup_phi * eps.  The a-priori bound
    2 (|a| / M) sup_phi eps from the corrector identity is reported as an
    extra column.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    d = a.size
    p = np.zeros(d) if p is None else np.asarray(p, dtype=float).reshape(-1)
    eps_ladder = [float(e) for e in eps_ladder]
    if len(eps_ladder) < 4 or any(b >= x for x, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing with at least 4 entries")
    dio = diophantine_badness(a, kappa, m_max)
    if dio.resonant:
        raise ResonanceError(a, dio.m_min, float(np.asarray(dio.m_min) @ a))
    if isinstance(G, FourierSeries):
        G = PeriodicScalarField.from_fourier(G)
    corr = build_corrector(G, a)
    _, B = effective_line(a, G, p)
    M = profile_mean(G)
    F = shear_field(a, G)

    def one(eps):
        traj = solve_oscillatory(F, eps, (0.0, T), p, tol=tol)
        return line_distance(traj, p, B, T, eps), conjugacy_residual(traj, corr, eps)

    out = ordered_map(one, eps_ladder, workers)
    errors = np.array([o[0] for o in out])
    conj = np.array([o[1] for o in out])
    eps = np.array(eps_ladder)
    ref = corr.sup_phi * eps
    apriori = 2.0 * np.linalg.norm(a) / M * corr.sup_phi * eps
    meta = {"a": a.tolist(), "p": p.tolist(), "T": T, "tol": tol, "M": M, "B": B.tolist(),
            "sup_phi": corr.sup_phi, "corrector_residual": corr.residual,
            "diophantine": dio.to_dict(), "apriori_ok": bool(np.all(errors <= apriori)),
            "max_conjugacy_residual": float(conj.max())}
    return ConvergenceReport("theorem2a", eps, errors, ref, "sup_phi*eps", slack=slack,
                             slope_window=slope_window,
                             extra_columns={"apriori_bound": apriori, "conjugacy_residual": conj},
                             meta=meta)


def random_band_limited(dim: int, degree: int, seed: int = 0, mean: float = 2.0,
                        scale: float = 0.1) -> FourierSeries:
    """Real trigonometric polynomial with random coefficients and the given mean."""
    rng = np.random.default_rng(seed)
    coeffs = {(0,) * dim: complex(mean)}
    for m in itertools.product(range(-degree, degree + 1), repeat=dim):
        if m in coeffs or tuple(-v for v in m) in coeffs:
            continue
        c = scale * complex(rng.normal(), rng.normal()) / (1.0 + np.linalg.norm(m)) ** 2
        coeffs[m] = c
        coeffs[tuple(-v for v in m)] = np.conj(c)
    return FourierSeries.from_mapping(dim, coeffs)

"""Periodic scalar and vector fields on the unit torus.

Every field has period 1 along each axis. Fields are immutable and can be
evaluated on arbitrary arrays of points: a ``d``-dimensional field takes
points of shape ``(..., d)``; a one-dimensional field takes points of any
shape (elementwise), with an optional trailing axis of length 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Callable, Mapping, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


class FieldError(ValueError):
    """Invalid field definition or parameters."""


class EvaluationError(FloatingPointError):
    """A field returned a non-finite value."""

    def __init__(self, point, value=None):
        self.point = np.asarray(point, dtype=float)
        self.value = value
        super().__init__(f"non-finite field value {value!r} at point {self.point.tolist()}")


class PositivityError(ValueError):
    """Field is not bounded away from zero, so it cannot be inverted."""

    def __init__(self, lower, point):
        self.lower = lower
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"field minimum {lower:.6g} <= 0 at {self.point.tolist()}")


def lattice(n: int, dim: int, offset: float = 0.0) -> np.ndarray:
    """Uniform ``n**dim`` lattice on ``[0, 1)^dim`` as an array ``(n, ..., n, dim)``."""
    axis = (np.arange(n) + offset) / n
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1)


# ---------------------------------------------------------------------------
# Fourier series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourierSeries:
    """Finite trigonometric sum ``sum_m c_m exp(2 pi i <m, x>)``.

    ``residual`` is the grid residual recorded when the series was fitted to a
    field; ``truncated`` is set when it exceeded the caller's tolerance.
    """

    dim: int
    modes: np.ndarray  # (K, dim) int
    coeffs: np.ndarray  # (K,) complex
    residual: float = 0.0
    truncated: bool = False

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=np.int64).reshape(-1, self.dim)
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(modes) != len(coeffs):
            raise FieldError("modes and coefficients differ in length")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_mapping(cls, dim: int, coeffs: Mapping[tuple, complex]) -> "FourierSeries":
        items = sorted(coeffs.items())
        modes = np.array([m for m, _ in items], dtype=np.int64).reshape(-1, dim)
        return cls(dim, modes, np.array([c for _, c in items], dtype=complex))

    def __len__(self):
        return len(self.coeffs)

    @property
    def max_degree(self) -> int:
        return int(np.abs(self.modes).max()) if len(self) else 0

    @property
    def mean(self) -> float:
        zero = np.all(self.modes == 0, axis=1)
        return float(self.coeffs[zero].real.sum())

    def coefficient(self, mode) -> complex:
        hit = np.all(self.modes == np.asarray(mode), axis=1)
        return complex(self.coeffs[hit].sum())

    def as_dict(self) -> dict[tuple, complex]:
        return {tuple(int(v) for v in m): complex(c) for m, c in zip(self.modes, self.coeffs)}

    def conjugate_symmetry_error(self) -> float:
        """max |c_{-m} - conj(c_m)|; zero for real-valued sums."""
        table = self.as_dict()
        err = 0.0
        for m, c in table.items():
            partner = table.get(tuple(-v for v in m), 0.0)
            err = max(err, abs(partner - np.conj(c)))
        return err

    def _phases(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return np.exp(1j * TWO_PI * (x @ self.modes.T.astype(float)))

    def __call__(self, x) -> np.ndarray:
        if not len(self):
            x = np.asarray(x, dtype=float)
            shape = x.shape if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1) else x.shape[:-1]
            return np.zeros(shape)
        return (self._phases(x) @ self.coeffs).real

    def gradient(self, x) -> np.ndarray:
        """Gradient as an array ``(..., dim)``."""
        if not len(self):
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape if self.dim > 1 else x.shape + (1,))
        ph = self._phases(x)
        weighted = (1j * TWO_PI) * self.coeffs[:, None] * self.modes.astype(float)
        return (ph @ weighted).real

    def derivative(self, multiplier) -> "FourierSeries":
        """Series with each coefficient multiplied by ``multiplier(mode)``."""
        mult = np.array([multiplier(m) for m in self.modes], dtype=complex)
        return FourierSeries(self.dim, self.modes, self.coeffs * mult)

    def abs_sum(self) -> float:
        """Upper bound for the sup norm."""
        return float(np.abs(self.coeffs).sum())

    def to_triples(self) -> list[list]:
        return [[m.tolist(), float(c.real), float(c.imag)] for m, c in zip(self.modes, self.coeffs)]

    @classmethod
    def from_triples(cls, dim: int, triples: Sequence) -> "FourierSeries":
        modes, coeffs = [], []
        for entry in triples:
            mode, re, im = entry
            mode = [int(v) for v in np.atleast_1d(mode)]
            if len(mode) != dim:
                raise FieldError(f"mode {mode} does not have dimension {dim}")
            modes.append(mode)
            coeffs.append(complex(float(re), float(im)))
        return cls(dim, np.array(modes, dtype=np.int64).reshape(-1, dim), np.array(coeffs))


# ---------------------------------------------------------------------------
# Scalar and vector fields
# ---------------------------------------------------------------------------


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if dim == 1:
        if x.ndim >= 1 and x.shape[-1] == 1:
            x = x[..., 0]
    elif x.shape[-1] != dim:
        raise FieldError(f"expected points with trailing dimension {dim}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class ScalarField:
    """Scalar function of position (and optionally a slow time ``t``).

    ``fn(x, t)`` receives ``x`` with shape ``(...)`` when ``dim == 1`` and
    ``(..., dim)`` otherwise.  The base class makes no periodicity promise;
    see :class:`PeriodicScalarField`.  ``kinks`` (1-D only) is the spacing of
    points where the field or its derivative may jump.
    """

    dim: int
    fn: Callable
    time_dependent: bool = False
    fourier: FourierSeries | None = None
    name: str = "scalar"
    params: Mapping = dc_field(default_factory=dict)
    kinks: float | None = None

    periodic = False

    def __call__(self, x, t=0.0) -> np.ndarray:
        return np.asarray(self.fn(_as_points(x, self.dim), t), dtype=float)


@dataclass(frozen=True)
class PeriodicScalarField(ScalarField):
    """Scalar field with period 1 along every spatial axis."""

    periodic = True

    @classmethod
    def from_fourier(cls, series: FourierSeries, name="fourier", params=None):
        return cls(series.dim, lambda x, t=0.0: series(x), fourier=series, name=name,
                   params=params or {})

    @classmethod
    def constant(cls, value: float, dim: int = 1):
        series = FourierSeries(dim, np.zeros((1, dim), dtype=np.int64), np.array([value], dtype=complex))

        def fn(x, t=0.0):
            shape = np.shape(x) if dim == 1 else np.shape(x)[:-1]
            return np.full(shape, float(value))

        return cls(dim, fn, fourier=series, name="constant", params={"value": value})

    def is_constant(self) -> bool:
        if self.fourier is None or self.time_dependent:
            return False
        nonzero = np.any(self.fourier.modes != 0, axis=1)
        return not np.any(np.abs(self.fourier.coeffs[nonzero]) > 0)

    def reciprocal(self, name=None) -> "PeriodicScalarField":
        fn = self.fn
        return PeriodicScalarField(self.dim, lambda x, t=0.0: 1.0 / fn(x, t),
                                   time_dependent=self.time_dependent,
                                   name=name or f"1/{self.name}", params=dict(self.params),
                                   kinks=self.kinks)


@dataclass(frozen=True)
class PeriodicVectorField:
    """Vector field ``F: T^d -> R^d`` evaluated in one vectorized call.

    ``switching`` marks piecewise-defined fields: ``(axis, spacing)`` means the
    field may jump where ``x[axis]`` crosses a multiple of ``spacing`` and is
    smooth between those thresholds.
    """

    dim: int
    fn: Callable
    lipschitz_bound: float | None = None
    positivity: tuple | None = None
    name: str = "vector"
    params: Mapping = dc_field(default_factory=dict)
    switching: tuple | None = None
    extras: Mapping = dc_field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise FieldError(f"expected trailing dimension {self.dim}, got {x.shape}")
        return np.asarray(self.fn(x), dtype=float)

    def component(self, i: int) -> PeriodicScalarField:
        fn = self.fn
        return PeriodicScalarField(self.dim, lambda x, t=0.0: fn(np.asarray(x))[..., i],
                                   name=f"{self.name}[{i}]")

    @classmethod
    def from_components(cls, comps: Sequence[ScalarField], name="vector", **kw):
        dim = comps[0].dim
        if len(comps) != dim or any(c.dim != dim for c in comps):
            raise FieldError("a vector field on T^d needs d components of dimension d")

        def fn(x):
            return np.stack([c(x) for c in comps], axis=-1)

        return cls(dim, fn, name=name, **kw)


# ---------------------------------------------------------------------------
# Grid operations
# ---------------------------------------------------------------------------


def _checked(values, points):
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        raise EvaluationError(points[idx], values[idx])
    return values


def mean_over_torus(g: ScalarField, grid_n: int = 64, t: float = 0.0) -> float:
    """Rectangle-rule mean on the uniform ``grid_n**d`` lattice.

    Spectrally accurate for smooth periodic fields; exact for trigonometric
    polynomials of degree below ``grid_n``.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    pts = lattice(grid_n, g.dim)
    if g.dim == 1:
        pts = pts[..., 0]
    return float(_checked(g(pts, t), pts).mean())


def positivity_bounds(g: ScalarField, grid_n: int = 256, times=None) -> tuple[float, float]:
    """(min, max) of ``g`` on the lattice; raises :class:`PositivityError` when min <= 0.

    ``times`` adds a time axis for time-dependent fields.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    pts = lattice(grid_n, g.dim)
    if g.dim == 1:
        pts = pts[..., 0]
    lo, hi, where = np.inf, -np.inf, None
    for t in ([0.0] if times is None else times):
        vals = _checked(g(pts, t), pts)
        k = np.argmin(vals)
        if vals.flat[k] < lo:
            lo, where = float(vals.flat[k]), np.reshape(pts, (-1, g.dim))[k]
        hi = max(hi, float(vals.max()))
    if lo <= 0.0:
        raise PositivityError(lo, where)
    return lo, hi


def fourier_of(g: ScalarField, max_degree: int, tol: float | None = None,
               grid_n: int | None = None, t: float = 0.0) -> FourierSeries:
    """Truncated Fourier series of ``g`` by FFT on at least ``4 * max_degree`` points per axis.

    The residual ``|g - sum|`` is measured on the half-shifted lattice so that
    aliased content above the FFT band is not hidden. Coefficients below
    ``1e-14 * max|g|`` are dropped.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    d = g.dim
    n = max(grid_n or 0, 4 * max(max_degree, 1), 8)
    pts = lattice(n, d)
    vals = _checked(g(pts[..., 0] if d == 1 else pts, t), pts)
    spec = np.fft.fftn(vals) / vals.size
    freqs = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    grids = np.meshgrid(*([freqs] * d), indexing="ij")
    modes = np.stack([gr.ravel() for gr in grids], axis=-1)
    coeffs = spec.ravel()
    scale = max(float(np.abs(vals).max()), 1.0e-300)
    keep = (np.abs(modes).max(axis=1) <= max_degree) & (np.abs(coeffs) > 1e-14 * scale)
    order = np.lexsort(modes[keep].T[::-1])
    series = FourierSeries(d, modes[keep][order], coeffs[keep][order])
    shifted = lattice(n, d, offset=0.5)
    shifted = shifted[..., 0] if d == 1 else shifted
    residual = float(np.abs(g(shifted, t) - series(shifted)).max())
    truncated = tol is not None and residual > tol
    return FourierSeries(d, series.modes, series.coeffs, residual=residual, truncated=truncated)


def empirical_lipschitz(F, n_pairs: int = 2000, seed: int = 0, scale: float = 1e-3) -> float:
    """Largest |F(u)-F(v)|/|u-v| over random nearby pairs; lower estimate of L."""
    rng = np.random.default_rng(seed)
    dim = F.dim
    u = rng.random((n_pairs, dim))
    v = u + scale * rng.standard_normal((n_pairs, dim))
    if isinstance(F, PeriodicVectorField):
        du = F(u) - F(v)
    else:
        du = (F(u[..., 0] if dim == 1 else u) - F(v[..., 0] if dim == 1 else v))[..., None]
    return float((np.linalg.norm(du, axis=-1) / np.linalg.norm(u - v, axis=-1)).max())


# ---------------------------------------------------------------------------
# Built-in fields
# ---------------------------------------------------------------------------


def _frac(x):
    return x - np.floor(x)


def _band_indicator(u):
    # 1 on (0, 1/2], 0 on (1/2, 1] modulo 1
    f = _frac(u)
    return np.where((f > 0.0) & (f <= 0.5), 1.0, 0.0)


def _smooth_band_indicator(u, eta):
    return 0.5 * (np.tanh(np.sin(TWO_PI * u) / (TWO_PI * eta)) + 1.0)


def example1_piecewise(variant: str = "literal", smoothing: str = "exact", eta: float = 0.1):
    """F = (F1, 1) with F1 the indicator of the band (0, 1/2] mod 1.

    ``variant='literal'`` makes F1 depend on x1 (trajectories stick at the
    first jump); ``variant='x2'`` moves the band to the x2 axis, so every
    trajectory keeps crossing bands. ``eta`` is the mollification width in
    fast (unit-period) coordinates.
    """
    if variant not in ("literal", "x2"):
        raise FieldError(f"unknown example1 variant {variant!r}")
    if smoothing not in ("exact", "mollified"):
        raise FieldError(f"unknown example1 smoothing {smoothing!r}")
    if eta <= 0:
        raise FieldError("eta must be positive")
    axis = 0 if variant == "literal" else 1
    if smoothing == "exact":
        def fn(x):
            return np.stack([_band_indicator(x[..., axis]), np.ones(x.shape[:-1])], axis=-1)
        switching, lip = (axis, 0.5), None
    else:
        def fn(x):
            return np.stack([_smooth_band_indicator(x[..., axis], eta), np.ones(x.shape[:-1])], axis=-1)
        switching, lip = None, 1.0 / (2.0 * eta)
    return PeriodicVectorField(2, fn, lipschitz_bound=lip, name="example1_piecewise",
                               params={"variant": variant, "smoothing": smoothing, "eta": eta},
                               switching=switching)


def sawtooth_values(u, a=1.0, h=3.0, sigma=1.0):
    """Saw-like profile: rises linearly from sigma to h + sigma on the first half period."""
    tau = a * _frac(u)
    return np.where(tau < a / 2.0, 2.0 * h * tau / a + sigma, 2.0 * h * (a - tau) / a + sigma)


def example2_sawtooth(a: float = 1.0, h: float = 3.0, sigma: float = 1.0) -> PeriodicScalarField:
    """Periodic saw-tooth with peak h + sigma and floor sigma.

    The returned field has unit period: ``field(u) = F(a * u)`` where F is
    the saw-tooth of period ``a``.
    """
    if a <= 0 or h <= 0 or sigma <= 0:
        raise FieldError("example2 requires a > 0, h > 0 and sigma > 0")
    return PeriodicScalarField(1, lambda u, t=0.0: sawtooth_values(u, a, h, sigma),
                               name="example2_sawtooth", params={"a": a, "h": h, "sigma": sigma},
                               kinks=0.5)


def example3_almost_periodic(K: int = 50) -> ScalarField:
    """Truncated almost periodic sum  sum_{k<=K} sin(x/(2k+1)) / (2k+1)^2.

    Not periodic. The neglected tail is bounded by ``params['tail_bound']``.
    """
    if K < 0:
        raise FieldError("K must be non-negative")
    odd = 2.0 * np.arange(K + 1) + 1.0
    weights = 1.0 / odd ** 2
    tail = 1.0 / (2.0 * (2 * K + 1))  # integral bound for sum_{k>K} (2k+1)^-2

    def fn(x, t=0.0):
        x = np.asarray(x, dtype=float)
        return np.sin(x[..., None] / odd) @ weights

    return ScalarField(1, fn, name="example3_almost_periodic", params={"K": K, "tail_bound": tail})


def example3_antiderivative(x, K: int = 50):
    """Closed form of the integral of the truncated Example-3 sum over [0, x]."""
    odd = 2.0 * np.arange(K + 1) + 1.0
    x = np.asarray(x, dtype=float)
    return (np.sin(x[..., None] / (2.0 * odd)) ** 2) @ (2.0 / odd)


def example4_transport_H(kind: str = "sawtooth", **params) -> PeriodicScalarField:
    """Positive periodic transport speed H for the 1-D model equation."""
    if kind == "sawtooth":
        f = example2_sawtooth(**params)
        return PeriodicScalarField(1, f.fn, name="example4_transport_H",
                                   params={"kind": kind, **f.params}, kinks=f.kinks)
    if kind == "cosine":
        mean = float(params.get("mean", 1.0))
        amp = float(params.get("amp", 0.5))
        if abs(amp) >= mean:
            raise FieldError("cosine H must stay positive: |amp| < mean")
        series = FourierSeries.from_mapping(1, {(0,): mean, (1,): amp / 2, (-1,): amp / 2})
        return PeriodicScalarField(1, lambda u, t=0.0: mean + amp * np.cos(TWO_PI * u),
                                   fourier=series, name="example4_transport_H",
                                   params={"kind": kind, "mean": mean, "amp": amp})
    raise FieldError(f"unknown transport speed kind {kind!r}")


def example5_gradient(amp: float = 1.0) -> PeriodicVectorField:
    """Gradient of the bounded periodic potential amp*(sin 2pi y1 + sin 2pi y2)/(2 pi)."""
    potential = PeriodicScalarField(
        2, lambda y, t=0.0: amp * (np.sin(TWO_PI * y[..., 0]) + np.sin(TWO_PI * y[..., 1])) / TWO_PI,
        name="example5_potential", params={"amp": amp})

    def fn(y):
        return amp * np.stack([np.cos(TWO_PI * y[..., 0]), np.cos(TWO_PI * y[..., 1])], axis=-1)

    return PeriodicVectorField(2, fn, lipschitz_bound=TWO_PI * abs(amp), name="example5_gradient",
                               params={"amp": amp}, extras={"potential": potential})


def cos_profile(dim: int, mean: float = 1.0, amp: float = 0.0, kind: str = "product") -> PeriodicScalarField:
    """``mean + amp * prod_i cos(2 pi y_i)`` (kind='product') or ``mean + amp cos(2 pi y_1)``."""
    if kind == "product":
        coeffs = {(0,) * dim: mean}
        for signs in itertools.product((-1, 1), repeat=dim):
            coeffs[tuple(signs)] = coeffs.get(tuple(signs), 0.0) + amp / 2 ** dim
    elif kind == "first":
        e = (1,) + (0,) * (dim - 1)
        coeffs = {(0,) * dim: mean, e: amp / 2, tuple(-v for v in e): amp / 2}
    else:
        raise FieldError(f"unknown profile kind {kind!r}")
    if abs(amp) >= mean:
        raise FieldError("profile must be positive: |amp| < mean")
    series = FourierSeries.from_mapping(dim, coeffs)
    if kind == "product":
        def fn(y, t=0.0):
            y = np.asarray(y, dtype=float)
            y = y[..., None] if dim == 1 else y
            return mean + amp * np.prod(np.cos(TWO_PI * y), axis=-1)
    else:
        def fn(y, t=0.0):
            y = np.asarray(y, dtype=float)
            return mean + amp * np.cos(TWO_PI * (y if dim == 1 else y[..., 0]))
    return PeriodicScalarField(dim, fn, fourier=series, name="cos_profile",
                               params={"mean": mean, "amp": amp, "kind": kind})


def shear(a, G: PeriodicScalarField | Mapping | None = None) -> PeriodicVectorField:
    """Shear field a / G(y) with constant direction ``a`` and positive profile ``G``."""
    a = np.asarray(a, dtype=float).reshape(-1)
    dim = a.size
    if G is None:
        G = PeriodicScalarField.constant(1.0, dim)
    elif isinstance(G, Mapping):
        G = cos_profile(dim, **G)
    if G.dim != dim:
        raise FieldError("profile dimension does not match the direction vector")
    lo, hi = positivity_bounds(G, grid_n=64 if dim <= 2 else 16)
    gfn = G.fn

    def fn(y):
        y = np.asarray(y, dtype=float)
        g = gfn(y[..., 0] if dim == 1 else y, 0.0)
        return a / np.asarray(g)[..., None]

    return PeriodicVectorField(dim, fn, name="shear", params={"a": a.tolist(), "profile": G.name},
                               positivity=(lo, hi), extras={"a": a, "G": G})


def divfree_planar(base=(2.0, 1.0), amp: float = 1.0, psi_amp: float = 0.0) -> PeriodicVectorField:
    """Divergence-free planar field.

    F1 = base1 + amp cos(2 pi x2) + psi_amp sin(2 pi x1) cos(2 pi x2)
    F2 = base2 - psi_amp cos(2 pi x1) sin(2 pi x2)

    The ``psi_amp`` part is the skew gradient of the stream function
    psi_amp sin(2 pi x1) sin(2 pi x2) / (2 pi).
    """
    b1, b2 = (float(v) for v in base)
    if abs(amp) + abs(psi_amp) >= b1 or abs(psi_amp) >= b2:
        raise FieldError("divfree_planar components must stay positive")

    def fn(x):
        c1, s1 = np.cos(TWO_PI * x[..., 0]), np.sin(TWO_PI * x[..., 0])
        c2, s2 = np.cos(TWO_PI * x[..., 1]), np.sin(TWO_PI * x[..., 1])
        return np.stack([b1 + amp * c2 + psi_amp * s1 * c2, b2 - psi_amp * c1 * s2], axis=-1)

    lip = TWO_PI * (abs(amp) + 2 * abs(psi_amp))
    return PeriodicVectorField(2, fn, lipschitz_bound=lip,
                               positivity=(min(b1 - abs(amp) - abs(psi_amp), b2 - abs(psi_amp)),
                                           max(b1 + abs(amp) + abs(psi_amp), b2 + abs(psi_amp))),
                               name="divfree_planar",
                               params={"base": [b1, b2], "amp": amp, "psi_amp": psi_amp})


def shear_counterexample() -> PeriodicVectorField:
    """F = (0, sin 2 pi x1): trajectories move vertically at a speed set by the fast phase of p1."""
    def fn(x):
        return np.stack([np.zeros(x.shape[:-1]), np.sin(TWO_PI * x[..., 0])], axis=-1)

    return PeriodicVectorField(2, fn, lipschitz_bound=TWO_PI, name="shear_counterexample")


BUILTINS: dict[str, Callable] = {
    "example1_piecewise": example1_piecewise,
    "example2_sawtooth": example2_sawtooth,
    "example3_almost_periodic": example3_almost_periodic,
    "example4_transport_H": example4_transport_H,
    "example5_gradient": example5_gradient,
    "shear": shear,
    "divfree_planar": divfree_planar,
    "cos_profile": cos_profile,
    "shear_counterexample": shear_counterexample,
}


def builtin(name: str, params: Mapping | None = None):
    """Construct a built-in field by name; see :data:`BUILTINS`."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise FieldError(f"unknown builtin field {name!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return factory(**dict(params or {}))
    except TypeError as exc:
        raise FieldError(f"invalid parameters for {name}: {exc}") from None


def describe_builtins() -> list[tuple[str, str]]:
    out = []
    for name, factory in BUILTINS.items():
        doc = (factory.__doc__ or "").strip().splitlines()
        out.append((name, doc[0] if doc else ""))
    return out


__all__ = [
    "FieldError", "EvaluationError", "PositivityError", "FourierSeries", "ScalarField",
    "PeriodicScalarField", "PeriodicVectorField", "lattice", "mean_over_torus",
    "positivity_bounds", "fourier_of", "empirical_lipschitz", "builtin", "BUILTINS",
    "describe_builtins", "example3_antiderivative", "sawtooth_values", "example1_piecewise",
    "example2_sawtooth", "example3_almost_periodic", "example4_transport_H", "example5_gradient",
    "cos_profile", "shear", "divfree_planar", "shear_counterexample", "TWO_PI",
]

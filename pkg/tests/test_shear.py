import json

import numpy as np
import pytest

from homogenize.field import FourierSeries, PeriodicScalarField, cos_profile, example2_sawtooth, shear
from homogenize.integrate import oracle_solve
from homogenize.shear import (CorrectorError, ResonanceError, build_corrector, conjugacy_residual,
                              continued_fraction, convergents, diophantine_badness, effective_line,
                              random_band_limited, shear_convergence)

from conftest import GOLDEN, dyadic


def test_resonant_direction():
    d = diophantine_badness([1.0, 0.5])
    assert d.resonant
    assert d.m_min in ((1, -2), (-1, 2))


def test_golden_badly_approximable():
    d = diophantine_badness([1.0, GOLDEN], kappa=0.5, m_max=50)
    assert not d.resonant and d.C_est > 0
    assert json.loads(d.to_json())["m_max"] == 50


def test_sqrt2_minimizer_is_convergent():
    d = diophantine_badness([1.0, np.sqrt(2.0)], kappa=0.5, m_max=50)
    assert d.C_est > 0
    m1, m2 = d.m_min
    # |m1 + m2 sqrt2| small means -m1/m2 approximates sqrt2
    assert (abs(m1), abs(m2)) in {(p, q) for p, q in convergents(np.sqrt(2.0))}


def test_continued_fractions():
    assert continued_fraction(GOLDEN, 8) == [1] * 8
    assert continued_fraction(np.sqrt(2.0), 6) == [1, 2, 2, 2, 2, 2]
    assert convergents(np.sqrt(2.0), 4) == [(1, 1), (3, 2), (7, 5), (17, 12)]


def test_corrector_of_constant_is_zero():
    c = build_corrector(PeriodicScalarField.constant(2.0, 2), [1.0, GOLDEN])
    assert len(c.phi) == 0 and c.sup_phi == 0.0


def test_single_mode_corrector():
    a = np.array([1.3, GOLDEN])
    G = FourierSeries.from_mapping(2, {(0, 0): 1.0, (1, 0): 0.5, (-1, 0): 0.5})
    c = build_corrector(G, a)
    y = np.random.default_rng(0).uniform(size=(100, 2))
    assert np.abs(c(y) - np.sin(2 * np.pi * y[:, 0]) / (2 * np.pi * a[0])).max() <= 1e-15
    assert np.abs(c.phi.gradient(y) @ a - np.cos(2 * np.pi * y[:, 0])).max() <= 1e-14


def test_random_band_limited_residual():
    G = random_band_limited(2, 8, seed=3)
    c = build_corrector(G, [1.0, GOLDEN])
    assert c.residual <= 1e-10
    assert c.phi.coefficient((0, 0)) == 0
    doc = json.loads(c.to_json())
    assert len(doc["coefficients"]) == len(c.phi)


def test_resonant_corrector_refused():
    # the mode (1, -2) is orthogonal to a = (1, 1/2)
    G = FourierSeries.from_mapping(2, {(0, 0): 2.0, (1, -2): 0.5, (-1, 2): 0.5})
    with pytest.raises(ResonanceError) as info:
        build_corrector(G, [1.0, 0.5])
    assert "resonant" in str(info.value)
    assert info.value.m in ((1, -2), (-1, 2))


def test_corrector_off_resonant_support_exists():
    # resonance only matters on the support of G: the product profile has modes (+-1, +-1) only
    c = build_corrector(cos_profile(2, 1.0, 0.5), [1.0, 0.5])
    assert c.residual <= 1e-10


def test_corrector_tolerance_error():
    # a field that is not band limited leaves a residual the truncated series cannot match
    G = PeriodicScalarField(2, lambda y, t=0.0: 2 + np.abs(np.sin(np.pi * y[..., 0])))
    with pytest.raises(CorrectorError):
        build_corrector(G, [1.0, GOLDEN], tol=1e-12)


def test_effective_line_cases():
    a = np.array([1.0, GOLDEN])
    _, B = effective_line(a, PeriodicScalarField.constant(1.0, 2), [0, 0])
    assert np.allclose(B, a, atol=0)
    G = cos_profile(2, 1.5, 1.0, kind="first")
    _, B = effective_line(a, G, [0, 0])
    assert np.allclose(B, a / 1.5, rtol=1e-13)
    _, B1 = effective_line([1.0], example2_sawtooth().reciprocal(), [0.0])
    assert B1[0] == pytest.approx(3.0 / np.log(4.0), rel=1e-10)
    _, B3 = effective_line(3 * a, G, [0, 0])
    assert np.allclose(B3, 3 * a / 1.5, rtol=1e-13)


def test_constant_profile_errors_at_tolerance():
    rep = shear_convergence([1.0, GOLDEN], PeriodicScalarField.constant(1.0, 2), eps_ladder=dyadic(3, 6))
    assert np.all(rep.errors <= 1e-9)


def test_shear_convergence_refuses_resonance():
    with pytest.raises(ResonanceError):
        shear_convergence([1.0, 0.5], cos_profile(2, 1.0, 0.5), eps_ladder=dyadic(3, 6))


def test_conjugacy_along_oracle():
    a = np.array([1.0, GOLDEN])
    G = cos_profile(2, 1.0, 0.5)
    corr = build_corrector(G, a)
    eps = 1 / 16
    tr = oracle_solve(shear(a, G), eps, (0.0, 1.0), [0.0, 0.0], eps / 1000)
    assert conjugacy_residual(tr, corr, eps) <= 1e-6

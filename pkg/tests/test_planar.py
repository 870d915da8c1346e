import json
import warnings

import numpy as np
import pytest

from homogenize.field import PeriodicVectorField, cos_profile, divfree_planar, shear
from homogenize.integrate import oracle_solve
from homogenize.planar import (ResonanceWarning, build_tassa_chart, effective_drift, planar_convergence,
                               rotation_number_empirical, solve_liouville, stream_function, unit_density)
from homogenize.shear import ResonanceError, effective_line

from conftest import GOLDEN, dyadic


def const_field(c1, c2):
    return PeriodicVectorField(2, lambda x: np.broadcast_to(np.array([c1, c2]), x.shape).copy(),
                               name="const")


@pytest.fixture(scope="module")
def cos_chart():
    return build_tassa_chart(divfree_planar(amp=1.0), unit_density())


@pytest.fixture(scope="module")
def swirl_chart():
    return build_tassa_chart(divfree_planar(base=(2.0, 1.5), amp=0.4, psi_amp=0.3), unit_density())


def test_liouville_divfree_gives_unit_density():
    rho = solve_liouville(divfree_planar(psi_amp=0.3), max_degree=6)
    x = np.random.default_rng(0).uniform(size=(50, 2))
    assert np.abs(rho.rho(x) - 1.0).max() <= 1e-10
    assert rho.residual <= 1e-10


def test_liouville_cos_field_unit_density():
    rho = solve_liouville(divfree_planar(amp=1.0), max_degree=4)
    assert np.abs(rho.rho(np.random.default_rng(1).uniform(size=(20, 2))) - 1).max() <= 1e-12


def test_chart_identity_for_constant_b():
    chart = build_tassa_chart(const_field(1.0, 1.0))
    x = np.random.default_rng(2).uniform(size=(30, 2))
    assert np.abs(chart.f(x) - x).max() <= 1e-14
    assert np.abs(chart.G_profile_values(x) - 1.0).max() <= 1e-14
    assert chart.gamma == pytest.approx(1.0, abs=1e-14)


def test_cos_chart_closed_forms(cos_chart):
    chart = cos_chart
    assert chart.b_bar == pytest.approx((2.0, 1.0), abs=1e-13)
    assert chart.gamma == pytest.approx(0.5, abs=1e-13)
    x = np.random.default_rng(3).uniform(-1, 2, size=(40, 2))
    assert np.abs(chart.f1(x[:, 0]) - x[:, 0]).max() <= 1e-13
    f2 = (2 * x[:, 1] + np.sin(2 * np.pi * x[:, 1]) / (2 * np.pi)) / 2
    assert np.abs(chart.f2(x) - f2).max() <= 1e-13
    gamma_flow, spread = chart.flow_gamma()
    assert gamma_flow == pytest.approx(0.5, abs=1e-12) and spread <= 1e-12


def test_translation_relations_random_field(swirl_chart):
    x = np.random.default_rng(4).uniform(size=(100, 2))
    assert swirl_chart.translation_violation(x) <= 1e-10
    assert swirl_chart.bbar_constancy() <= 1e-10


def test_inverse_chart(swirl_chart):
    x = np.random.default_rng(5).uniform(size=(100, 2))
    assert np.abs(swirl_chart.g(swirl_chart.f(x)) - x).max() <= 1e-9


def test_jacobian_formula(swirl_chart):
    x = np.random.default_rng(6).uniform(size=(40, 2))
    h = 1e-5
    cols = []
    for e in np.eye(2):
        cols.append((swirl_chart.f(x + h * e) - swirl_chart.f(x - h * e)) / (2 * h))
    det = cols[0][:, 0] * cols[1][:, 1] - cols[0][:, 1] * cols[1][:, 0]
    assert np.abs(det - swirl_chart.jacobian(x)).max() <= 1e-8
    assert np.all(swirl_chart.jacobian(x) > 0)


def test_chart_conjugacy_along_flow(swirl_chart):
    chart = swirl_chart
    F = chart.F
    tr = oracle_solve(F, 1.0, (0.0, 3.0), [0.1, 0.2], 1e-3)
    X = tr(np.linspace(0, 3, 200))
    dy = np.einsum("nij,nj->ni", chart.jacobian_matrix(X), F(X))
    target = np.array([1.0, chart.gamma]) / chart.G_profile_values(chart.f(X))[:, None]
    assert np.abs(dy - target).max() <= 1e-6


def test_stream_function(swirl_chart):
    psi = stream_function(swirl_chart.F)
    assert psi.residual <= 1e-10


def test_rotation_number_constant_and_shear():
    assert rotation_number_empirical(const_field(2.0, 0.7), T_long=10.0) == pytest.approx(0.35, abs=1e-13)
    F = shear([1.0, GOLDEN], cos_profile(2, 1.0, 0.5))
    assert rotation_number_empirical(F, T_long=500.0) == pytest.approx(GOLDEN, abs=1e-3)


def test_drift_constant_field():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResonanceWarning)
        d = effective_drift(const_field(1.0, 0.5), T_long=20.0)
    assert np.allclose(d.B, [1.0, 0.5], atol=1e-12)
    assert d.resonant
    json.loads(d.to_json())


def test_cos_field_drift_is_arithmetic_mean(cos_chart):
    with pytest.warns(ResonanceWarning):
        d = effective_drift(cos_chart.F, chart=cos_chart, T_long=200.0)
    assert np.allclose(d.B, [2.0, 1.0], atol=1e-3)
    assert np.allclose(d.B_arithmetic, [2.0, 1.0], atol=1e-12)
    assert d.gamma_empirical == pytest.approx(0.5, abs=1e-3)


def test_resonant_rate_refused(cos_chart):
    with pytest.raises(ResonanceError):
        planar_convergence(cos_chart.F, eps_ladder=dyadic(3, 6))


def test_constant_field_rate_at_tolerance():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResonanceWarning)
        rep = planar_convergence(const_field(1.0, GOLDEN), eps_ladder=dyadic(3, 6))
    assert np.all(rep.errors <= 1e-9)


def test_planar_and_shear_agree_on_drift():
    a = np.array([1.0, GOLDEN])
    G = cos_profile(2, 1.0, 0.5)
    F = shear(a, G)
    rho = solve_liouville(F, max_degree=20)
    chart = build_tassa_chart(F, rho)
    d = effective_drift(F, rho, chart, T_long=100.0)
    _, B = effective_line(a, G, [0, 0])
    assert np.abs(d.B - B).max() <= 1e-6

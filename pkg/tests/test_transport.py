import numpy as np
import pytest

from homogenize.field import PeriodicScalarField, example4_transport_H
from homogenize.homog1d import periodic_mean_1d
from homogenize.transport import (TransportProblem, characteristic_constancy, counterexample_demo,
                                  delta_all_phases, sine_problem, transport_error, transport_solve_eps,
                                  translation_check, window_error)

from conftest import dyadic

SAW = example4_transport_H()
COSH = example4_transport_H("cosine", mean=1.0, amp=0.5)


def test_constant_speed_exact():
    prob = sine_problem(PeriodicScalarField.constant(1.7), n=64)
    snap = transport_solve_eps(prob, 1 / 32, 0.6)
    assert np.abs(snap.v - np.sin(2 * np.pi * (prob.grid - 1.7 * 0.6))).max() <= 1e-12


def test_constant_profile_stays_constant():
    prob = TransportProblem(SAW, lambda x: np.full(np.shape(x), 0.3), 0.0, np.linspace(0, 1, 17))
    snap = transport_solve_eps(prob, 1 / 16, 1.0)
    assert np.all(snap.v == 0.3)


def test_master_and_direct_agree():
    prob = sine_problem(SAW, n=24)
    a = transport_solve_eps(prob, 1 / 32, 0.7, method="master")
    b = transport_solve_eps(prob, 1 / 32, 0.7, method="direct")
    assert np.abs(a.foot - b.foot).max() <= 1e-9


def test_constancy_along_characteristic():
    tol = 1e-10
    prob = sine_problem(SAW, n=8)
    assert characteristic_constancy(prob, 1 / 32, 0.2, n=10, tol=tol) <= 10 * tol


def test_translation_after_whole_cells():
    eps = 1 / 32
    prob = sine_problem(SAW, n=512)
    shift, misfit = translation_check(prob, eps, cells=5)
    assert shift == pytest.approx(5 * eps, abs=1e-9)
    assert misfit <= 1e-9


def test_empirical_speed_tends_to_harmonic_mean():
    c = 3.0 / np.log(4.0)
    assert sine_problem(SAW).speed == pytest.approx(c, rel=1e-12)
    errs = []
    for eps in (1 / 8, 1 / 32, 1 / 128):
        prob = sine_problem(SAW, n=256)
        # after k whole cells the wave moved k eps in time k eps M
        t = eps * periodic_mean_1d(SAW.reciprocal())
        shift, _ = translation_check(prob, eps, cells=int(0.5 / t))
        errs.append(abs(shift / (int(0.5 / t) * t) - c))
    assert errs[-1] <= 1e-8


def test_constant_speed_transport_error():
    prob = sine_problem(PeriodicScalarField.constant(2.0), n=64)
    rep = transport_error(prob, dyadic(3, 6), t=1.0)
    assert np.all(rep.errors <= 1e-9)


def test_delta_all_phases_sine():
    # 1/H - mean for H = 1/(1 + 0.5 sin) is 0.5 sin; running integral oscillation is 1/(2 pi)
    H = PeriodicScalarField(1, lambda u, t=0.0: 1.0 / (1.0 + 0.5 * np.sin(2 * np.pi * u)))
    eps = 1 / 16
    assert delta_all_phases(H.reciprocal(), eps, 1.0) == pytest.approx(eps / (2 * np.pi), rel=1e-6)


def test_window_error_bounded_by_delta():
    prob = sine_problem(COSH, n=301)
    eps = 1 / 32
    d = delta_all_phases(COSH.reciprocal(), eps, 1.5)
    w = window_error(prob, eps, 1.0)
    beta = prob.speed
    assert w <= 2 * np.pi * beta * d * 1.01


def test_snapshot_csv(tmp_path):
    prob = sine_problem(COSH, n=16)
    snap = transport_solve_eps(prob, 1 / 16, 0.5)
    snap.to_csv(tmp_path / "s.csv", prob.v_homogenized(0.5))
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "x,v_eps,v0,abs_diff" and len(rows) == 17


def test_bad_inputs():
    prob = sine_problem(COSH, n=8)
    with pytest.raises(ValueError):
        transport_solve_eps(prob, 0.0, 0.5)
    with pytest.raises(ValueError):
        transport_solve_eps(prob, 0.1, 2.0)
    with pytest.raises(ValueError):
        TransportProblem(COSH, np.sin, np.inf, np.linspace(0, 1, 5))


def test_counterexample_has_no_limit():
    out = counterexample_demo()
    assert not out["certified"]
    ends = np.array(out["endpoints"])
    assert np.abs(ends[:, 1] - out["predicted_x2"]).max() <= 1e-8
    assert out["x2_spread"] > 0.5

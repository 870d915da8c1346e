import json

import numpy as np
import pytest

from homogenize.averaging import (averaging_report, bogolyubov_bound, bogolyubov_compare, delta_curve,
                                  delta_of_eps, g0_limit, g0_periodic, integrate_fast, time_average)
from homogenize.field import example3_almost_periodic, example3_antiderivative

from conftest import dyadic

SIN = lambda tau, x: 1.0 + np.sin(2 * np.pi * np.asarray(tau))  # noqa: E731


def test_time_average_of_slow_only_field():
    G = lambda tau, y: np.full(np.shape(tau), 2.0 + y)  # noqa: E731
    assert time_average(G, 0.5, 7.3) == pytest.approx(2.5, abs=1e-14)


def test_time_average_whole_periods():
    assert time_average(SIN, 0.0, 10.0) == pytest.approx(1.0, abs=1e-13)


def test_example3_window_averages_decay():
    g = example3_almost_periodic(50)
    G = lambda tau, y: g(tau)  # noqa: E731
    vals = []
    for ell in (1e2, 1e3, 1e4):
        v = time_average(G, 0.0, ell)
        assert v == pytest.approx(float(example3_antiderivative(ell, 50)) / ell, abs=1e-9)
        vals.append(abs(v))
    assert vals[0] > vals[1] > vals[2]
    for ell, v in zip((1e2, 1e3, 1e4), vals):
        assert v <= 5 * np.log(ell) / ell


def test_integrate_fast_polynomial():
    G = lambda tau, x: np.asarray(tau) ** 3  # noqa: E731
    assert integrate_fast(G, 0.0, 0.0, 2.0) == pytest.approx(4.0, rel=1e-14)


def test_g0_limit_and_periodic():
    val, ladder = g0_limit(SIN, 0.0)
    assert val == pytest.approx(1.0, abs=1e-8)
    assert g0_periodic(SIN, 0.0) == pytest.approx(1.0, abs=1e-10)
    G = lambda tau, y: np.exp(np.cos(2 * np.pi * np.asarray(tau)))  # noqa: E731
    from scipy.special import i0
    assert g0_periodic(G, 0.0) == pytest.approx(i0(1.0), abs=1e-10)


def test_delta_of_constant_is_zero():
    G = lambda tau, x: np.full(np.shape(tau), 3.0)  # noqa: E731
    assert delta_of_eps(G, 3.0, None, 1.0, 0.1) == 0.0


@pytest.mark.parametrize("eps", dyadic(3, 9))
def test_delta_sine_closed_form(eps):
    assert delta_of_eps(SIN, 1.0, None, 1.0, eps) == pytest.approx(eps / np.pi, rel=1e-6)


def test_delta_nondecreasing_and_linear_band():
    eps = np.array(dyadic(2, 10))
    G = lambda tau, x: (1 + 0.5 * np.sin(2 * np.pi * np.asarray(tau))) * (1 + 0.1 * np.cos(2 * np.pi * x))  # noqa: E731
    G0 = lambda x: 1 + 0.1 * np.cos(2 * np.pi * x)  # noqa: E731
    d = delta_curve(G, G0, (0.0, 1.0), 1.0, eps)
    assert np.all(np.diff(d) <= 1e-12)
    ratio = d / eps
    assert ratio.min() > 0.1 and ratio.max() < 1.0


def test_bogolyubov_x_independent_field_is_exact():
    G = lambda tau, x: np.full(np.shape(tau), 1.0) + 0 * x  # noqa: E731
    res = bogolyubov_compare(G, 1.0, 0.3, 1 / 16, 1.0)
    assert res.sup_error <= 1e-12


def test_bogolyubov_sine():
    eps = 1 / 32
    res = bogolyubov_compare(SIN, 1.0, 0.0, eps, 1.0)
    assert res.sup_error <= eps / np.pi * (1 + 1e-6)
    assert not res.flagged


def test_bound_matches_delta_on_same_domain():
    G = lambda tau, x: (1 + 0.5 * np.sin(2 * np.pi * np.asarray(tau))) * (1 + 0.1 * np.cos(2 * np.pi * x))  # noqa: E731
    G0 = lambda x: 1 + 0.1 * np.cos(2 * np.pi * x)  # noqa: E731
    D = np.linspace(0, 1, 9)
    for eps in (1 / 8, 1 / 64):
        assert bogolyubov_bound(G, G0, D, 1.0, eps) == pytest.approx(delta_of_eps(G, G0, D, 1.0, eps), rel=1e-6)


def test_averaging_report_json(tmp_path):
    rep = averaging_report(SIN, 1.0, None, 1.0, dyadic(3, 7))
    doc = json.loads(rep.to_json(tmp_path / "avg.json"))
    assert doc["slope"] == pytest.approx(1.0, abs=1e-6)
    assert len(doc["delta"]) == 5

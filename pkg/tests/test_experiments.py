import numpy as np
import pytest

from homogenize.experiments import run_example, sawtooth_speed

from conftest import dyadic


def test_example1_variants():
    rep = run_example("example1", {"eps_ladder": dyadic(3, 6)})
    m = rep.meta
    # literal variant sticks at the band edge: its path is vertical
    assert abs(m["literal_direction"][0]) <= 1e-3
    assert m["literal_final_x1_offset"] == pytest.approx(0.5 * rep.eps[-1] / 1, abs=1e-9)
    # x2 variant drifts along (1/2, 1)
    assert np.allclose(m["x2_direction"], np.array([1.0, 2.0]) / np.sqrt(5.0), atol=1e-3)
    assert not m["claimed_line_matches"]
    assert rep.passed


def test_example3_ratio_bounded():
    rep = run_example("example3", {"eps_ladder": dyadic(4, 8)})
    assert rep.passed
    assert abs(rep.meta["G0_numerical"]) <= 1e-5


def test_example5_energy_identity():
    rep = run_example("example5", {"eps_ladder": dyadic(3, 6)})
    assert np.allclose(rep.errors, rep.extra_columns["energy_identity"], rtol=1e-6)
    assert rep.meta["diameter_decreasing"]
    assert rep.passed


def test_sawtooth_closed_form_speed():
    assert sawtooth_speed(3.0, 1.0) == pytest.approx(3.0 / np.log(4.0), rel=1e-15)


def test_unknown_example_and_params():
    with pytest.raises(ValueError):
        run_example("example9", {"eps_ladder": dyadic(3, 6)})
    with pytest.raises(ValueError):
        run_example("example5", {})
    with pytest.raises(ValueError):
        run_example("example5", {"eps_ladder": dyadic(3, 6), "colour": 1})

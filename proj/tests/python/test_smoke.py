import math

import numpy as np
import pytest

import fracheat as fh


def test_mittag_leffler_closed_forms():
    x = np.linspace(0.0, 3.0, 7)
    assert np.allclose(fh.mittag_leffler(1.0, 1.0, -x), np.exp(-x), rtol=1e-13)
    from math import erfc
    ref = [math.exp(v * v) * erfc(v) for v in x]
    assert np.allclose(fh.mittag_leffler(0.5, 1.0, -x), ref, rtol=1e-10)


def test_wright_phi_is_a_probability_density():
    assert fh.wright_moment(0.5, 0.0) == pytest.approx(1.0, rel=1e-12)
    # alpha = 1/2: Φ(θ) = exp(−θ²/4)/√π
    theta = np.array([0.1, 1.0, 2.5])
    assert np.allclose(fh.wright_phi(0.5, theta), np.exp(-theta**2 / 4) / math.sqrt(math.pi), rtol=1e-10)


def test_heat_of_gaussian_matches_closed_form():
    g = fh.Grid(1, 256, 16.0)
    x = g.coords()
    u = fh.heat(0.5, g, np.exp(-x**2 / 2))
    assert u.shape == (256,)
    assert np.allclose(u, np.exp(-x**2 / 4) / math.sqrt(2.0), atol=1e-12)


def test_p_alpha_backends_agree_and_preserve_mass():
    g = fh.Grid(1, 256, 16.0)
    mu = fh.make_data(g, "gaussian", 1.0, 1.0)
    a = fh.p_alpha(0.3, g, mu, 0.6)
    b = fh.p_alpha(0.3, g, mu, 0.6, backend="subordination")
    assert np.max(np.abs(a - b)) < 1e-8
    assert a.sum() == pytest.approx(mu.sum(), rel=1e-12)


def test_norms_of_point_mass():
    g = fh.Grid(1, 256, 16.0)
    delta = fh.make_data(g, "dirac", 1.0)
    assert fh.morrey_norm(g, delta, 1.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert fh.besov_morrey_norm(g, delta, -0.5, 2.0, 1.0) > 0.0


def test_admissibility_and_solve():
    rep = fh.admissible_params(0.8, 3.0, 1, -0.5, 3.0, 3.0)
    assert rep["local_ok"]
    assert not fh.admissible_params(0.8, 3.0, 1, 0.5, 3.0, 3.0)["local_ok"]
    g = fh.Grid(1, 64, 16.0)
    sol = fh.solve(g, fh.make_data(g, "gaussian", 0.2), 0.5, 3.0, -2 / 3, 3.0, 3.0, T=0.1, M=8)
    assert sol["verdict"] == "converged"
    assert sol["states"].shape == (8, 64)
    assert sol["times"][-1] == pytest.approx(0.1)


def test_errors_are_python_exceptions():
    g = fh.Grid(1, 64, 16.0)
    with pytest.raises(ValueError):
        fh.heat(0.1, g, np.zeros(10))
    with pytest.raises(ValueError):
        fh.make_data(g, "nonsense")


def test_cli_round_trip(tmp_path):
    code, out, err = fh.run_cli(["specfun", "--points", "4", "--out", str(tmp_path)])
    assert code == 0, err
    assert "run directory" in out
    assert fh.run_cli(["solve", "--s", "0.5"])[0] == 2

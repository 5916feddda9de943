import math

import numpy as np
import pytest

import gsbm


def test_thresholds():
    assert abs(gsbm.hidden_threshold(0.2, 0.25, 2500) - 0.232) < 1e-12
    assert abs(gsbm.unbalanced_threshold(0.2, 2500) - 0.216) < 1e-12


def test_semicircle_edge_and_bbp():
    spec = gsbm.GsbmSpec(gamma=0.5)
    assert abs(gsbm.find_upper_edge(spec).l_plus - 2.0) < 1e-8
    pred = gsbm.predict_outlier(spec, 2.0)
    assert abs(pred.z - 2.5) < 1e-9
    assert abs(pred.lambda_c - 1.0) < 1e-6
    assert gsbm.predict_outlier(spec, 0.5).z is None


def test_solve_reduced_semicircle():
    sol = gsbm.solve_reduced(gsbm.GsbmSpec(gamma=0.3), 2j)
    expected = (-2j + np.sqrt(-4 - 4 + 0j)) / 2
    assert abs(sol.m1 - expected) < 1e-10
    assert sol.m1.imag > 0


def test_density_integrates_to_one():
    x, rho = gsbm.density(gsbm.GsbmSpec(gamma=0.3, alpha1=2.0), -3.5, 3.5, 701, 1e-3)
    assert abs(np.trapezoid(rho, x) - 1.0) < 1e-2


def test_sampling_and_eigensolver():
    spec, _ = gsbm.realize(gsbm.GsbmSpec(gamma=0.5, lambda_=3.0), 200)
    m, h, u = gsbm.sample_gsbm(spec, seed=3)
    assert m.shape == (200, 200)
    assert np.allclose(m, m.T)
    assert np.allclose(m - h, 3.0 * np.outer(u, u))
    values, vectors = gsbm.eigen_symmetric(m, 1)
    ref = np.linalg.eigvalsh(m)[::-1]
    assert np.allclose(values, ref, atol=1e-10)
    v = np.asarray(vectors[0])
    assert np.linalg.norm(m @ v - values[0] * v) < 1e-10 * np.linalg.norm(m)
    m2, _, _ = gsbm.sample_gsbm(spec, seed=3)
    assert np.array_equal(m, m2)


def test_block_model_and_communities():
    params = gsbm.SbmParams(n=300, n1=75, p1=0.6, p2=0.2, q=0.2)
    spec, scale, shift = gsbm.from_sbm(params)
    assert math.isclose(scale, 1.0 / math.sqrt(300 * 0.2 * 0.8))
    assert shift == 0.2
    m = gsbm.sample_sbm(params, seed=1)
    labels, ov = gsbm.detect_communities(m, spec)
    assert len(labels) == 300
    assert ov > 0.5


def test_errors_map_to_exceptions():
    with pytest.raises(gsbm.ValidationError):
        gsbm.validate_spec(gsbm.GsbmSpec(gamma=1.5))
    with pytest.raises(gsbm.ValidationError):
        gsbm.eigen_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert issubclass(gsbm.ValidationError, gsbm.GsbmError)


def test_cli_round_trip():
    code, out, err = gsbm.run_cli(["threshold", "hidden", "--q", "0.2", "--gamma", "0.25", "--n", "2500"])
    assert code == 0
    assert out.strip() == "0.232"
    code, out, err = gsbm.run_cli(["edge", "--nope"])
    assert code == 1
    assert '"code":1' in err

import json
import math

import numpy as np
import pytest

import strobo


def test_version_and_problems():
    assert strobo.__version__ == "0.1.0"
    assert "vlasov_3d" in strobo.problem_names()
    assert "center" in strobo.default_parameters("const_eb_2d")


def test_beta_exact():
    re, im, z = strobo.beta("1,-1")
    assert (re, im) == ("0", "-1")
    assert z == complex(0, -1)
    # (k, -k) gives -i / k
    assert strobo.beta("3,-3")[:2] == ("0", "-1/3")


def test_config_errors():
    with pytest.raises(strobo.ConfigError):
        strobo.resolve("convergence", {"bogus": "1"})
    with pytest.raises(strobo.ConfigError):
        strobo.run("convergence", eps=[0.1, 0.05])
    cfg = dict(strobo.resolve("convergence", {"eps": "0.1,0.05,0.025"}))
    assert cfg["method"] == "diagonal"


def test_cost_guard():
    with pytest.raises(strobo.CostGuardError):
        strobo.run("convergence", problem="vlasov_varying_b_2d", eps=[1e-3, 1e-5, 1e-7], points=1)


def test_run_json_is_deterministic():
    kw = dict(eps=[0.1, 0.05, 0.025], points=4, order=1, seed=3)
    a = strobo.run_json("convergence", **kw)
    b = strobo.run_json("convergence", workers=2, **kw)
    assert a["version"] == "0.1.0"
    assert a["config"]["seed"] == "3"
    assert a["rows"] == b["rows"]
    assert a["columns"][0] == "eps"
    assert strobo.run("convergence", **kw) == strobo.run("convergence", **kw)


def test_averaged_fields_constant_e():
    # K^[2] = (J E, 0) for constant E: x-part rotated field, v-part zero
    pts = strobo.sample_points("const_eb_2d", 3, seed=2)
    k1, k2 = strobo.averaged_fields("const_eb_2d", 2, pts, {"E1": "1", "E2": "0.5"})
    assert k1.shape == (3, 4)
    np.testing.assert_allclose(k2[:, 2:], 0.0, atol=1e-8)
    np.testing.assert_allclose(np.abs(k2[:, :2]), np.tile([0.5, 1.0], (3, 1)), atol=1e-8)


def test_diagonal_matches_exact():
    pts = strobo.sample_points("const_eb_2d", 5, seed=4)
    approx = strobo.diagonal_eval("const_eb_2d", 2, 0.01, 1.0, pts)
    exact = strobo.reference("const_eb_2d", 0.01, 1.0, pts)
    np.testing.assert_allclose(approx, exact, atol=1e-9)


def test_reconstruct_rotation():
    pts = strobo.sample_points("elementary_rotation", 4, seed=5)
    eps = 0.01
    r = strobo.reconstruct("elementary_rotation", 0, eps, 1.0, pts)
    exact = strobo.reference("elementary_rotation", eps, 1.0, pts)
    np.testing.assert_allclose(r["f"], exact, atol=1e-8)
    assert np.all(r["residual"] < 1e-9)
    # S = t + (1 - e^{-2t}) |y|^2 / 2
    S = 1.0 + 0.5 * (1 - math.exp(-2.0)) * np.sum(pts**2, axis=1)
    np.testing.assert_allclose(r["S"], S, atol=1e-8)


def test_dump_contains_config():
    d = strobo.run_json("avg-fields", problem="const_eb_2d", points=2, order=2)
    assert d["command"] == "avg-fields"
    assert "config" in d
    json.dumps(d)

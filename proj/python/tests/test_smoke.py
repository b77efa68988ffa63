import math

import numpy as np
import pytest

import srwrate


def test_version():
    assert srwrate.__version__.startswith("0.1.0")


def test_antipodal_s1_and_w2():
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([[0.0, 1.0], [0.0, -1.0]])
    assert srwrate.wasserstein(x, y, 2) == pytest.approx(math.sqrt(2))
    r = srwrate.s1_distance(x, y)
    assert abs(r["distance"] - 1.0) < 1e-4
    assert r["coupling"].shape == (2, 2)
    assert r["coupling"].sum() == pytest.approx(1.0)


def test_sk_full_dimension_is_w2():
    x, _ = srwrate.sample_empirical("uniform-ball:d=3", 6, seed=1)
    y, _ = srwrate.sample_empirical("uniform-ball:d=3", 5, seed=2)
    assert srwrate.srw_distance(x, y, 3)["distance"] == pytest.approx(srwrate.wasserstein(x, y, 2), rel=1e-6)


def test_worst_case_measure():
    pts, w = srwrate.worst_case_measure(100, seed=3)
    assert pts.shape == (100, 5)
    assert np.allclose(w, 0.01)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    assert d[np.triu_indices(100, 1)].min() > 1 / 3


def test_packing_not_found():
    with pytest.raises(srwrate.PackingNotFound):
        srwrate.greedy_separated_set(1, 1.9999, 3, max_attempts=1000)


def test_invalid_measure_raises_value_error():
    with pytest.raises(ValueError):
        srwrate.wasserstein(np.array([[2.0]]), np.array([[0.0]]))


def test_bounds():
    b = srwrate.bounds(5, 1e6, 20)
    assert b["t_star"] == 5
    assert b["upper_curve"] == pytest.approx(0.43597, rel=1e-4)
    assert srwrate.t_star(1000) == (3, False)
    mad, std = srwrate.mad_binomial(2, 0.5)
    assert mad == pytest.approx(0.5)


def test_rate_is_reproducible():
    kw = dict(metric="w2", trials=2, seed=7, reference_size=64)
    a = srwrate.rate("uniform-ball:d=3", [4, 8], **kw)
    b = srwrate.rate("uniform-ball:d=3", [4, 8], threads=2, **kw)
    assert [r["n"] for r in a["rows"]] == [4, 8]
    assert a["rows"] == b["rows"]


def test_verify_lemmas():
    results = srwrate.verify("lemmas")
    assert results and all(r["passed"] for r in results)

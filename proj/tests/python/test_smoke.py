import math

import numpy as np
import pytest

import msde


def test_zoo_and_evaluation():
    model = msde.model_zoo("ginzburg_landau", {"eta": 1.0, "c": 0.5})
    assert model.d == 1 and model.m == 1
    assert model.drift(np.array([2.0]))[0] == pytest.approx(-6.0)
    assert model.diffusion(np.array([2.0]))[0, 0] == pytest.approx(1.0)
    with pytest.raises(msde.ConfigError):
        msde.model_zoo("unknown_model")


def test_simulation_is_deterministic():
    model = msde.model_zoo("ginzburg_landau")
    a = msde.simulate(model, np.array([1.0]), T=1.0, steps=200, stream_id=3, seed=42)
    b = msde.simulate(model, np.array([1.0]), T=1.0, steps=200, stream_id=3, seed=42)
    assert a.shape == (201, 1)
    assert np.array_equal(a, b)
    c = msde.simulate(model, np.array([1.0]), T=1.0, steps=200, stream_id=4, seed=42)
    assert not np.array_equal(a, c)


def test_brownian_path_shapes():
    inc, cum = msde.brownian_path(1.0, 64, m=2, stream_id=0, seed=9)
    assert inc.shape == (64, 2)
    assert cum.shape == (65, 2)
    assert np.allclose(np.cumsum(inc, axis=0), cum[1:])


def test_malliavin_first_gbm_identity():
    model = msde.model_zoo("gbm", {"mu": 0.05, "c": 0.2})
    x = msde.simulate(model, np.array([1.0]), T=1.0, steps=100, seed=7, scheme="explicit")
    grid = msde.malliavin_first(
        model, np.array([1.0]), T=1.0, steps=100, seed=7, method="direct", scheme="explicit"
    )
    for s in range(0, 101, 20):
        for t in range(s, 101, 20):
            assert grid[s, t, 0, 0] == pytest.approx(0.2 * x[t, 0], rel=1e-9)


def test_malliavin_matrix_brownian():
    model = msde.model_zoo("brownian", {"dim": 2})
    q, eigs = msde.malliavin_matrix(
        model, np.zeros(2), T=1.0, steps=128, seed=1, scheme="explicit"
    )
    assert np.allclose(q, np.eye(2), atol=1e-12)
    assert eigs[0] == pytest.approx(1.0)


def test_hormander_verdicts():
    kinetic = msde.hormander_rank(msde.model_zoo("kinetic"), np.zeros(2))
    assert kinetic["satisfied"] and kinetic["depth_at_full_rank"] == 1
    assert kinetic["rank_by_depth"][:2] == [1, 2]
    flat = msde.hormander_rank(msde.model_zoo("brownian", {"dim": 2}), np.ones(2))
    assert flat["satisfied"] and flat["depth_at_full_rank"] == 0


def test_gateaux_decay():
    model = msde.model_zoo("ginzburg_landau")
    report = msde.gateaux_test(
        model, np.array([1.0]), T=1.0, steps=512, epsilons=[1e-1, 1e-2], n_paths=20, seed=3
    )
    assert report["mean_sup_error"][1] < report["mean_sup_error"][0]


def test_cameron_martin_targets():
    rows = msde.cameron_martin(rate=0.5, T=1.0, steps=64, n_paths=20000, seed=11)
    targets = {"F=1": 1.0, "F=W(T)": 0.5, "F=W(T)^2": 1.25}
    for row in rows:
        assert row["pass"], row
        assert row["target"] == pytest.approx(targets[row["name"]])


def test_kde_of_normal_samples():
    rng = np.random.default_rng(0)
    xs, density, bandwidth = msde.kde(rng.standard_normal(20000).tolist())
    grid = np.asarray(xs)
    dens = np.asarray(density)
    assert len(grid) == 512 and bandwidth > 0
    phi = np.exp(-0.5 * grid**2) / math.sqrt(2 * math.pi)
    assert np.max(np.abs(dens - phi)) < 0.03


def test_validate_assumptions_monotone():
    model = msde.model_zoo("ginzburg_landau")
    report = msde.validate_assumptions(
        model, np.array([-2.0]), np.array([2.0]), n_samples=2000, seed=1
    )
    assert report.monotone_pass
    assert report.constant_L == pytest.approx(1.0, abs=0.05)

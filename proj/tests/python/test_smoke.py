import math

import numpy as np
import pytest

import psgla


def test_prox_catalog():
    assert np.allclose(psgla.prox_box(0.5, [2.0, -3.0, 0.2], [0, 0, 0], [1, 1, 1]), [1.0, 0.0, 0.2])
    assert np.allclose(psgla.prox_l1(1.0, [3.0, -0.5], 1.0), [2.0, 0.0])
    assert np.allclose(psgla.prox_psd(1.0, np.diag([2.0, -1.0])), np.diag([2.0, 0.0]))
    # t^2 - s t - gamma alpha = 0 with beta = 0
    t = psgla.prox_logbarrier(1.0, 1.0, 2.0, 0.0)
    assert t == pytest.approx((1 + math.sqrt(9)) / 2)
    p = psgla.prox_logdet(1.0, np.diag([1.0, 1.0]), 2.0, 0.0)
    assert np.allclose(p, np.eye(2) * 2.0)


def test_quantiles_and_w2():
    assert psgla.gamma_quantile(1.0, 1.0, 0.5) == pytest.approx(math.log(2.0))
    assert psgla.trunc_gauss_quantile(0.0, -1.0, 1.0, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert psgla.wasserstein2_1d([0, 1], [2, 0]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        psgla.wasserstein2_1d([0, 1], [1])


def test_sample_trunc_gauss_stays_in_box():
    out = psgla.sample({"experiment": "trunc-gauss", "sampler": "psgla", "gamma": 0.05,
                        "num_steps": 500, "seed": 3})
    xs = np.array([p[0] for p in out["points"]])
    assert len(out["steps"]) == 500
    assert xs.min() >= -1.0 and xs.max() <= 1.0
    assert all(out["feasible"])


def test_sample_is_deterministic_and_validated():
    cfg = {"experiment": "wishart-precision", "sampler": "psgla", "gamma": 0.05, "num_steps": 20,
           "data": {"d": 2, "n": 10, "seed": 1}, "seed": 4}
    a = psgla.sample(cfg)["points"][-1]
    b = psgla.sample(cfg)["points"][-1]
    assert a.shape == (2, 2)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError, match="myula_lambda"):
        psgla.sample({"experiment": "trunc-gauss", "sampler": "myula", "gamma": 0.1, "num_steps": 5})


def test_run_experiment_and_verify(tmp_path):
    man = psgla.run_experiment({"experiment": "wishart-precision", "sampler": "psgla", "gamma": 0.05,
                                "num_steps": 100, "data": {"d": 2, "n": 10, "seed": 1}},
                               str(tmp_path))
    names = {f["name"] for f in man["files"]}
    assert {"report.json", "convergence.csv"} <= names
    assert np.allclose(psgla.posterior_mean(2, 6.0, 10, 1).reshape(-1)[0] > 0, True)
    res = psgla.verify("lemma2", 500, 0)
    assert res[0]["passed"]
    gamma, k = psgla.tune_for_epsilon(1.0, 1.0, 1.0, 2.0, 1.0)
    assert gamma == pytest.approx(0.25) and k == 3

import json
import math

import numpy as np
import pytest

import hycon


def test_default_hyperparams():
    h = hycon.default_hyperparams()
    assert h["alpha"] == 0.8
    assert h["lambda1"] == h["lambda2"] == h["lambda3"] == 1.0
    assert h["d"] == 50
    assert h["batch_size"] == 32


def test_binarize():
    assert hycon.binarize(1.5) == "positive"
    assert hycon.binarize(0.0) == "negative"
    assert hycon.binarize(-2.0) == "negative"
    with pytest.raises(ValueError):
        hycon.binarize(7.0)


def test_generate_synthetic_deterministic():
    a = hycon.generate_synthetic(n_samples=12, dims=[5, 3, 4], seed=11)
    b = hycon.generate_synthetic(n_samples=12, dims=[5, 3, 4], seed=11)
    assert a["language"].shape == (12, 5)
    assert a["audio"].shape == (12, 3)
    assert a["visual"].shape == (12, 4)
    assert len(a["labels"]) == 12
    for key in ("language", "audio", "visual"):
        np.testing.assert_array_equal(a[key], b[key])
    assert a["labels"] == b["labels"]
    assert all(-3.0 <= s <= 3.0 for s in a["labels"])


def test_normalize_rows_unit_norm():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(6, 4))
    z = hycon.normalize_for_contrast(x)
    assert z.shape == x.shape
    assert np.all(z >= 0.0)
    for i in range(z.shape[0]):
        n = np.linalg.norm(z[i])
        assert n == 0.0 or abs(n - 1.0) < 1e-12


def test_pair_counts_law():
    labels = [1.0, -1.0, 2.0, -0.5, 0.5, 1.5, -2.0, 0.25]
    k = len(labels)
    scl = hycon.pair_counts(labels, "scl")
    iam = hycon.pair_counts(labels, "iamcl")
    iem = hycon.pair_counts(labels, "iemcl")
    assert len(scl) == len(iam) == len(iem) == 3 * k
    assert all(p == 2 and n == 0 for p, n in scl)
    assert all(p + n == k - 1 for p, n in iam)
    assert all(p + n == 2 * (k - 1) for p, n in iem)
    with pytest.raises(ValueError):
        hycon.pair_counts(labels, "bogus")


def _random_batch(seed, k=8, d=5):
    rng = np.random.default_rng(seed)
    mats = [rng.normal(size=(k, d)) + 0.5 for _ in range(3)]
    labels = list(rng.uniform(-3.0, 3.0, size=k))
    y_pred = list(rng.normal(size=k))
    return mats, labels, y_pred


def test_loss_report_structure():
    (l, a, v), labels, y_pred = _random_batch(7)
    r = hycon.loss_report(l, a, v, labels, y_pred=y_pred)
    for key in ("l_scl", "l_iamcl", "l_iamcl_refine", "l_iemcl",
                "l_iemcl_refine", "l_hybrid", "l_pred", "l_overall"):
        assert math.isfinite(r[key])
    assert r["l_overall"] == pytest.approx(r["l_pred"] + r["l_hybrid"], abs=1e-12)
    hybrid = (r["l_iamcl"] + r["l_iamcl_refine"]
              + r["l_iemcl"] + r["l_iemcl_refine"] + r["l_scl"])
    assert r["l_hybrid"] == pytest.approx(hybrid, abs=1e-12)

    off = hycon.loss_report(l, a, v, labels, y_pred=y_pred,
                            enable_scl=False, enable_iamcl=False,
                            enable_iemcl=False)
    assert off["l_hybrid"] == 0.0
    assert off["l_overall"] == off["l_pred"]


def test_loss_gradients_match_finite_difference():
    (l, a, v), labels, y_pred = _random_batch(13, k=6, d=4)
    gl, ga, gv = hycon.loss_gradients(l, a, v, labels, y_pred=y_pred)
    assert gl.shape == l.shape and ga.shape == a.shape and gv.shape == v.shape

    h = 1e-6
    base = hycon.loss_report(l, a, v, labels, y_pred=y_pred)["l_overall"]

    def perturbed(i, j, delta):
        lp = l.copy()
        lp[i, j] += delta
        return hycon.loss_report(lp, a, v, labels, y_pred=y_pred)["l_overall"]

    assert base == pytest.approx(perturbed(0, 0, 0.0), abs=0.0)
    for (i, j) in [(0, 0), (2, 1), (5, 3)]:
        numeric = (perturbed(i, j, h) - perturbed(i, j, -h)) / (2 * h)
        assert gl[i, j] == pytest.approx(numeric, abs=1e-4)


def test_gradient_check_quick():
    res = hycon.gradient_check(losses=["scl", "pred"], n_batches=2)
    assert res["pass"]
    assert res["checks_run"] == 4
    assert set(res["per_loss"]) == {"scl", "pred"}
    assert res["max_rel_err"] < 1e-4
    assert set(hycon.gradcheck_loss_names()) >= {
        "scl", "iamcl", "iemcl", "pred", "classical", "triplet",
        "hard_triplet", "npair"}


def test_compute_metrics():
    m = hycon.compute_metrics([1.0, -1.0, 2.0, 0.5], [1.0, -2.0, 2.0, -0.5])
    assert m["mae"] == pytest.approx(0.5)
    assert m["acc2"] == pytest.approx(0.75)
    with pytest.raises(ValueError):
        hycon.compute_metrics([1.0], [1.0, 2.0])


def test_silhouette_and_pca():
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]])
    s = hycon.silhouette(pts, [-1.0, -2.0, 1.0, 2.0])
    assert 0.9 < s <= 1.0
    coords = hycon.pca2d(pts)
    assert coords.shape == (4, 2)
    assert np.var(coords[:, 0]) >= np.var(coords[:, 1])


def test_run_experiment_tiny():
    cfg = {
        "hyperparams": {"alpha": 0.8, "d": 6, "batch_size": 8,
                        "learning_rate": 2e-3},
        "model": {"hidden": 8},
        "data": {"synthetic": {"n_samples": 60, "dims": [6, 4, 5], "seed": 3},
                 "split": {"train_frac": 0.7, "val_frac": 0.15,
                           "split_seed": 5}},
        "train": {"epochs": 2, "patience": 0},
        "seeds": [1],
    }
    out = hycon.run_experiment(json.dumps(cfg))
    assert out["regime"] == "hycon"
    assert len(out["per_seed"]) == 1
    assert out["per_seed"][0]["seed"] == 1
    assert math.isfinite(out["mean"]["mae"])
    assert math.isfinite(out["mean"]["silhouette"])
    assert out["std"]["mae"] == 0.0

    with pytest.raises(ValueError):
        hycon.run_experiment("{ not json")
    bad = dict(cfg, hyperparams=dict(cfg["hyperparams"], alpha=2.0))
    with pytest.raises(ValueError):
        hycon.run_experiment(json.dumps(bad))


def test_numerical_error_translation():
    x = np.full((4, 3), np.nan)
    y = np.ones((4, 3))
    with pytest.raises(ArithmeticError):
        hycon.loss_report(x, y, y, [1.0, -1.0, 0.5, -0.5])

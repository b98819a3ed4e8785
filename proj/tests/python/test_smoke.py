"""Smoke tests for the python surface: every binding is exercised against a
numpy re-implementation or a structural expectation."""

import numpy as np
import pytest

import projseg


def test_version():
    assert projseg.__version__


def test_conv3d_matches_numpy_reference():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, size=(4, 4, 5, 2))
    w = rng.uniform(-1, 1, size=(3, 3, 3, 2, 3))
    b = rng.uniform(-1, 1, size=3)
    got = projseg.conv3d(x, w, b)

    xp = np.pad(x, ((1, 1), (1, 1), (1, 1), (0, 0)))
    expect = np.zeros((4, 4, 5, 3))
    for dx in range(3):
        for dy in range(3):
            for dz in range(3):
                window = xp[dx : dx + 4, dy : dy + 4, dz : dz + 5, :]
                expect += np.einsum("lwhc,co->lwho", window, w[dx, dy, dz])
    expect += b
    np.testing.assert_allclose(got, expect, rtol=1e-12, atol=1e-12)


def test_uni_pool_h_matches_numpy():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=(3, 3, 8, 2))
    got = projseg.uni_pool_h(x, 2)
    expect = x.reshape(3, 3, 4, 2, 2).max(axis=3)
    np.testing.assert_array_equal(got, expect)


def test_collapse_conv_mean():
    x = np.arange(2 * 2 * 4 * 1, dtype=float).reshape(2, 2, 4, 1)
    w = np.full((1, 1, 4, 1, 1), 0.25)
    got = projseg.collapse_conv(x, w, np.zeros(1))
    np.testing.assert_allclose(got[..., 0], x[..., 0].mean(axis=2), rtol=1e-12)


def test_relu_and_softmax():
    x = np.array([[[-1.0, 0.0, 2.0]]])
    np.testing.assert_array_equal(projseg.relu(x), [[[0.0, 0.0, 2.0]]])
    probs = projseg.softmax(np.zeros((2, 2, 4)))
    np.testing.assert_allclose(probs, 0.25)


def test_softmax_ce_uniform_is_ln_k():
    loss = projseg.softmax_ce(np.zeros((4, 4, 2)), np.zeros((4, 4), dtype=np.int64))
    assert loss == pytest.approx(np.log(2.0), abs=1e-12)


def test_resize_h_linear_ramp():
    x = np.arange(10, dtype=float).reshape(1, 1, 10, 1)
    got = projseg.resize_h_linear(x, 4)
    np.testing.assert_allclose(got.ravel(), [0.0, 3.0, 6.0, 9.0], rtol=1e-12)


def test_distance_map_properties():
    d = projseg.distance_map(9, 9)
    assert d[4, 4] == 0.0
    assert d[0, 0] == pytest.approx(1.0)
    np.testing.assert_allclose(d, d[::-1, :], rtol=1e-12)


def test_projection_matches_numpy():
    rng = np.random.default_rng(3)
    vol = rng.uniform(size=(6, 6, 10))
    ilm = rng.integers(0, 3, size=(6, 6))
    opl = ilm + rng.integers(0, 3, size=(6, 6))
    bm = opl + rng.integers(0, 3, size=(6, 6))

    full_avg = projseg.project(vol, "full", "avg")
    np.testing.assert_allclose(full_avg, vol.mean(axis=2), rtol=1e-12)

    b5 = projseg.project(vol, "ilm_opl", "max", ilm, opl, bm)
    for x in range(6):
        for y in range(6):
            assert b5[x, y] == vol[x, y, ilm[x, y] : opl[x, y] + 1].max()

    maps = projseg.generate_all(vol, vol, ilm, opl, bm)
    assert sorted(maps.keys()) == ["B1", "B2", "B3", "B4", "B5", "B6"]
    np.testing.assert_array_equal(maps["B5"], b5)


def test_metrics_against_numpy():
    rng = np.random.default_rng(4)
    pred = (rng.uniform(size=(32, 32)) < 0.3).astype(float)
    gt = (rng.uniform(size=(32, 32)) < 0.3).astype(float)
    tp, fp, fn, tn = projseg.confusion(pred, gt)
    assert tp == int(((pred == 1) & (gt == 1)).sum())
    assert tn == int(((pred == 0) & (gt == 0)).sum())
    assert tp + fp + fn + tn == 32 * 32

    d = projseg.dice(tp, fp, fn, tn)
    j = projseg.jaccard(tp, fp, fn, tn)
    assert d == pytest.approx(2 * tp / (2 * tp + fp + fn))
    assert j == pytest.approx(tp / (tp + fp + fn))
    assert d == pytest.approx(2 * j / (1 + j))
    assert 0.0 <= projseg.balanced_accuracy(tp, fp, fn, tn) <= 1.0


def test_tiling_and_seam():
    origins = projseg.plan_patches(400, 400, 100, 100, 100)
    assert len(origins) == 16
    assert len(projseg.plan_patches(400, 400, 100, 100, 50)) == 49

    rng = np.random.default_rng(5)
    full = rng.uniform(size=(32, 32, 2))
    outputs = [
        ((x, y), full[x : x + 16, y : y + 16, :]) for (x, y) in projseg.plan_patches(32, 32, 16, 16, 8)
    ]
    spliced = projseg.splice(outputs, 32, 32, 16, 16, 8)
    np.testing.assert_allclose(spliced, full, atol=1e-12)

    ramp = np.add.outer(np.arange(32.0), np.arange(32.0))
    assert projseg.seam_score(ramp, 8, 8, 8) <= 1e-12


def test_phantom_determinism_and_geometry():
    a = projseg.gen_phantom(seed=11, L=48, W=48, H=24, faz_radius=8.0)
    b = projseg.gen_phantom(seed=11, L=48, W=48, H=24, faz_radius=8.0)
    np.testing.assert_array_equal(a["octa"], b["octa"])
    np.testing.assert_array_equal(a["rv_gt"], b["rv_gt"])

    assert a["octa"].shape == (48, 48, 24)
    assert (a["rv_gt"] * a["faz_gt"]).sum() == 0  # masks are disjoint
    assert (a["ilm"] <= a["opl"]).all() and (a["opl"] <= a["bm"]).all()


def test_error_type_is_exposed():
    with pytest.raises(projseg.ProjsegError):
        projseg.uni_pool_h(np.zeros((2, 2, 7, 1)), 2)


def test_cli_pipeline(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    data = tmp_path / "data"
    run = tmp_path / "run"
    cfg.write_text(
        "seed = 5\ntask = rv\nvariant = ipnv2\n"
        f"data_dir = {data}\n"
        "gen.n = 8\ngen.length = 32\ngen.width = 32\ngen.height = 16\n"
        "gen.vessel_count = 6\ngen.faz_radius = 6\ngen.ilm_base = 3\n"
        "gen.inner_thickness = 6\ngen.outer_thickness = 5\n"
        "gen.train_frac = 0.5\ngen.val_frac = 0.25\ngen.test_frac = 0.25\n"
        "patch.length = 8\npatch.width = 8\npatch.height = 8\npatch.step = 4\n"
        "ipn.channels = 4,6\nipn.strides = 2,4\nipn.convs_per_plm = 1\nipn.skip_channels = 4\n"
        "pp.depth = 2\npp.base_channels = 4\npp.penultimate_channels = 4\n"
        "global.depth = 2\nglobal.base_channels = 4\n"
        "train.max_iters = 30\ntrain.save_every = 10\n"
        "stage2.max_iters = 5\nstage2.save_every = 5\n"
    )
    assert projseg.run_cli(["gen", "--config", str(cfg), "--out", str(data)]) == 0
    assert projseg.run_cli(["train", "--config", str(cfg), "--out", str(run)]) == 0
    assert projseg.run_cli(["infer", "--config", str(cfg), "--out", str(run)]) == 0
    assert projseg.run_cli(["eval", "--config", str(cfg), "--out", str(run)]) == 0
    assert (run / "reports" / "eval_rv.csv").exists()

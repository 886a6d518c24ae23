import math

import numpy as np
import pytest

import etraj


def texture(h, w, seed=0):
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:h, 0:w]
    img = np.zeros((h, w))
    for _ in range(10):
        f = rng.uniform(0.08, 0.5)
        a = rng.uniform(0, 2 * math.pi)
        img += np.sin(f * (np.cos(a) * x + np.sin(a) * y) + rng.uniform(0, 2 * math.pi))
    return (0.5 + 0.04 * img)[..., None]


def test_still_blur_is_identity():
    sharp = texture(12, 14)
    offsets = np.zeros((15, 12, 14, 2))
    assert np.array_equal(etraj.create_blur(sharp, offsets), sharp)
    assert etraj.psnr(sharp, sharp) == math.inf


def test_trajectory_field_roundtrip(tmp_path):
    t = etraj.TrajectoryField("quadratic", 15, 4, 5)
    params = np.arange(4 * 5 * 4, dtype=float).reshape(4, 5, 4) / 10
    t.params = params
    path = tmp_path / "t.etrf"
    etraj.write_trajectory(t, path)
    back = etraj.read_trajectory(path)
    assert back.mode == "quadratic"
    assert np.allclose(back.params, params, atol=1e-6)
    offsets = t.expand(15)
    assert offsets.shape == (15, 4, 5, 2)
    assert np.array_equal(offsets[7], np.zeros((4, 5, 2)))


def test_recover_uniform_motion():
    sharp = texture(48, 48, seed=3)
    flow = etraj.generate_flow(48, 48, max_disp=6.0, min_disp=3.0, seed=11)
    blurry = etraj.render_blur(sharp, flow)
    traj, report = etraj.recover(blurry, sharp, iterations=150)
    assert etraj.motion_mse(traj.endpoint_flow(), flow) < 1.0
    assert report["reblur_psnr"] > 35.0
    assert len(report["loss_trace"]) == report["iterations_run"]
    frames = etraj.extract_frames(sharp, traj, 5)
    assert len(frames) == 5
    assert np.array_equal(frames[2], sharp)


def test_errors():
    with pytest.raises(ValueError):
        etraj.reblur(texture(8, 8), etraj.TrajectoryField("linear", 15, 8, 8), 4)
    with pytest.raises(etraj.DimensionError):
        etraj.psnr(np.zeros((4, 4)), np.zeros((4, 5)))
    with pytest.raises(etraj.IoError):
        etraj.load_image("/nonexistent/x.png")

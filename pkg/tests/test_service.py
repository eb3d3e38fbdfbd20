import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from tubekit import (
    appearance_loss,
    gen_synthetic,
    motion_loss,
    video_to_pcv_bytes,
)
from tubekit.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def _pcv_b64(kind="raise", frames=7, points=128, seed=3) -> str:
    video = gen_synthetic(kind, frames, points, seed)
    return base64.b64encode(video_to_pcv_bytes(video)).decode("ascii")


def _f64_b64(arr) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["service"] == "tubekit"


def test_gen_and_divide(client):
    gen = client.post("/v1/gen", json={"kind": "static", "frames": 5, "points": 64, "seed": 1}).json()
    assert gen["frames"] == 5
    stats = client.post(
        "/v1/divide",
        json={"pcv_b64": gen["pcv_b64"], "config": {"spatial_downsample": 16, "temporal_downsample": 1}},
    ).json()
    assert stats["num_tubes"] == 3 * 4
    assert stats["anchor_frames"] == [1, 2, 3]


def test_gen_rejects_unknown_kind(client):
    r = client.post("/v1/gen", json={"kind": "sprint"})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "bad_input"


def test_validate_endpoint(client):
    r = client.post("/v1/validate", json={"pcv_b64": _pcv_b64("static", 5, 64, 0)}).json()
    assert r["ok"] is True and r["violations"] == []


def test_mask_endpoint_flags(client):
    r = client.post("/v1/mask", json={"num_tubes": 32, "mask_ratio": 0.75, "seed": 9}).json()
    assert r["num_masked"] == 24
    assert sum(r["flags"]) == 24
    again = client.post("/v1/mask", json={"num_tubes": 32, "mask_ratio": 0.75, "seed": 9}).json()
    assert again["flags"] == r["flags"]


def test_mask_endpoint_requires_input(client):
    r = client.post("/v1/mask", json={"mask_ratio": 0.5})
    assert r.status_code == 400


def test_targets_deterministic(client):
    payload = {"pcv_b64": _pcv_b64(), "config": {"spatial_downsample": 16, "seed": 5}}
    a = client.post("/v1/targets", json=payload).json()
    b = client.post("/v1/targets", json=payload).json()
    assert a["bundle_b64"] == b["bundle_b64"]
    assert a["num_masked"] == len(a["masked_indices"])


def test_targets_bad_magic_maps_to_400(client):
    bogus = base64.b64encode(b"NOPE" + b"\x00" * 16).decode("ascii")
    r = client.post("/v1/targets", json={"pcv_b64": bogus, "config": {}})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "bad_magic"


def test_targets_invalid_base64(client):
    r = client.post("/v1/targets", json={"pcv_b64": "!!!", "config": {}})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "bad_input"


def test_loss_bundles_self_is_zero(client):
    t = client.post("/v1/targets", json={"pcv_b64": _pcv_b64(), "config": {"spatial_downsample": 16}}).json()
    r = client.post(
        "/v1/loss",
        json={"pred_bundle_b64": t["bundle_b64"], "gt_bundle_b64": t["bundle_b64"]},
    ).json()
    assert r["app_loss"] == 0.0 and r["motion_loss"] == 0.0 and r["total_loss"] == 0.0
    assert r["num_tubes"] == t["num_masked"]


def test_loss_arrays_matches_library(client):
    gen = np.random.default_rng(4)
    gt_recon = gen.uniform(size=(3, 8, 3))
    pred_recon = gt_recon + gen.normal(scale=0.1, size=gt_recon.shape)
    gt_cd = gen.uniform(-2, 2, size=(2, 8))
    pred_cd = gt_cd + gen.normal(size=gt_cd.shape)
    r = client.post(
        "/v1/loss",
        json={
            "pred": {"recon_b64": _f64_b64(pred_recon), "recon_shape": [3, 8, 3],
                     "cd_b64": _f64_b64(pred_cd), "cd_shape": [2, 8]},
            "gt": {"recon_b64": _f64_b64(gt_recon), "recon_shape": [3, 8, 3],
                   "cd_b64": _f64_b64(gt_cd), "cd_shape": [2, 8]},
            "recon_mode": "decoupled",
        },
    ).json()
    app_loss, app_grad = appearance_loss(pred_recon, gt_recon, "decoupled")
    mot_loss, _ = motion_loss(pred_cd, gt_cd)
    assert r["app_loss"] == app_loss
    assert r["motion_loss"] == mot_loss
    assert r["total_loss"] == app_loss + mot_loss
    grad = np.frombuffer(base64.b64decode(r["grad_app_b64"]), dtype="<f8").reshape(r["grad_app_shape"])
    assert np.array_equal(grad, app_grad)


def test_loss_arrays_shape_violation(client):
    r = client.post(
        "/v1/loss",
        json={
            "pred": {"recon_b64": _f64_b64(np.zeros(5)), "recon_shape": [3, 8, 3]},
            "gt": {"recon_b64": _f64_b64(np.zeros((3, 8, 3))), "recon_shape": [3, 8, 3]},
        },
    )
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "shape_mismatch"


def test_loss_requires_inputs(client):
    r = client.post("/v1/loss", json={})
    assert r.status_code == 400


def test_stats_endpoint(client):
    t = client.post("/v1/targets", json={"pcv_b64": _pcv_b64("static", 5, 128, 2),
                                         "config": {"spatial_downsample": 16}}).json()
    s = client.post("/v1/stats", json={"bundle_b64": t["bundle_b64"], "per_tube": True}).json()
    assert s["num_masked"] == t["num_masked"]
    assert s["max_abs_cd"] == 0.0
    assert len(s["tubes"]) == t["num_masked"]


def test_gradcheck_endpoint(client):
    r = client.post("/v1/gradcheck", json={"trials": 10, "seed": 1}).json()
    assert r["ok"] is True
    assert r["chamfer_max_rel_error"] < 1e-4


def test_verify_endpoint(client):
    r = client.post("/v1/verify", json={"cases": 25, "seed": 1}).json()
    assert r["ok"] is True
    assert r["fps_mismatches"] == 0

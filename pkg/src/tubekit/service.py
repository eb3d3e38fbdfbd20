"""HTTP service exposing the pipeline: the package's one external surface.

Payload conventions: point cloud videos travel as base64 PCV bytes, target
bundles as base64 TBND bytes, and float64 gradient buffers as base64
little-endian arrays with explicit shapes.  Domain errors map to HTTP 400
with a stable machine code; nothing here computes — endpoints marshal in and
out of the core modules.
"""

from __future__ import annotations

import base64
import binascii

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .bundle import (
    TargetBundle,
    build_targets_bundle,
    bundle_from_bytes,
    bundle_to_bytes,
    summarize_bundle,
)
from .errors import InputError, ShapeError, TubekitError
from .losses import appearance_loss, motion_loss, total_loss
from .pcv import video_from_pcv_bytes, video_to_pcv_bytes
from .pipeline import PipelineConfig, anchor_frames, divide, mask_flags
from .synth import KINDS, gen_synthetic
from .types import DirectionCodebook, LossReport, validate_video
from .verify import run_gradcheck, run_oracle_suite

app = FastAPI(title="tubekit", version=__version__)


@app.exception_handler(TubekitError)
def _domain_error(_request: Request, exc: TubekitError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": {"code": exc.code, "message": str(exc)}})


def _b64decode(data: str, what: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise InputError(f"invalid base64 in {what}: {exc}") from exc


def _f64_from_b64(data: str, shape: list[int], what: str) -> np.ndarray:
    raw = _b64decode(data, what)
    expected = int(np.prod(shape)) if shape else 1
    if len(raw) != expected * 8:
        raise ShapeError(f"{what}: expected {expected} float64 values ({expected * 8} bytes), got {len(raw)} bytes")
    return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()


def _f64_to_b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


class ConfigModel(BaseModel):
    """Wire form of PipelineConfig plus an optional custom codebook."""

    l: int = 3
    n: int = 32
    radius: float = 0.3
    spatial_downsample: int = 32
    temporal_downsample: int = 2
    mask_ratio: float = 0.75
    recon_mode: str = "decoupled"
    seed: int = 0
    sections: int = 8
    interpolate: bool = True
    stride: int = 1
    normalize_cd: bool = False
    motion_stream: bool = True
    motion_weight: float = 1.0
    codebook: list[list[float]] | None = None

    def to_config(self) -> PipelineConfig:
        data = self.model_dump(exclude={"codebook"})
        return PipelineConfig(**data)

    def to_codebook(self) -> DirectionCodebook | None:
        if self.codebook is None:
            return None
        return DirectionCodebook(np.asarray(self.codebook, dtype=np.float64))


class GenRequest(BaseModel):
    kind: str = "static"
    frames: int = 24
    points: int = 1024
    seed: int = 0


class VideoRequest(BaseModel):
    pcv_b64: str
    config: ConfigModel = Field(default_factory=ConfigModel)


class MaskRequest(BaseModel):
    pcv_b64: str | None = None
    num_tubes: int | None = None
    mask_ratio: float = 0.75
    seed: int = 0
    config: ConfigModel = Field(default_factory=ConfigModel)


class ArraysPayload(BaseModel):
    """One tube's prediction or ground truth as raw float64 buffers."""

    recon_b64: str
    recon_shape: list[int]
    cd_b64: str | None = None
    cd_shape: list[int] | None = None


class LossRequest(BaseModel):
    pred_bundle_b64: str | None = None
    gt_bundle_b64: str | None = None
    pred: ArraysPayload | None = None
    gt: ArraysPayload | None = None
    recon_mode: str | None = None
    motion_weight: float | None = None
    include_gradients: bool = False


class StatsRequest(BaseModel):
    bundle_b64: str
    per_tube: bool = False


class GradcheckRequest(BaseModel):
    trials: int = 200
    seed: int = 0


class VerifyRequest(BaseModel):
    cases: int = 500
    seed: int = 0


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "service": "tubekit", "version": __version__}


@app.post("/v1/gen")
def gen_endpoint(req: GenRequest) -> dict:
    if req.kind not in KINDS:
        raise InputError(f"unknown kind {req.kind!r}; choose from {KINDS}")
    video = gen_synthetic(req.kind, req.frames, req.points, req.seed)
    return {
        "pcv_b64": base64.b64encode(video_to_pcv_bytes(video)).decode("ascii"),
        "frames": video.num_frames,
        "points": [len(f) for f in video.frames],
    }


@app.post("/v1/validate")
def validate_endpoint(req: VideoRequest) -> dict:
    video = video_from_pcv_bytes(_b64decode(req.pcv_b64, "pcv_b64"))
    report = validate_video(video)
    return {"ok": report.ok, "violations": list(report.violations)}


@app.post("/v1/divide")
def divide_endpoint(req: VideoRequest) -> dict:
    video = video_from_pcv_bytes(_b64decode(req.pcv_b64, "pcv_b64"))
    config = req.config.to_config()
    tubes = divide(video, config)
    anchors = anchor_frames(video.num_frames, config)
    per_anchor: dict[int, int] = {}
    for tube in tubes:
        per_anchor[tube.key_point.frame_index] = per_anchor.get(tube.key_point.frame_index, 0) + 1
    return {
        "num_tubes": len(tubes),
        "anchor_frames": anchors,
        "keypoints_per_anchor": [per_anchor.get(a, 0) for a in anchors],
        "tube_shape": [config.l, config.n, 3],
        "num_frames": video.num_frames,
        "points_per_frame": [len(f) for f in video.frames],
    }


@app.post("/v1/mask")
def mask_endpoint(req: MaskRequest) -> dict:
    if req.num_tubes is not None:
        n = int(req.num_tubes)
    elif req.pcv_b64 is not None:
        video = video_from_pcv_bytes(_b64decode(req.pcv_b64, "pcv_b64"))
        n = len(divide(video, req.config.to_config()))
    else:
        raise InputError("provide either pcv_b64 or num_tubes")
    flags = mask_flags(n, req.mask_ratio, req.seed)
    return {
        "num_tubes": n,
        "num_masked": int(flags.sum()),
        "mask_ratio": req.mask_ratio,
        "seed": req.seed,
        "flags": flags.astype(int).tolist(),
    }


@app.post("/v1/targets")
def targets_endpoint(req: VideoRequest) -> dict:
    video = video_from_pcv_bytes(_b64decode(req.pcv_b64, "pcv_b64"))
    config = req.config.to_config()
    bundle = build_targets_bundle(video, config, req.config.to_codebook())
    data = bundle_to_bytes(bundle)
    return {
        "bundle_b64": base64.b64encode(data).decode("ascii"),
        "num_tubes": bundle.num_tubes,
        "num_masked": len(bundle.records),
        "masked_indices": [rec.tube_index for rec in bundle.records],
        "bytes": len(data),
    }


def _bundle_pairs(pred: TargetBundle, gt: TargetBundle) -> list[tuple]:
    pred_by_idx = {rec.tube_index: rec for rec in pred.records}
    gt_by_idx = {rec.tube_index: rec for rec in gt.records}
    if sorted(pred_by_idx) != sorted(gt_by_idx):
        raise InputError("pred and gt bundles cover different tube indices")
    return [(pred_by_idx[i], gt_by_idx[i]) for i in sorted(gt_by_idx)]


def _loss_from_bundles(req: LossRequest) -> dict:
    pred = bundle_from_bytes(_b64decode(req.pred_bundle_b64, "pred_bundle_b64"))
    gt = bundle_from_bytes(_b64decode(req.gt_bundle_b64, "gt_bundle_b64"))
    mode = req.recon_mode or gt.config.recon_mode
    weight = req.motion_weight if req.motion_weight is not None else gt.config.motion_weight
    per_tube = []
    reports: list[LossReport] = []
    for p_rec, g_rec in _bundle_pairs(pred, gt):
        app = appearance_loss(p_rec.recon.astype(np.float64), g_rec.recon.astype(np.float64), mode)
        if g_rec.cd.size:
            mot = motion_loss(p_rec.cd.astype(np.float64), g_rec.cd.astype(np.float64))
        else:
            mot = (0.0, np.zeros_like(g_rec.cd, dtype=np.float64))
        report = total_loss(app, mot, motion_weight=weight)
        reports.append(report)
        entry = {
            "tube_index": g_rec.tube_index,
            "app_loss": report.app_loss,
            "motion_loss": report.motion_loss,
            "total_loss": report.total_loss,
        }
        if req.include_gradients:
            entry["grad_app_b64"] = _f64_to_b64(report.grad_app)
            entry["grad_app_shape"] = list(report.grad_app.shape)
            entry["grad_motion_b64"] = _f64_to_b64(report.grad_motion)
            entry["grad_motion_shape"] = list(report.grad_motion.shape)
        per_tube.append(entry)
    if not reports:
        raise InputError("bundles contain no masked-tube records")
    n = len(reports)
    return {
        "recon_mode": mode,
        "num_tubes": n,
        "app_loss": sum(r.app_loss for r in reports) / n,
        "motion_loss": sum(r.motion_loss for r in reports) / n,
        "total_loss": sum(r.total_loss for r in reports) / n,
        "per_tube": per_tube,
    }


def _loss_from_arrays(req: LossRequest) -> dict:
    mode = req.recon_mode or "decoupled"
    weight = req.motion_weight if req.motion_weight is not None else 1.0
    pred_recon = _f64_from_b64(req.pred.recon_b64, req.pred.recon_shape, "pred.recon")
    gt_recon = _f64_from_b64(req.gt.recon_b64, req.gt.recon_shape, "gt.recon")
    app = appearance_loss(pred_recon, gt_recon, mode)
    if req.pred.cd_b64 is not None and req.gt.cd_b64 is not None:
        pred_cd = _f64_from_b64(req.pred.cd_b64, req.pred.cd_shape or [], "pred.cd")
        gt_cd = _f64_from_b64(req.gt.cd_b64, req.gt.cd_shape or [], "gt.cd")
        mot = motion_loss(pred_cd, gt_cd)
    else:
        mot = (0.0, np.zeros((0, 0)))
    report = total_loss(app, mot, motion_weight=weight)
    return {
        "recon_mode": mode,
        "num_tubes": 1,
        "app_loss": report.app_loss,
        "motion_loss": report.motion_loss,
        "total_loss": report.total_loss,
        "grad_app_b64": _f64_to_b64(report.grad_app),
        "grad_app_shape": list(report.grad_app.shape),
        "grad_motion_b64": _f64_to_b64(report.grad_motion),
        "grad_motion_shape": list(report.grad_motion.shape),
    }


@app.post("/v1/loss")
def loss_endpoint(req: LossRequest) -> dict:
    if req.pred_bundle_b64 is not None and req.gt_bundle_b64 is not None:
        return _loss_from_bundles(req)
    if req.pred is not None and req.gt is not None:
        return _loss_from_arrays(req)
    raise InputError("provide pred/gt bundles or pred/gt arrays")


@app.post("/v1/stats")
def stats_endpoint(req: StatsRequest) -> dict:
    bundle = bundle_from_bytes(_b64decode(req.bundle_b64, "bundle_b64"))
    return summarize_bundle(bundle, per_tube=req.per_tube)


@app.post("/v1/gradcheck")
def gradcheck_endpoint(req: GradcheckRequest) -> dict:
    return run_gradcheck(trials=req.trials, seed=req.seed)


@app.post("/v1/verify")
def verify_endpoint(req: VerifyRequest) -> dict:
    return run_oracle_suite(cases=req.cases, seed=req.seed)

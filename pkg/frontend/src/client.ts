/**
 * HTTP bindings for the tubekit service.
 *
 * Host buffers go in as typed-array views (zero-copy until serialization),
 * results come back as parsed bundles and, for losses, gradients written into
 * caller-allocated output buffers. No computation happens on this side: every
 * number is produced by the service, so results are bitwise identical to the
 * native pipeline and CLI for the same inputs and seed.
 */

import {
  BufferView,
  bytesOf,
  checkView,
  f64FromBase64,
  fromBase64,
  toBase64,
} from "./buffers.js";
import { parseBundle, TargetBundle } from "./bundle.js";
import { TubekitApiError, TubekitBoundaryError } from "./errors.js";
import { encodePcv } from "./pcv.js";

export interface PipelineConfig {
  l?: number;
  n?: number;
  radius?: number;
  spatial_downsample?: number;
  temporal_downsample?: number;
  mask_ratio?: number;
  recon_mode?: "decoupled" | "coupled" | "middle";
  seed?: number;
  sections?: number;
  interpolate?: boolean;
  stride?: number;
  normalize_cd?: boolean;
  motion_stream?: boolean;
  motion_weight?: number;
  codebook?: number[][];
}

export interface TargetsResult {
  bundleBytes: Uint8Array;
  bundle: TargetBundle;
  maskFlags: boolean[];
  numTubes: number;
  maskedIndices: number[];
}

export interface LossesRequest {
  predRecon: BufferView<Float64Array>;
  gtRecon: BufferView<Float64Array>;
  predCd?: BufferView<Float64Array>;
  gtCd?: BufferView<Float64Array>;
  reconMode?: "decoupled" | "coupled" | "middle";
  /** Caller-allocated gradient outputs; lengths must match the inputs. */
  out?: { gradApp?: Float64Array; gradMotion?: Float64Array };
}

export interface LossesResult {
  appLoss: number;
  motionLoss: number;
  totalLoss: number;
  gradApp: Float64Array;
  gradAppShape: number[];
  gradMotion: Float64Array;
  gradMotionShape: number[];
}

async function unwrap(response: Response): Promise<any> {
  if (!response.ok) {
    let code = "http_error";
    let message = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as any;
      if (body?.error) {
        code = body.error.code ?? code;
        message = body.error.message ?? message;
      }
    } catch {
      // non-JSON error body: keep the generic message
    }
    throw new TubekitApiError(code, message, response.status);
  }
  return response.json();
}

export class TubekitClient {
  constructor(readonly baseUrl: string) {}

  private async post(path: string, payload: unknown): Promise<any> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    return unwrap(response);
  }

  async health(): Promise<{ status: string; version: string }> {
    return unwrap(await fetch(`${this.baseUrl}/health`));
  }

  /** Generate a synthetic video server-side; returns raw PCV bytes. */
  async gen(kind: string, frames: number, points: number, seed: number): Promise<Uint8Array> {
    const body = await this.post("/v1/gen", { kind, frames, points, seed });
    return fromBase64(body.pcv_b64);
  }

  /**
   * Divide + mask + assemble targets for a (T, P, 3) float32 video buffer.
   * Matches the native pipeline bit for bit on the same data and seed.
   */
  async targets(video: BufferView<Float32Array>, config: PipelineConfig = {}): Promise<TargetsResult> {
    checkView(video, "video", "f32", 3);
    const body = await this.post("/v1/targets", {
      pcv_b64: toBase64(encodePcv(video)),
      config,
    });
    const bundleBytes = fromBase64(body.bundle_b64);
    const bundle = parseBundle(bundleBytes);
    const maskFlags: boolean[] = new Array(body.num_tubes).fill(false);
    for (const idx of body.masked_indices) maskFlags[idx] = true;
    return {
      bundleBytes,
      bundle,
      maskFlags,
      numTubes: body.num_tubes,
      maskedIndices: body.masked_indices,
    };
  }

  /** Mask flags for a tube count without uploading a video. */
  async maskFlags(numTubes: number, maskRatio: number, seed: number): Promise<boolean[]> {
    const body = await this.post("/v1/mask", {
      num_tubes: numTubes,
      mask_ratio: maskRatio,
      seed,
    });
    return body.flags.map((f: number) => f === 1);
  }

  /**
   * Two-stream losses with gradients for one tube's float64 buffers.
   * Scalars and gradients equal the native loss kernels to the last bit.
   */
  async losses(req: LossesRequest): Promise<LossesResult> {
    checkView(req.predRecon, "predRecon", "f64", 3);
    checkView(req.gtRecon, "gtRecon", "f64", 3);
    const payload: any = {
      pred: {
        recon_b64: toBase64(bytesOf(req.predRecon.data)),
        recon_shape: req.predRecon.shape,
      },
      gt: {
        recon_b64: toBase64(bytesOf(req.gtRecon.data)),
        recon_shape: req.gtRecon.shape,
      },
      recon_mode: req.reconMode ?? "decoupled",
    };
    if (req.predCd && req.gtCd) {
      checkView(req.predCd, "predCd", "f64", 2);
      checkView(req.gtCd, "gtCd", "f64", 2);
      payload.pred.cd_b64 = toBase64(bytesOf(req.predCd.data));
      payload.pred.cd_shape = req.predCd.shape;
      payload.gt.cd_b64 = toBase64(bytesOf(req.gtCd.data));
      payload.gt.cd_shape = req.gtCd.shape;
    }
    const body = await this.post("/v1/loss", payload);
    const gradApp = f64FromBase64(body.grad_app_b64);
    const gradMotion = f64FromBase64(body.grad_motion_b64);
    const result: LossesResult = {
      appLoss: body.app_loss,
      motionLoss: body.motion_loss,
      totalLoss: body.total_loss,
      gradApp,
      gradAppShape: body.grad_app_shape,
      gradMotion,
      gradMotionShape: body.grad_motion_shape,
    };
    if (req.out?.gradApp) {
      if (req.out.gradApp.length !== gradApp.length) {
        throw new TubekitBoundaryError(
          "shape_mismatch",
          `gradApp output of ${gradApp.length} elements`,
          `${req.out.gradApp.length} elements`,
        );
      }
      req.out.gradApp.set(gradApp);
      result.gradApp = req.out.gradApp;
    }
    if (req.out?.gradMotion) {
      if (req.out.gradMotion.length !== gradMotion.length) {
        throw new TubekitBoundaryError(
          "shape_mismatch",
          `gradMotion output of ${gradMotion.length} elements`,
          `${req.out.gradMotion.length} elements`,
        );
      }
      req.out.gradMotion.set(gradMotion);
      result.gradMotion = req.out.gradMotion;
    }
    return result;
  }
}

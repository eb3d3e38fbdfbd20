/**
 * PCV container encoding/decoding, matching the service's file schema:
 * "PCVD" | u16 version | u32 frames | u32 points-per-frame (0 = variable,
 * then per-frame u32 counts) | float32 LE xyz triples, frame-major.
 */

import { BufferView, checkView, hostIsLittleEndian, readF32 } from "./buffers.js";
import { TubekitFormatError } from "./errors.js";

export const PCV_MAGIC = "PCVD";
export const PCV_VERSION = 1;

/** Serialize a (T, P, 3) float32 view into PCV bytes. */
export function encodePcv(video: BufferView<Float32Array>): Uint8Array {
  checkView(video, "video", "f32", 3);
  const [frames, points, dims] = video.shape;
  if (dims !== 3) {
    throw new TubekitFormatError("bad_shape", `video trailing dimension must be 3, got ${dims}`);
  }
  const header = 14;
  const out = new Uint8Array(header + video.data.length * 4);
  const dv = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) out[i] = PCV_MAGIC.charCodeAt(i);
  dv.setUint16(4, PCV_VERSION, true);
  dv.setUint32(6, frames, true);
  dv.setUint32(10, points, true);
  if (hostIsLittleEndian()) {
    out.set(
      new Uint8Array(video.data.buffer, video.data.byteOffset, video.data.byteLength),
      header,
    );
  } else {
    for (let i = 0; i < video.data.length; i++) {
      dv.setFloat32(header + i * 4, video.data[i], true);
    }
  }
  return out;
}

export interface DecodedPcv {
  frames: number;
  /** Per-frame point counts. */
  counts: number[];
  /** One (P_i, 3) float32 array per frame. */
  points: Float32Array[];
}

export function decodePcv(data: Uint8Array): DecodedPcv {
  if (data.length < 14) {
    throw new TubekitFormatError("truncated", `truncated header: ${data.length} bytes`);
  }
  const dv = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const magic = String.fromCharCode(data[0], data[1], data[2], data[3]);
  if (magic !== PCV_MAGIC) {
    throw new TubekitFormatError("bad_magic", `bad magic ${JSON.stringify(magic)}`);
  }
  const version = dv.getUint16(4, true);
  if (version !== PCV_VERSION) {
    throw new TubekitFormatError("bad_version", `unsupported version ${version}`);
  }
  const frames = dv.getUint32(6, true);
  const ppf = dv.getUint32(10, true);
  let offset = 14;
  const counts: number[] = [];
  if (ppf === 0) {
    if (data.length < offset + frames * 4) {
      throw new TubekitFormatError("truncated", "truncated per-frame count table");
    }
    for (let i = 0; i < frames; i++) {
      counts.push(dv.getUint32(offset, true));
      offset += 4;
    }
  } else {
    for (let i = 0; i < frames; i++) counts.push(ppf);
  }
  const points: Float32Array[] = [];
  for (const count of counts) {
    const nbytes = count * 12;
    if (data.length < offset + nbytes) {
      throw new TubekitFormatError("truncated", "truncated payload");
    }
    points.push(readF32(data, offset, count * 3));
    offset += nbytes;
  }
  if (offset !== data.length) {
    throw new TubekitFormatError("oversized", `${data.length - offset} trailing bytes`);
  }
  return { frames, counts, points };
}

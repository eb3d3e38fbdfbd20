/**
 * Typed-array buffer views: the exchange format of the bindings.
 *
 * Views wrap host-owned buffers without copying; shape checks happen at the
 * boundary so the service never sees malformed payloads.
 */

import { TubekitBoundaryError } from "./errors.js";

export type ElementArray = Float32Array | Float64Array | Uint32Array;

export interface BufferView<T extends ElementArray = ElementArray> {
  data: T;
  /** Row-major shape; data.length must equal its product. */
  shape: readonly number[];
}

export function dtypeOf(arr: ElementArray): "f32" | "f64" | "u32" {
  if (arr instanceof Float32Array) return "f32";
  if (arr instanceof Float64Array) return "f64";
  return "u32";
}

export function elementCount(shape: readonly number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function checkView(
  view: BufferView,
  what: string,
  dtype: "f32" | "f64" | "u32",
  rank?: number,
): void {
  const actual = dtypeOf(view.data);
  if (actual !== dtype) {
    throw new TubekitBoundaryError("dtype_mismatch", `${what} as ${dtype}`, actual);
  }
  if (rank !== undefined && view.shape.length !== rank) {
    throw new TubekitBoundaryError(
      "shape_mismatch",
      `${what} of rank ${rank}`,
      `rank ${view.shape.length}`,
    );
  }
  const expected = elementCount(view.shape);
  if (view.data.length !== expected) {
    throw new TubekitBoundaryError(
      "shape_mismatch",
      `${what} with ${expected} elements for shape [${view.shape}]`,
      `${view.data.length} elements`,
    );
  }
}

/** Copy a typed array's bytes out as a standalone Uint8Array (little-endian host). */
export function bytesOf(arr: ElementArray): Uint8Array {
  return new Uint8Array(arr.buffer.slice(arr.byteOffset, arr.byteOffset + arr.byteLength));
}

export function toBase64(bytes: Uint8Array): string {
  return Buffer.from(bytes).toString("base64");
}

export function fromBase64(b64: string): Uint8Array {
  return new Uint8Array(Buffer.from(b64, "base64"));
}

const LITTLE_ENDIAN = new Uint8Array(new Uint32Array([1]).buffer)[0] === 1;

export function hostIsLittleEndian(): boolean {
  return LITTLE_ENDIAN;
}

/** Read `count` little-endian float32 values starting at a byte offset. */
export function readF32(data: Uint8Array, byteOffset: number, count: number): Float32Array {
  if (LITTLE_ENDIAN) {
    const copy = data.buffer.slice(
      data.byteOffset + byteOffset,
      data.byteOffset + byteOffset + count * 4,
    );
    return new Float32Array(copy);
  }
  const dv = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const out = new Float32Array(count);
  for (let i = 0; i < count; i++) out[i] = dv.getFloat32(byteOffset + i * 4, true);
  return out;
}

/** Read `count` little-endian float64 values starting at a byte offset. */
export function readF64(data: Uint8Array, byteOffset: number, count: number): Float64Array {
  if (LITTLE_ENDIAN) {
    const copy = data.buffer.slice(
      data.byteOffset + byteOffset,
      data.byteOffset + byteOffset + count * 8,
    );
    return new Float64Array(copy);
  }
  const dv = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const out = new Float64Array(count);
  for (let i = 0; i < count; i++) out[i] = dv.getFloat64(byteOffset + i * 8, true);
  return out;
}

/** Decode base64 little-endian float64 data into a fresh Float64Array. */
export function f64FromBase64(b64: string): Float64Array {
  const bytes = fromBase64(b64);
  return readF64(bytes, 0, bytes.length >> 3);
}

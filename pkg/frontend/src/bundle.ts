/**
 * Target-bundle (TBND) parsing, matching the service's file schema.
 *
 * Arrays come back as fresh typed arrays with explicit shapes; the config
 * echo is exposed both raw and parsed into key/value form.
 */

import { readF32, readF64 } from "./buffers.js";
import { TubekitFormatError } from "./errors.js";

export const BUNDLE_MAGIC = "TBND";
export const BUNDLE_VERSION = 1;

export interface ShapedF32 {
  shape: number[];
  data: Float32Array;
}

export interface TubeTargetRecord {
  tubeIndex: number;
  keyFrame: number;
  keyPosition: Float32Array; // xyz
  recon: ShapedF32;          // (l', n, 3)
  cd: ShapedF32;             // (rows, K)
}

export interface TargetBundle {
  seed: bigint;
  configText: string;
  config: Record<string, string>;
  codebook: { sections: number; centers: Float64Array };
  numTubes: number;
  records: TubeTargetRecord[];
}

class Reader {
  private offset = 0;

  constructor(private readonly data: Uint8Array, private readonly dv: DataView) {}

  static over(data: Uint8Array): Reader {
    return new Reader(data, new DataView(data.buffer, data.byteOffset, data.byteLength));
  }

  private need(size: number, what: string): number {
    if (this.offset + size > this.data.length) {
      throw new TubekitFormatError("truncated", `truncated bundle: ${what}`);
    }
    const at = this.offset;
    this.offset += size;
    return at;
  }

  u8(what: string): number {
    return this.dv.getUint8(this.need(1, what));
  }

  u16(what: string): number {
    return this.dv.getUint16(this.need(2, what), true);
  }

  u32(what: string): number {
    return this.dv.getUint32(this.need(4, what), true);
  }

  u64(what: string): bigint {
    return this.dv.getBigUint64(this.need(8, what), true);
  }

  text(size: number, what: string): string {
    const at = this.need(size, what);
    return new TextDecoder().decode(this.data.subarray(at, at + size));
  }

  f32(count: number, what: string): Float32Array {
    return readF32(this.data, this.need(count * 4, what), count);
  }

  f64(count: number, what: string): Float64Array {
    return readF64(this.data, this.need(count * 8, what), count);
  }

  done(): boolean {
    return this.offset === this.data.length;
  }

  remaining(): number {
    return this.data.length - this.offset;
  }
}

function readArray(r: Reader, what: string): ShapedF32 {
  const ndim = r.u8(`${what} ndim`);
  const shape: number[] = [];
  for (let i = 0; i < ndim; i++) shape.push(r.u32(`${what} dims`));
  const count = shape.reduce((a, b) => a * b, 1);
  return { shape, data: r.f32(count, `${what} data`) };
}

export function parseConfigText(text: string): Record<string, string> {
  const config: Record<string, string> = {};
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const eq = trimmed.indexOf("=");
    if (eq < 0) {
      throw new TubekitFormatError("bad_format", `config line is not key=value: ${trimmed}`);
    }
    config[trimmed.slice(0, eq)] = trimmed.slice(eq + 1);
  }
  return config;
}

export function parseBundle(data: Uint8Array): TargetBundle {
  const r = Reader.over(data);
  const magic = r.text(4, "magic");
  if (magic !== BUNDLE_MAGIC) {
    throw new TubekitFormatError("bad_magic", `bad magic ${JSON.stringify(magic)}`);
  }
  const version = r.u16("version");
  if (version !== BUNDLE_VERSION) {
    throw new TubekitFormatError("bad_version", `unsupported bundle version ${version}`);
  }
  const seed = r.u64("seed");
  const configText = r.text(r.u32("config length"), "config text");
  const sections = r.u32("codebook size");
  const centers = r.f64(sections * 3, "codebook centers");
  const numTubes = r.u32("tube count");
  const numRecords = r.u32("record count");
  const records: TubeTargetRecord[] = [];
  for (let i = 0; i < numRecords; i++) {
    records.push({
      tubeIndex: r.u32(`record ${i} index`),
      keyFrame: r.u32(`record ${i} frame`),
      keyPosition: r.f32(3, `record ${i} key point`),
      recon: readArray(r, `record ${i} recon`),
      cd: readArray(r, `record ${i} cd`),
    });
  }
  if (!r.done()) {
    throw new TubekitFormatError("oversized", `${r.remaining()} trailing bytes`);
  }
  return {
    seed,
    configText,
    config: parseConfigText(configText),
    codebook: { sections, centers },
    numTubes,
    records,
  };
}

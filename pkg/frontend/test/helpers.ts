import { ChildProcess, execFile, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { BufferView } from "../src/buffers.js";

export const PYTHON = process.env.TUBEKIT_PYTHON ?? "python3";
export const REPO_ROOT = join(__dirname, "..", "..");

const execFileAsync = promisify(execFile);

/** Deterministic 32-bit PRNG so TS-side fixtures are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** A seeded (frames, points, 3) float32 video buffer in the unit cube. */
export function makeVideo(frames: number, points: number, seed: number): BufferView<Float32Array> {
  const rand = mulberry32(seed);
  const data = new Float32Array(frames * points * 3);
  for (let i = 0; i < data.length; i++) data[i] = rand();
  return { data, shape: [frames, points, 3] };
}

export function makeTempDir(): string {
  return mkdtempSync(join(tmpdir(), "tubekit-ts-"));
}

export function removeDir(path: string): void {
  rmSync(path, { recursive: true, force: true });
}

export async function runCli(args: string[]): Promise<{ stdout: string; stderr: string }> {
  return execFileAsync(PYTHON, ["-m", "tubekit", ...args], {
    cwd: REPO_ROOT,
    maxBuffer: 64 * 1024 * 1024,
  });
}

export interface ServerHandle {
  baseUrl: string;
  stop: () => void;
}

export async function startServer(port: number): Promise<ServerHandle> {
  const child: ChildProcess = spawn(
    PYTHON,
    ["-m", "uvicorn", "tubekit.service:app", "--host", "127.0.0.1", "--port", String(port), "--log-level", "warning"],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${baseUrl}/health`);
      if (res.ok) {
        return { baseUrl, stop: () => child.kill("SIGTERM") };
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  child.kill("SIGTERM");
  throw new Error("tubekit service did not come up within 30s");
}

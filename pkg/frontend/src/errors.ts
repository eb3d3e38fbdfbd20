/** Error types crossing the binding boundary. Always thrown, never a crash. */

/** A client-side contract violation: wrong dtype, shape, or buffer length. */
export class TubekitBoundaryError extends Error {
  readonly code: string;
  readonly expected: string;
  readonly actual: string;

  constructor(code: string, expected: string, actual: string) {
    super(`${code}: expected ${expected}, got ${actual}`);
    this.name = "TubekitBoundaryError";
    this.code = code;
    this.expected = expected;
    this.actual = actual;
  }
}

/** A request the service rejected, carrying its stable machine code. */
export class TubekitApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = "TubekitApiError";
    this.code = code;
    this.status = status;
  }
}

/** A malformed binary payload (bad magic, truncation, version). */
export class TubekitFormatError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.name = "TubekitFormatError";
    this.code = code;
  }
}

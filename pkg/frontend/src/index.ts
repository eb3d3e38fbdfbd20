export {
  BufferView,
  ElementArray,
  bytesOf,
  checkView,
  dtypeOf,
  elementCount,
  f64FromBase64,
  fromBase64,
  readF32,
  readF64,
  toBase64,
} from "./buffers.js";
export { TubekitApiError, TubekitBoundaryError, TubekitFormatError } from "./errors.js";
export { DecodedPcv, PCV_MAGIC, PCV_VERSION, decodePcv, encodePcv } from "./pcv.js";
export {
  BUNDLE_MAGIC,
  BUNDLE_VERSION,
  ShapedF32,
  TargetBundle,
  TubeTargetRecord,
  parseBundle,
  parseConfigText,
} from "./bundle.js";
export {
  LossesRequest,
  LossesResult,
  PipelineConfig,
  TargetsResult,
  TubekitClient,
} from "./client.js";

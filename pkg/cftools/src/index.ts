export { Tensor, conv2d, relu, maxPool, avgPool } from "./tensor";
export { loadModel, forwardTo, hasLayer, ModelError } from "./model";
export type { ModelSpec, LayerSpec } from "./model";
export { decodeImage, readNetpbm, readPgm16, encodePgm16, writeFileAtomic, ImageFormatError } from "./image";
export {
  extractCfMap,
  cfOracleCheck,
  channelMean,
  minMaxToU16,
  defaultConfig,
  listImages,
  DEFAULT_LAYER,
  ORACLE_TOLERANCE,
} from "./extract";
export type { CfExtractorConfig, ExtractResult, OracleReport } from "./extract";
export { readMat, firstMatrix, MatFormatError } from "./mat";
export type { MatMatrix, MatEntry } from "./mat";
export { convertDataset, parseNumericTable, rowsToFixations, KINDS } from "./convert";
export type { ConvertOptions, ConvertReport, DatasetKind } from "./convert";
export { gaussianBlur } from "./blur";

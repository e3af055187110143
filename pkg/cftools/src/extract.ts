/**
 * Channel-average activation maps.
 *
 * For an input image, run the configured model forward to the last
 * convolutional tensor and average its activations across channels with
 * uniform weights; the resulting spatial map is min-max normalized and
 * written as 16-bit PGM at the tensor's own resolution (upsampling to the
 * stimulus size is the consumer's job). An independent per-channel
 * accumulation re-derives the map as an anti-regression oracle.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { decodeImage, encodePgm16, writeFileAtomic } from "./image";
import { ModelSpec, forwardTo, hasLayer, loadModel } from "./model";
import { Tensor } from "./tensor";

export interface CfExtractorConfig {
  /** model identifier or path to a model manifest; the well-known
   * pretrained default is the inception-v3 graph (supply its exported
   * weights as a manifest file) */
  model: string;
  /** name of the last convolutional tensor before global average pooling */
  layer: string;
  outDir: string;
  bitDepth: 16;
}

export const DEFAULT_LAYER = "pool";

export function defaultConfig(outDir: string, model: string, layer = DEFAULT_LAYER): CfExtractorConfig {
  return { model, layer, outDir, bitDepth: 16 };
}

export function resolveModel(cfg: CfExtractorConfig): ModelSpec {
  const spec = loadModel(cfg.model);
  if (!hasLayer(spec, cfg.layer)) {
    throw new Error(`layer '${cfg.layer}' does not exist in model '${spec.name}'`);
  }
  return spec;
}

/** Mean over channels, computed pixel-outer / channel-inner in float64. */
export function channelMean(t: Tensor): Float64Array {
  const plane = t.height * t.width;
  const out = new Float64Array(plane);
  for (let i = 0; i < plane; i++) {
    let acc = 0.0;
    for (let c = 0; c < t.channels; c++) {
      acc += t.data[c * plane + i];
    }
    out[i] = acc / t.channels;
  }
  return out;
}

export function minMaxToU16(map: Float64Array): Uint16Array {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of map) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const out = new Uint16Array(map.length);
  if (hi <= lo) {
    return out; // constant map degenerates to all zeros
  }
  const scale = 65535 / (hi - lo);
  for (let i = 0; i < map.length; i++) {
    out[i] = Math.round((map[i] - lo) * scale);
  }
  return out;
}

export interface ExtractResult {
  pgmPath: string;
  width: number;
  height: number;
  channels: number;
  map: Float64Array;
  activation: Tensor;
}

export function extractCfMap(imagePath: string, cfg: CfExtractorConfig): ExtractResult {
  const spec = resolveModel(cfg);
  const image = decodeImage(imagePath);
  const activation = forwardTo(spec, image.tensor, cfg.layer);
  if (activation.data.some((v) => !Number.isFinite(v))) {
    throw new Error(`${imagePath}: non-finite activation at layer ${cfg.layer}`);
  }
  const map = channelMean(activation);
  const quantized = minMaxToU16(map);
  const stem = path.basename(imagePath, path.extname(imagePath));
  const pgmPath = path.join(cfg.outDir, `${stem}.pgm`);
  writeFileAtomic(pgmPath, encodePgm16(quantized, activation.width, activation.height));
  return {
    pgmPath,
    width: activation.width,
    height: activation.height,
    channels: activation.channels,
    map,
    activation,
  };
}

export interface OracleReport {
  image: string;
  layer: string;
  ok: boolean;
  reason: "ok" | "shape-mismatch" | "deviation";
  maxAbsDeviation: number;
  shape: { channels: number; height: number; width: number };
  oracleShape?: { channels: number; height: number; width: number };
}

export const ORACLE_TOLERANCE = 1e-5;

/**
 * Recompute the map with an independent channel-outer loop (each term
 * divided separately, no shared accumulator pattern) and compare.
 */
export function cfOracleCheck(
  imagePath: string,
  cfg: CfExtractorConfig,
  oracleLayer?: string
): OracleReport {
  const spec = resolveModel(cfg);
  const image = decodeImage(imagePath);
  const activation = forwardTo(spec, image.tensor, cfg.layer);
  const map = channelMean(activation);
  const shape = { channels: activation.channels, height: activation.height, width: activation.width };

  const checkLayer = oracleLayer ?? cfg.layer;
  if (!hasLayer(spec, checkLayer)) {
    throw new Error(`oracle layer '${checkLayer}' does not exist in model '${spec.name}'`);
  }
  const oracleAct = forwardTo(spec, image.tensor, checkLayer);
  const oracleShape = { channels: oracleAct.channels, height: oracleAct.height, width: oracleAct.width };
  if (
    oracleShape.channels !== shape.channels ||
    oracleShape.height !== shape.height ||
    oracleShape.width !== shape.width
  ) {
    return {
      image: imagePath,
      layer: cfg.layer,
      ok: false,
      reason: "shape-mismatch",
      maxAbsDeviation: Infinity,
      shape,
      oracleShape,
    };
  }

  const plane = oracleAct.height * oracleAct.width;
  const oracleMap = new Float64Array(plane);
  for (let c = 0; c < oracleAct.channels; c++) {
    const base = c * plane;
    for (let i = 0; i < plane; i++) {
      oracleMap[i] += oracleAct.data[base + i] / oracleAct.channels;
    }
  }
  let worst = 0.0;
  for (let i = 0; i < plane; i++) {
    const dev = Math.abs(oracleMap[i] - map[i]);
    if (dev > worst) worst = dev;
  }
  const ok = worst <= ORACLE_TOLERANCE;
  return {
    image: imagePath,
    layer: cfg.layer,
    ok,
    reason: ok ? "ok" : "deviation",
    maxAbsDeviation: worst,
    shape,
  };
}

export const STIMULUS_EXTENSIONS = new Set([".png", ".jpg", ".jpeg", ".pgm", ".ppm"]);

export function listImages(target: string): string[] {
  const stat = fs.statSync(target);
  if (stat.isFile()) return [target];
  return fs
    .readdirSync(target)
    .filter((name) => STIMULUS_EXTENSIONS.has(path.extname(name).toLowerCase()))
    .sort()
    .map((name) => path.join(target, name));
}

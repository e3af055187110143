/**
 * Model format and forward pass.
 *
 * A model is a JSON manifest: a named sequential graph of conv/relu/pool
 * layers with float32 weights embedded as base64 (little-endian). The
 * extractor stops at a named layer, which must exist and be reachable
 * through convolutional/pooling ops only (the graph has no dense layers).
 *
 * Pretrained weights are supplied by the user as such a file; see the
 * README for the export recipe. A small fixture model ships with the test
 * suite.
 */

import * as fs from "node:fs";

import { ConvParams, Tensor, avgPool, conv2d, maxPool, relu } from "./tensor";

export type LayerSpec =
  | ({ name: string; type: "conv" } & {
      inChannels: number;
      outChannels: number;
      kernel: number;
      stride: number;
      pad: number;
      weights: string;
      bias: string;
    })
  | { name: string; type: "relu" }
  | { name: string; type: "maxpool"; kernel: number; stride: number }
  | { name: string; type: "avgpool"; kernel: number; stride: number };

export interface ModelSpec {
  name: string;
  inputChannels: number;
  layers: LayerSpec[];
}

export class ModelError extends Error {}

function decodeF32(b64: string, expected: number, context: string): Float32Array {
  const buf = Buffer.from(b64, "base64");
  if (buf.length !== expected * 4) {
    throw new ModelError(`${context}: expected ${expected} float32 values, got ${buf.length / 4}`);
  }
  return new Float32Array(buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.length));
}

export function loadModel(path: string): ModelSpec {
  let raw: string;
  try {
    raw = fs.readFileSync(path, "utf-8");
  } catch (err) {
    throw new ModelError(`model not found: ${path} (${(err as Error).message})`);
  }
  let spec: ModelSpec;
  try {
    spec = JSON.parse(raw);
  } catch (err) {
    throw new ModelError(`model ${path} is not valid JSON: ${(err as Error).message}`);
  }
  if (!spec.name || !Array.isArray(spec.layers) || !spec.inputChannels) {
    throw new ModelError(`model ${path}: missing name/inputChannels/layers`);
  }
  const seen = new Set<string>();
  for (const layer of spec.layers) {
    if (!layer.name || seen.has(layer.name)) {
      throw new ModelError(`model ${path}: duplicate or missing layer name ${layer.name}`);
    }
    seen.add(layer.name);
  }
  return spec;
}

export function hasLayer(spec: ModelSpec, layerName: string): boolean {
  return spec.layers.some((l) => l.name === layerName);
}

function convParams(layer: Extract<LayerSpec, { type: "conv" }>): ConvParams {
  const wCount = layer.outChannels * layer.inChannels * layer.kernel * layer.kernel;
  return {
    inChannels: layer.inChannels,
    outChannels: layer.outChannels,
    kernel: layer.kernel,
    stride: layer.stride,
    pad: layer.pad,
    weights: decodeF32(layer.weights, wCount, `layer ${layer.name} weights`),
    bias: decodeF32(layer.bias, layer.outChannels, `layer ${layer.name} bias`),
  };
}

/** Run the graph up to and including `layerName`; return that activation. */
export function forwardTo(spec: ModelSpec, input: Tensor, layerName: string): Tensor {
  if (input.channels !== spec.inputChannels) {
    throw new ModelError(
      `model ${spec.name} expects ${spec.inputChannels} input channels, got ${input.channels}`
    );
  }
  if (!hasLayer(spec, layerName)) {
    throw new ModelError(`layer '${layerName}' not found in model graph`);
  }
  let current = input;
  for (const layer of spec.layers) {
    switch (layer.type) {
      case "conv":
        current = conv2d(current, convParams(layer));
        break;
      case "relu":
        current = relu(current);
        break;
      case "maxpool":
        current = maxPool(current, layer.kernel, layer.stride);
        break;
      case "avgpool":
        current = avgPool(current, layer.kernel, layer.stride);
        break;
      default:
        throw new ModelError(`unknown layer type ${(layer as { type: string }).type}`);
    }
    if (layer.name === layerName) {
      return current;
    }
  }
  throw new ModelError(`layer '${layerName}' not reached`);
}

/**
 * Stimulus decoding (PNG, JPEG, PGM/PPM) into a CHW float tensor in [0, 1],
 * plus 16-bit PGM read/write for the map interchange format.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as jpeg from "jpeg-js";
import { PNG } from "pngjs";

import { Tensor } from "./tensor";

export class ImageFormatError extends Error {}

export interface DecodedImage {
  width: number;
  height: number;
  /** 3-channel CHW tensor scaled to [0, 1]; grayscale is replicated. */
  tensor: Tensor;
}

function tensorFromRgba(data: Uint8Array, width: number, height: number): Tensor {
  const t = new Tensor(3, height, width);
  const plane = width * height;
  for (let i = 0; i < plane; i++) {
    t.data[i] = data[i * 4] / 255;
    t.data[plane + i] = data[i * 4 + 1] / 255;
    t.data[2 * plane + i] = data[i * 4 + 2] / 255;
  }
  return t;
}

interface NetpbmImage {
  width: number;
  height: number;
  maxval: number;
  channels: number;
  /** row-major, channel-interleaved samples */
  samples: Uint16Array;
}

export function readNetpbm(filePath: string): NetpbmImage {
  const raw = fs.readFileSync(filePath);
  const magic = raw.subarray(0, 2).toString("ascii");
  if (magic !== "P5" && magic !== "P6") {
    throw new ImageFormatError(`${filePath}: not a binary PGM/PPM`);
  }
  const tokens: number[] = [];
  let pos = 2;
  while (tokens.length < 3) {
    while (pos < raw.length && /\s/.test(String.fromCharCode(raw[pos]))) pos++;
    if (raw[pos] === 0x23) {
      while (pos < raw.length && raw[pos] !== 0x0a && raw[pos] !== 0x0d) pos++;
      continue;
    }
    let start = pos;
    while (pos < raw.length && !/\s/.test(String.fromCharCode(raw[pos]))) pos++;
    if (start === pos) throw new ImageFormatError(`${filePath}: truncated header`);
    tokens.push(parseInt(raw.subarray(start, pos).toString("ascii"), 10));
  }
  pos++;
  const [width, height, maxval] = tokens;
  if (!(width > 0) || !(height > 0)) {
    throw new ImageFormatError(`${filePath}: zero-area image`);
  }
  if (!(maxval > 0) || maxval > 65535) {
    throw new ImageFormatError(`${filePath}: bad maxval ${maxval}`);
  }
  const channels = magic === "P5" ? 1 : 3;
  const count = width * height * channels;
  const samples = new Uint16Array(count);
  if (maxval > 255) {
    if (raw.length < pos + count * 2) throw new ImageFormatError(`${filePath}: truncated data`);
    for (let i = 0; i < count; i++) {
      samples[i] = raw.readUInt16BE(pos + i * 2);
    }
  } else {
    if (raw.length < pos + count) throw new ImageFormatError(`${filePath}: truncated data`);
    for (let i = 0; i < count; i++) {
      samples[i] = raw[pos + i];
    }
  }
  return { width, height, maxval, channels, samples };
}

function tensorFromNetpbm(img: NetpbmImage): Tensor {
  const t = new Tensor(3, img.height, img.width);
  const plane = img.width * img.height;
  for (let i = 0; i < plane; i++) {
    if (img.channels === 1) {
      const v = img.samples[i] / img.maxval;
      t.data[i] = v;
      t.data[plane + i] = v;
      t.data[2 * plane + i] = v;
    } else {
      t.data[i] = img.samples[i * 3] / img.maxval;
      t.data[plane + i] = img.samples[i * 3 + 1] / img.maxval;
      t.data[2 * plane + i] = img.samples[i * 3 + 2] / img.maxval;
    }
  }
  return t;
}

export function decodeImage(filePath: string): DecodedImage {
  if (!fs.existsSync(filePath)) {
    throw new ImageFormatError(`unreadable image: ${filePath}`);
  }
  const ext = path.extname(filePath).toLowerCase();
  if (ext === ".pgm" || ext === ".ppm" || ext === ".pnm") {
    const img = readNetpbm(filePath);
    return { width: img.width, height: img.height, tensor: tensorFromNetpbm(img) };
  }
  const raw = fs.readFileSync(filePath);
  if (ext === ".png") {
    const png = PNG.sync.read(raw);
    return { width: png.width, height: png.height, tensor: tensorFromRgba(png.data, png.width, png.height) };
  }
  if (ext === ".jpg" || ext === ".jpeg") {
    const img = jpeg.decode(raw, { useTArray: true, formatAsRGBA: true });
    return { width: img.width, height: img.height, tensor: tensorFromRgba(img.data, img.width, img.height) };
  }
  throw new ImageFormatError(`${filePath}: unsupported image format ${ext}`);
}

/** Write (h, w) uint16 values as binary PGM, maxval 65535, big-endian. */
export function encodePgm16(values: Uint16Array, width: number, height: number): Buffer {
  if (values.length !== width * height) {
    throw new Error(`pgm data length ${values.length} != ${width * height}`);
  }
  const header = Buffer.from(`P5\n${width} ${height}\n65535\n`, "ascii");
  const body = Buffer.alloc(values.length * 2);
  for (let i = 0; i < values.length; i++) {
    body.writeUInt16BE(values[i], i * 2);
  }
  return Buffer.concat([header, body]);
}

export function readPgm16(filePath: string): { width: number; height: number; values: Uint16Array } {
  const img = readNetpbm(filePath);
  if (img.channels !== 1) {
    throw new ImageFormatError(`${filePath}: expected grayscale PGM`);
  }
  return { width: img.width, height: img.height, values: img.samples };
}

/** Write a file atomically: temp in the same directory, then rename. */
export function writeFileAtomic(filePath: string, data: Buffer | string): void {
  const dir = path.dirname(filePath);
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.${path.basename(filePath)}.tmp-${process.pid}`);
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, filePath);
}

/**
 * Minimal Level-5 MAT-file reader: real 2-D numeric matrices only.
 *
 * Enough to ingest fixation-location matrices and plain coordinate tables
 * from eye-tracking datasets. Compressed elements are inflated with zlib;
 * structs, cells, sparse and character arrays are reported as unsupported
 * so converters can warn and skip instead of failing.
 */

import * as fs from "node:fs";
import * as zlib from "node:zlib";

export class MatFormatError extends Error {}

const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT16 = 3;
const MI_UINT16 = 4;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_SINGLE = 7;
const MI_DOUBLE = 9;
const MI_INT64 = 12;
const MI_UINT64 = 13;
const MI_MATRIX = 14;
const MI_COMPRESSED = 15;

const NUMERIC_CLASSES: Record<number, string> = {
  6: "double",
  7: "single",
  8: "int8",
  9: "uint8",
  10: "int16",
  11: "uint16",
  12: "int32",
  13: "uint32",
};

const OTHER_CLASSES: Record<number, string> = {
  1: "cell",
  2: "struct",
  3: "object",
  4: "char",
  5: "sparse",
};

export interface MatMatrix {
  name: string;
  rows: number;
  cols: number;
  /** row-major (converted from the file's column-major order) */
  data: Float64Array;
}

export interface MatEntry {
  name: string;
  unsupported?: string;
  matrix?: MatMatrix;
}

interface Element {
  type: number;
  data: Buffer;
}

function readElement(buf: Buffer, pos: number): { element: Element; next: number } {
  if (pos + 8 > buf.length) {
    throw new MatFormatError("truncated element tag");
  }
  const typeWord = buf.readUInt32LE(pos);
  const small = typeWord >>> 16;
  if (small !== 0) {
    const type = typeWord & 0xffff;
    const nbytes = small;
    const data = buf.subarray(pos + 4, pos + 4 + nbytes);
    return { element: { type, data }, next: pos + 8 };
  }
  const type = typeWord;
  const nbytes = buf.readUInt32LE(pos + 4);
  const data = buf.subarray(pos + 8, pos + 8 + nbytes);
  let next = pos + 8 + nbytes;
  if (type !== MI_COMPRESSED) {
    next += (8 - (nbytes % 8)) % 8; // pad to 8-byte boundary
  }
  return { element: { type, data }, next };
}

function numericToF64(type: number, data: Buffer): Float64Array {
  const read = (size: number, fn: (off: number) => number) => {
    const n = Math.floor(data.length / size);
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = fn(i * size);
    return out;
  };
  switch (type) {
    case MI_DOUBLE:
      return read(8, (o) => data.readDoubleLE(o));
    case MI_SINGLE:
      return read(4, (o) => data.readFloatLE(o));
    case MI_INT8:
      return read(1, (o) => data.readInt8(o));
    case MI_UINT8:
      return read(1, (o) => data.readUInt8(o));
    case MI_INT16:
      return read(2, (o) => data.readInt16LE(o));
    case MI_UINT16:
      return read(2, (o) => data.readUInt16LE(o));
    case MI_INT32:
      return read(4, (o) => data.readInt32LE(o));
    case MI_UINT32:
      return read(4, (o) => data.readUInt32LE(o));
    case MI_INT64:
      return read(8, (o) => Number(data.readBigInt64LE(o)));
    case MI_UINT64:
      return read(8, (o) => Number(data.readBigUInt64LE(o)));
    default:
      throw new MatFormatError(`unsupported numeric storage type ${type}`);
  }
}

function parseMatrix(data: Buffer): MatEntry {
  let pos = 0;
  const flagsEl = readElement(data, pos);
  pos = flagsEl.next;
  if (flagsEl.element.type !== MI_UINT32 || flagsEl.element.data.length < 8) {
    throw new MatFormatError("malformed array flags");
  }
  const classId = flagsEl.element.data.readUInt32LE(0) & 0xff;

  const dimsEl = readElement(data, pos);
  pos = dimsEl.next;
  const dims: number[] = [];
  for (let i = 0; i + 4 <= dimsEl.element.data.length; i += 4) {
    dims.push(dimsEl.element.data.readInt32LE(i));
  }

  const nameEl = readElement(data, pos);
  pos = nameEl.next;
  const name = nameEl.element.data.toString("ascii");

  if (!(classId in NUMERIC_CLASSES)) {
    const label = OTHER_CLASSES[classId] ?? `class ${classId}`;
    return { name, unsupported: label };
  }
  if (dims.length !== 2) {
    return { name, unsupported: `${dims.length}-d array` };
  }
  const realEl = readElement(data, pos);
  const colMajor = numericToF64(realEl.element.type, realEl.element.data);
  const [rows, cols] = dims;
  if (colMajor.length < rows * cols) {
    throw new MatFormatError(`matrix ${name}: expected ${rows * cols} values, got ${colMajor.length}`);
  }
  const rowMajor = new Float64Array(rows * cols);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      rowMajor[r * cols + c] = colMajor[c * rows + r];
    }
  }
  return { name, matrix: { name, rows, cols, data: rowMajor } };
}

export function readMat(filePath: string): MatEntry[] {
  const buf = fs.readFileSync(filePath);
  if (buf.length < 128) {
    throw new MatFormatError(`${filePath}: too short for a MAT-file header`);
  }
  const endian = buf.subarray(126, 128).toString("ascii");
  if (endian !== "IM") {
    throw new MatFormatError(`${filePath}: unsupported byte order marker '${endian}'`);
  }
  const entries: MatEntry[] = [];
  let pos = 128;
  while (pos + 8 <= buf.length) {
    const { element, next } = readElement(buf, pos);
    pos = next;
    let payload = element;
    if (element.type === MI_COMPRESSED) {
      const inflated = zlib.inflateSync(element.data);
      payload = readElement(inflated, 0).element;
    }
    if (payload.type === MI_MATRIX) {
      entries.push(parseMatrix(payload.data));
    }
  }
  return entries;
}

/** First supported 2-D numeric matrix in the file, if any. */
export function firstMatrix(filePath: string): MatMatrix | { unsupported: string } {
  const entries = readMat(filePath);
  for (const entry of entries) {
    if (entry.matrix) return entry.matrix;
  }
  if (entries.length > 0 && entries[0].unsupported) {
    return { unsupported: entries[0].unsupported };
  }
  return { unsupported: "no numeric matrix found" };
}

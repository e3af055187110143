/**
 * Public eye-tracking datasets -> the normalized layout the simulator
 * consumes (stimuli/, scanpaths/, fixmaps/).
 *
 * Each dataset kind has an adapter that knows where stimuli live and how
 * per-observer fixation records are stored (text tables or MAT numeric
 * matrices; see README for the exact per-kind layouts). Unknown or
 * unparseable files produce warnings and are counted in the manifest, never
 * a hard failure. All writes are atomic and deterministic, so re-running a
 * conversion reproduces identical bytes.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { gaussianBlur } from "./blur";
import { decodeImage, encodePgm16, writeFileAtomic } from "./image";
import { firstMatrix } from "./mat";

export const KINDS = ["cat2000", "mit1003", "toronto", "kootstra", "siena12"] as const;
export type DatasetKind = (typeof KINDS)[number];

export interface ConvertOptions {
  kind: DatasetKind;
  src: string;
  dst: string;
  /** blur for rendered fixation maps, ~1 degree of visual angle */
  fixmapSigma: number;
}

export interface FixationRecord {
  tStart: number;
  duration: number;
  x: number;
  y: number;
}

export interface ObserverRecords {
  observer: string;
  fixations: FixationRecord[];
}

interface StimulusEntry {
  stem: string;
  srcPath: string;
}

export interface ConvertReport {
  kind: DatasetKind;
  stimuli: number;
  scanpathFiles: number;
  fixations: number;
  fixmaps: number;
  skipped: string[];
}

const IMAGE_EXTENSIONS = new Set([".png", ".jpg", ".jpeg", ".pgm", ".ppm"]);
const PLACEHOLDER_DURATION = 0.1;
const SYNTH_GAP = 0.05;

function safeStem(name: string): string {
  return name.replace(/[^A-Za-z0-9_.-]/g, "_");
}

function listImages(dir: string): string[] {
  if (!fs.existsSync(dir)) return [];
  return fs
    .readdirSync(dir)
    .filter((n) => IMAGE_EXTENSIONS.has(path.extname(n).toLowerCase()))
    .sort()
    .map((n) => path.join(dir, n));
}

function listSubdirs(dir: string): string[] {
  if (!fs.existsSync(dir)) return [];
  return fs
    .readdirSync(dir, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
}

/** Whitespace/comma-separated numeric rows; '#' comments allowed. */
export function parseNumericTable(text: string): number[][] {
  const rows: number[][] = [];
  for (const line of text.split(/\r?\n/)) {
    const body = line.split("#", 1)[0].trim();
    if (!body) continue;
    const cells = body.split(/[\s,]+/).map(Number);
    if (cells.some((v) => !Number.isFinite(v))) continue;
    rows.push(cells);
  }
  return rows;
}

/**
 * Interpret numeric rows as fixations. Column layouts:
 *   [x y]                duration placeholder, times synthesized
 *   [x y duration]       times synthesized from durations
 *   [x y tStart tEnd]    explicit interval
 */
export function rowsToFixations(rows: number[][]): FixationRecord[] {
  const out: FixationRecord[] = [];
  let clock = 0;
  let prevEnd = -Infinity;
  for (const row of rows) {
    if (row.length < 2) continue;
    const [x, y] = row;
    let tStart: number;
    let duration: number;
    if (row.length >= 4) {
      tStart = row[2];
      duration = row[3] - row[2];
    } else if (row.length === 3) {
      tStart = clock;
      duration = row[2];
    } else {
      tStart = clock;
      duration = PLACEHOLDER_DURATION;
    }
    if (!(duration > 0)) continue;
    if (tStart < prevEnd) continue; // overlapping or out-of-order record
    out.push({ tStart, duration, x, y });
    prevEnd = tStart + duration;
    clock = prevEnd + SYNTH_GAP;
  }
  return out;
}

type RecordSource =
  | { kind: "text"; path: string; observer: string }
  | { kind: "mat"; path: string; observer: string };

interface AdapterOutput {
  stimuli: StimulusEntry[];
  /** stem -> per-observer record sources */
  records: Map<string, RecordSource[]>;
  /** stem -> fixation-location matrix files (orderless; fixmap only) */
  fixlocs: Map<string, string>;
}

function collectFlat(
  stimDir: string,
  recordsFor: (stem: string) => RecordSource[]
): AdapterOutput {
  const stimuli: StimulusEntry[] = [];
  const records = new Map<string, RecordSource[]>();
  for (const img of listImages(stimDir)) {
    const stem = safeStem(path.basename(img, path.extname(img)));
    stimuli.push({ stem, srcPath: img });
    records.set(stem, recordsFor(path.basename(img, path.extname(img))));
  }
  return { stimuli, records, fixlocs: new Map() };
}

function adapterSiena12(src: string): AdapterOutput {
  return collectFlat(path.join(src, "STIMULI"), (rawStem) => {
    const dir = path.join(src, "SCANPATHS", rawStem);
    if (!fs.existsSync(dir)) return [];
    return fs
      .readdirSync(dir)
      .filter((n) => n.endsWith(".txt") || n.endsWith(".csv"))
      .sort()
      .map((n) => ({
        kind: "text" as const,
        path: path.join(dir, n),
        observer: safeStem(path.basename(n, path.extname(n))),
      }));
  });
}

function adapterMit1003(src: string): AdapterOutput {
  const out = collectFlat(path.join(src, "ALLSTIMULI"), () => []);
  const dataDir = path.join(src, "DATA");
  for (const observer of listSubdirs(dataDir)) {
    const obsDir = path.join(dataDir, observer);
    for (const file of fs.readdirSync(obsDir).sort()) {
      const ext = path.extname(file).toLowerCase();
      if (ext !== ".mat" && ext !== ".txt") continue;
      const stem = safeStem(path.basename(file, ext));
      if (!out.records.has(stem)) continue; // no matching stimulus
      out.records.get(stem)!.push({
        kind: ext === ".mat" ? "mat" : "text",
        path: path.join(obsDir, file),
        observer: safeStem(observer),
      });
    }
  }
  return out;
}

function adapterToronto(src: string): AdapterOutput {
  return collectFlat(path.join(src, "stimuli"), (rawStem) => {
    const fixDir = path.join(src, "fixations");
    if (!fs.existsSync(fixDir)) return [];
    const sources: RecordSource[] = [];
    for (const file of fs.readdirSync(fixDir).sort()) {
      const ext = path.extname(file).toLowerCase();
      const base = path.basename(file, ext);
      if (ext === ".txt" && base.startsWith(`${rawStem}_`)) {
        sources.push({
          kind: "text",
          path: path.join(fixDir, file),
          observer: safeStem(base.slice(rawStem.length + 1)),
        });
      } else if (ext === ".mat" && base === rawStem) {
        sources.push({ kind: "mat", path: path.join(fixDir, file), observer: "pooled" });
      }
    }
    return sources;
  });
}

function adapterKootstra(src: string): AdapterOutput {
  const stimuli: StimulusEntry[] = [];
  const records = new Map<string, RecordSource[]>();
  const imgRoot = path.join(src, "images");
  for (const category of listSubdirs(imgRoot)) {
    for (const img of listImages(path.join(imgRoot, category))) {
      const rawStem = path.basename(img, path.extname(img));
      const stem = safeStem(`${category}_${rawStem}`);
      stimuli.push({ stem, srcPath: img });
      const fixDir = path.join(src, "fixations", category);
      const sources: RecordSource[] = [];
      if (fs.existsSync(fixDir)) {
        for (const file of fs.readdirSync(fixDir).sort()) {
          if (!file.endsWith(".txt")) continue;
          const base = path.basename(file, ".txt");
          if (!base.startsWith(`${rawStem}_`)) continue;
          sources.push({
            kind: "text",
            path: path.join(fixDir, file),
            observer: safeStem(base.slice(rawStem.length + 1)),
          });
        }
      }
      records.set(stem, sources);
    }
  }
  return { stimuli, records, fixlocs: new Map() };
}

function adapterCat2000(src: string): AdapterOutput {
  const stimuli: StimulusEntry[] = [];
  const fixlocs = new Map<string, string>();
  const stimRoot = path.join(src, "Stimuli");
  for (const category of listSubdirs(stimRoot)) {
    for (const img of listImages(path.join(stimRoot, category))) {
      const rawStem = path.basename(img, path.extname(img));
      const stem = safeStem(`${category}_${rawStem}`);
      stimuli.push({ stem, srcPath: img });
      const locPath = path.join(src, "FIXATIONLOCS", category, `${rawStem}.mat`);
      if (fs.existsSync(locPath)) {
        fixlocs.set(stem, locPath);
      }
    }
  }
  return { stimuli, records: new Map(), fixlocs };
}

const ADAPTERS: Record<DatasetKind, (src: string) => AdapterOutput> = {
  siena12: adapterSiena12,
  mit1003: adapterMit1003,
  toronto: adapterToronto,
  kootstra: adapterKootstra,
  cat2000: adapterCat2000,
};

function loadRecords(source: RecordSource, skipped: string[], src: string): FixationRecord[] {
  const rel = path.relative(src, source.path);
  try {
    if (source.kind === "text") {
      return rowsToFixations(parseNumericTable(fs.readFileSync(source.path, "utf-8")));
    }
    const result = firstMatrix(source.path);
    if ("unsupported" in result) {
      skipped.push(`${rel} (unsupported mat content: ${result.unsupported})`);
      return [];
    }
    if (result.cols < 2 || result.cols > 4) {
      skipped.push(`${rel} (matrix is ${result.rows}x${result.cols}, expected 2-4 columns)`);
      return [];
    }
    const rows: number[][] = [];
    for (let r = 0; r < result.rows; r++) {
      rows.push(Array.from(result.data.subarray(r * result.cols, (r + 1) * result.cols)));
    }
    return rowsToFixations(rows);
  } catch (err) {
    skipped.push(`${rel} (${(err as Error).message})`);
    return [];
  }
}

function clamp(v: number, lo: number, hi: number): number {
  return v < lo ? lo : v > hi ? hi : v;
}

function scanpathCsv(observer: string, fixations: FixationRecord[]): string {
  const lines = ["observer,t_start,duration,x,y"];
  for (const f of fixations) {
    lines.push(
      `${observer},${f.tStart.toFixed(6)},${f.duration.toFixed(6)},${f.x.toFixed(6)},${f.y.toFixed(6)}`
    );
  }
  return lines.join("\n") + "\n";
}

function renderFixmap(
  points: Array<{ x: number; y: number }>,
  width: number,
  height: number,
  sigma: number
): Uint16Array | null {
  if (points.length === 0) return null;
  const density = new Float64Array(width * height);
  for (const p of points) {
    const col = clamp(Math.floor(p.x), 0, width - 1);
    const row = clamp(Math.floor(p.y), 0, height - 1);
    density[row * width + col] += 1;
  }
  const blurred = gaussianBlur(density, width, height, sigma);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of blurred) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const out = new Uint16Array(blurred.length);
  if (hi <= lo) return out;
  for (let i = 0; i < blurred.length; i++) {
    out[i] = Math.round(((blurred[i] - lo) / (hi - lo)) * 65535);
  }
  return out;
}

export function convertDataset(opts: ConvertOptions): ConvertReport {
  const adapter = ADAPTERS[opts.kind];
  if (!adapter) {
    throw new Error(`unknown dataset kind '${opts.kind}' (expected one of ${KINDS.join("|")})`);
  }
  if (!fs.existsSync(opts.src)) {
    throw new Error(`source directory not found: ${opts.src}`);
  }
  const layout = adapter(opts.src);
  if (layout.stimuli.length === 0) {
    throw new Error(`${opts.src}: no stimuli found for kind '${opts.kind}'`);
  }
  const skipped: string[] = [];
  let scanpathFiles = 0;
  let totalFixations = 0;
  let fixmaps = 0;

  for (const stim of layout.stimuli) {
    const ext = path.extname(stim.srcPath).toLowerCase();
    writeFileAtomic(path.join(opts.dst, "stimuli", `${stim.stem}${ext}`), fs.readFileSync(stim.srcPath));
    const decoded = decodeImage(stim.srcPath);

    const allPoints: Array<{ x: number; y: number }> = [];
    const sources = layout.records.get(stim.stem) ?? [];
    for (const source of sources) {
      const fixations = loadRecords(source, skipped, opts.src).map((f) => ({
        ...f,
        x: clamp(f.x, 0, decoded.width),
        y: clamp(f.y, 0, decoded.height),
      }));
      if (fixations.length === 0) {
        if (source.kind === "text") {
          skipped.push(`${path.relative(opts.src, source.path)} (no usable fixations)`);
        }
        continue;
      }
      writeFileAtomic(
        path.join(opts.dst, "scanpaths", stim.stem, `${source.observer}.csv`),
        scanpathCsv(source.observer, fixations)
      );
      scanpathFiles += 1;
      totalFixations += fixations.length;
      allPoints.push(...fixations);
    }

    let mapData: Uint16Array | null = null;
    let mapW = decoded.width;
    let mapH = decoded.height;
    const locPath = layout.fixlocs.get(stim.stem);
    if (locPath !== undefined) {
      const result = firstMatrix(locPath);
      if ("unsupported" in result) {
        skipped.push(`${path.relative(opts.src, locPath)} (unsupported mat content: ${result.unsupported})`);
      } else {
        const points: Array<{ x: number; y: number }> = [];
        for (let r = 0; r < result.rows; r++) {
          for (let c = 0; c < result.cols; c++) {
            if (result.data[r * result.cols + c] !== 0) points.push({ x: c, y: r });
          }
        }
        mapW = result.cols;
        mapH = result.rows;
        mapData = renderFixmap(points, mapW, mapH, opts.fixmapSigma);
        totalFixations += points.length;
      }
    } else if (allPoints.length > 0) {
      mapData = renderFixmap(allPoints, mapW, mapH, opts.fixmapSigma);
    }
    if (mapData !== null) {
      writeFileAtomic(path.join(opts.dst, "fixmaps", `${stim.stem}.pgm`), encodePgm16(mapData, mapW, mapH));
      fixmaps += 1;
    }
  }

  const report: ConvertReport = {
    kind: opts.kind,
    stimuli: layout.stimuli.length,
    scanpathFiles,
    fixations: totalFixations,
    fixmaps,
    skipped: skipped.sort(),
  };
  const manifest = [
    `kind: ${report.kind}`,
    `stimuli: ${report.stimuli}`,
    `scanpath_files: ${report.scanpathFiles}`,
    `fixations: ${report.fixations}`,
    `fixmaps: ${report.fixmaps}`,
    `skipped: ${report.skipped.length}`,
    ...report.skipped.map((s) => `skip: ${s}`),
  ].join("\n");
  writeFileAtomic(path.join(opts.dst, "manifest.txt"), manifest + "\n");
  return report;
}

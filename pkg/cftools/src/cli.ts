#!/usr/bin/env node
/**
 * cftools extract-cf --in <dir|file> --out <dir> --model <file> [--layer <name>]
 * cftools check      --in <dir|file> --model <file> [--layer <name>] [--oracle-layer <name>]
 * cftools convert    --kind <name> --src <dir> --dst <dir> [--fixmap-sigma <px>]
 *
 * Exit codes: 0 success, 1 partial failure, 2 invalid usage.
 */

import { DatasetKind, KINDS, convertDataset } from "./convert";
import { DEFAULT_LAYER, cfOracleCheck, defaultConfig, extractCfMap, listImages } from "./extract";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument '${arg}'`);
    }
    const eq = arg.indexOf("=");
    if (eq >= 0) {
      flags.set(arg.slice(2, eq), arg.slice(eq + 1));
    } else {
      const value = argv[i + 1];
      if (value === undefined || value.startsWith("--")) {
        throw new Error(`flag ${arg} needs a value`);
      }
      flags.set(arg.slice(2), value);
      i++;
    }
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

function runExtract(flags: Map<string, string>, check: boolean): number {
  const cfg = defaultConfig(
    flags.get("out") ?? ".",
    need(flags, "model"),
    flags.get("layer") ?? DEFAULT_LAYER
  );
  if (!check) need(flags, "out");
  const images = listImages(need(flags, "in"));
  if (images.length === 0) {
    console.error("cftools: no images matched --in");
    return 2;
  }
  let failures = 0;
  for (const image of images) {
    try {
      if (check) {
        const report = cfOracleCheck(image, cfg, flags.get("oracle-layer"));
        const tag = report.ok ? "ok" : `FAIL(${report.reason})`;
        console.log(
          `${image}: ${tag} layer=${report.layer} shape=${report.shape.channels}x${report.shape.height}x${report.shape.width} maxdev=${report.maxAbsDeviation.toExponential(3)}`
        );
        if (!report.ok) failures++;
      } else {
        const result = extractCfMap(image, cfg);
        console.log(`${image} -> ${result.pgmPath} (${result.width}x${result.height}, ${result.channels} channels averaged)`);
      }
    } catch (err) {
      console.error(`cftools: ${image}: ${(err as Error).message}`);
      failures++;
    }
  }
  return failures === 0 ? 0 : 1;
}

function runConvert(flags: Map<string, string>): number {
  const kind = need(flags, "kind") as DatasetKind;
  if (!KINDS.includes(kind)) {
    throw new Error(`--kind must be one of ${KINDS.join("|")}`);
  }
  const report = convertDataset({
    kind,
    src: need(flags, "src"),
    dst: need(flags, "dst"),
    fixmapSigma: Number(flags.get("fixmap-sigma") ?? 25),
  });
  console.log(
    `converted ${report.stimuli} stimuli, ${report.scanpathFiles} scanpath files, ` +
      `${report.fixmaps} fixation maps (${report.skipped.length} skipped)`
  );
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "extract-cf":
        return runExtract(parseFlags(rest), false);
      case "check":
        return runExtract(parseFlags(rest), true);
      case "convert":
        return runConvert(parseFlags(rest));
      default:
        console.error("usage: cftools extract-cf|check|convert [flags] (see --help in README)");
        return 2;
    }
  } catch (err) {
    console.error(`cftools: ${(err as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}

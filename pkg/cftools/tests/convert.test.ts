import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { test } from "node:test";

import { convertDataset, parseNumericTable, rowsToFixations } from "../src/convert";
import { readPgm16 } from "../src/image";

const FIXTURES = path.join(__dirname, "..", "..", "fixtures");
const SIENA = path.join(FIXTURES, "native", "siena-mini");
const CATSTYLE = path.join(FIXTURES, "native", "catstyle-mini");
const GOLDEN = path.join(FIXTURES, "golden-dataset");

function tmpDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "cfconv-"));
}

function treeFiles(root: string): string[] {
  const out: string[] = [];
  const walk = (dir: string) => {
    for (const entry of fs.readdirSync(dir, { withFileTypes: true }).sort((a, b) => a.name.localeCompare(b.name))) {
      const full = path.join(dir, entry.name);
      if (entry.isDirectory()) walk(full);
      else out.push(path.relative(root, full));
    }
  };
  walk(root);
  return out.sort();
}

test("numeric table parser skips comments and junk", () => {
  const rows = parseNumericTable("# header\n1 2 3\n\nnot numbers\n4,5,6\n");
  assert.deepEqual(rows, [
    [1, 2, 3],
    [4, 5, 6],
  ]);
});

test("row layouts: xy, xy+duration, xy+interval", () => {
  const two = rowsToFixations([[10, 20], [30, 40]]);
  assert.equal(two.length, 2);
  assert.equal(two[0].duration, 0.1);
  assert.ok(two[1].tStart > two[0].tStart + two[0].duration);

  const three = rowsToFixations([[1, 2, 0.25], [3, 4, 0.5]]);
  assert.equal(three[0].duration, 0.25);
  assert.equal(three[1].duration, 0.5);

  const four = rowsToFixations([[1, 2, 0.0, 0.2], [3, 4, 0.3, 0.65]]);
  assert.equal(four[1].tStart, 0.3);
  assert.ok(Math.abs(four[1].duration - 0.35) < 1e-12);
});

test("out-of-order and nonpositive-duration records are dropped", () => {
  const rows = rowsToFixations([
    [1, 1, 0.0, 0.2],
    [2, 2, 0.1, 0.3], // overlaps the previous interval
    [3, 3, 0.5, 0.5], // zero duration
    [4, 4, 0.6, 0.9],
  ]);
  assert.deepEqual(rows.map((r) => r.x), [1, 4]);
});

test("siena-style conversion produces the normalized layout", () => {
  const dst = tmpDir();
  const report = convertDataset({ kind: "siena12", src: SIENA, dst, fixmapSigma: 3 });
  assert.equal(report.stimuli, 3);
  assert.equal(report.scanpathFiles, 6);
  assert.equal(report.fixmaps, 3);
  // junk record file warned about, not fatal
  assert.ok(report.skipped.some((s) => s.includes("broken.txt")));
  // stems sanitized: "scene three" -> scene_three
  assert.ok(fs.existsSync(path.join(dst, "stimuli", "scene_three.png")));
  assert.ok(fs.existsSync(path.join(dst, "scanpaths", "scene_three", "ob_alpha.csv")));
  const csv = fs.readFileSync(path.join(dst, "scanpaths", "scene_one", "ob_alpha.csv"), "utf-8");
  assert.ok(csv.startsWith("observer,t_start,duration,x,y\n"));
  const manifest = fs.readFileSync(path.join(dst, "manifest.txt"), "utf-8");
  assert.ok(manifest.includes("stimuli: 3"));
  assert.ok(manifest.includes("skip: "));
});

test("cat-style conversion renders fixmaps from location matrices", () => {
  const dst = tmpDir();
  const report = convertDataset({ kind: "cat2000", src: CATSTYLE, dst, fixmapSigma: 2 });
  assert.equal(report.stimuli, 3);
  assert.equal(report.scanpathFiles, 0); // orderless locations give no scanpaths
  assert.equal(report.fixmaps, 2);
  assert.ok(report.skipped.some((s) => s.includes("002.mat")));
  const pgm = readPgm16(path.join(dst, "fixmaps", "Action_001.pgm"));
  assert.equal(pgm.width, 40);
  assert.equal(pgm.height, 30);
  let hi = 0;
  for (const v of pgm.values) hi = Math.max(hi, v);
  assert.equal(hi, 65535);
});

test("conversion is idempotent over an existing destination", () => {
  const dst = tmpDir();
  convertDataset({ kind: "siena12", src: SIENA, dst, fixmapSigma: 3 });
  const before = new Map(treeFiles(dst).map((f) => [f, fs.readFileSync(path.join(dst, f))]));
  convertDataset({ kind: "siena12", src: SIENA, dst, fixmapSigma: 3 });
  const after = treeFiles(dst);
  assert.deepEqual(after, Array.from(before.keys()).sort());
  for (const f of after) {
    assert.deepEqual(fs.readFileSync(path.join(dst, f)), before.get(f), `changed: ${f}`);
  }
});

test("golden conversion reproduces byte-identically", () => {
  if (!fs.existsSync(GOLDEN)) {
    return; // golden tree not built yet
  }
  const dst = tmpDir();
  convertDataset({ kind: "siena12", src: SIENA, dst, fixmapSigma: 3 });
  const expected = treeFiles(GOLDEN);
  assert.deepEqual(treeFiles(dst), expected);
  for (const f of expected) {
    assert.deepEqual(
      fs.readFileSync(path.join(dst, f)),
      fs.readFileSync(path.join(GOLDEN, f)),
      `differs from golden: ${f}`
    );
  }
});

test("unknown kind and missing source are rejected", () => {
  assert.throws(
    () => convertDataset({ kind: "imagenet" as never, src: SIENA, dst: tmpDir(), fixmapSigma: 3 }),
    /unknown dataset kind/
  );
  assert.throws(
    () => convertDataset({ kind: "siena12", src: "/does/not/exist", dst: tmpDir(), fixmapSigma: 3 }),
    /not found/
  );
});

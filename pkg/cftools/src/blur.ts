/**
 * Separable Gaussian blur on a row-major float grid: sampled kernel of
 * radius ceil(3*sigma), normalized, edges replicated. Used for rendering
 * fixation deltas into density maps.
 */

export function gaussianBlur(values: Float64Array, width: number, height: number, sigma: number): Float64Array {
  if (sigma <= 0) {
    throw new Error(`sigma must be positive, got ${sigma}`);
  }
  const radius = Math.ceil(3 * sigma);
  const taps = new Float64Array(2 * radius + 1);
  let total = 0;
  for (let i = -radius; i <= radius; i++) {
    const w = Math.exp(-(i * i) / (2 * sigma * sigma));
    taps[i + radius] = w;
    total += w;
  }
  for (let i = 0; i < taps.length; i++) taps[i] /= total;

  const horizontal = new Float64Array(values.length);
  for (let y = 0; y < height; y++) {
    const row = y * width;
    for (let x = 0; x < width; x++) {
      let acc = 0;
      for (let k = -radius; k <= radius; k++) {
        let xx = x + k;
        if (xx < 0) xx = 0;
        else if (xx >= width) xx = width - 1;
        acc += taps[k + radius] * values[row + xx];
      }
      horizontal[row + x] = acc;
    }
  }
  const out = new Float64Array(values.length);
  for (let x = 0; x < width; x++) {
    for (let y = 0; y < height; y++) {
      let acc = 0;
      for (let k = -radius; k <= radius; k++) {
        let yy = y + k;
        if (yy < 0) yy = 0;
        else if (yy >= height) yy = height - 1;
        acc += taps[k + radius] * horizontal[yy * width + x];
      }
      out[y * width + x] = acc;
    }
  }
  return out;
}

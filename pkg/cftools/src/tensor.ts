/**
 * Minimal CHW float tensors and the forward ops the extractor needs:
 * zero-padded convolution, ReLU, max/average pooling.
 *
 * Everything runs in fixed loop order with float32 storage, so a given
 * model and input always produce bit-identical activations.
 */

export class Tensor {
  readonly channels: number;
  readonly height: number;
  readonly width: number;
  readonly data: Float32Array;

  constructor(channels: number, height: number, width: number, data?: Float32Array) {
    this.channels = channels;
    this.height = height;
    this.width = width;
    const size = channels * height * width;
    if (data !== undefined) {
      if (data.length !== size) {
        throw new Error(`tensor data length ${data.length} != ${size}`);
      }
      this.data = data;
    } else {
      this.data = new Float32Array(size);
    }
  }

  get(c: number, y: number, x: number): number {
    return this.data[(c * this.height + y) * this.width + x];
  }

  set(c: number, y: number, x: number, v: number): void {
    this.data[(c * this.height + y) * this.width + x] = v;
  }

  /** One channel as a plain view offset; callers index [y * width + x]. */
  channelOffset(c: number): number {
    return c * this.height * this.width;
  }
}

export interface ConvParams {
  inChannels: number;
  outChannels: number;
  kernel: number;
  stride: number;
  pad: number;
  /** [outChannels][inChannels][kernel][kernel] flattened */
  weights: Float32Array;
  bias: Float32Array;
}

export function conv2d(input: Tensor, p: ConvParams): Tensor {
  if (input.channels !== p.inChannels) {
    throw new Error(`conv expects ${p.inChannels} input channels, got ${input.channels}`);
  }
  const outH = Math.floor((input.height + 2 * p.pad - p.kernel) / p.stride) + 1;
  const outW = Math.floor((input.width + 2 * p.pad - p.kernel) / p.stride) + 1;
  if (outH < 1 || outW < 1) {
    throw new Error(`conv output would be empty (${outH}x${outW})`);
  }
  const out = new Tensor(p.outChannels, outH, outW);
  const ksq = p.kernel * p.kernel;
  for (let oc = 0; oc < p.outChannels; oc++) {
    const b = p.bias[oc];
    for (let oy = 0; oy < outH; oy++) {
      for (let ox = 0; ox < outW; ox++) {
        let acc = b;
        for (let ic = 0; ic < p.inChannels; ic++) {
          const wBase = (oc * p.inChannels + ic) * ksq;
          const inBase = input.channelOffset(ic);
          for (let ky = 0; ky < p.kernel; ky++) {
            const iy = oy * p.stride - p.pad + ky;
            if (iy < 0 || iy >= input.height) continue;
            const rowBase = inBase + iy * input.width;
            const wRow = wBase + ky * p.kernel;
            for (let kx = 0; kx < p.kernel; kx++) {
              const ix = ox * p.stride - p.pad + kx;
              if (ix < 0 || ix >= input.width) continue;
              acc += p.weights[wRow + kx] * input.data[rowBase + ix];
            }
          }
        }
        out.set(oc, oy, ox, Math.fround(acc));
      }
    }
  }
  return out;
}

export function relu(input: Tensor): Tensor {
  const out = new Tensor(input.channels, input.height, input.width);
  for (let i = 0; i < input.data.length; i++) {
    const v = input.data[i];
    out.data[i] = v > 0 ? v : 0;
  }
  return out;
}

function pool(input: Tensor, kernel: number, stride: number, take: "max" | "avg"): Tensor {
  const outH = Math.floor((input.height - kernel) / stride) + 1;
  const outW = Math.floor((input.width - kernel) / stride) + 1;
  if (outH < 1 || outW < 1) {
    throw new Error(`pool output would be empty (${outH}x${outW})`);
  }
  const out = new Tensor(input.channels, outH, outW);
  for (let c = 0; c < input.channels; c++) {
    const base = input.channelOffset(c);
    for (let oy = 0; oy < outH; oy++) {
      for (let ox = 0; ox < outW; ox++) {
        let acc = take === "max" ? -Infinity : 0;
        for (let ky = 0; ky < kernel; ky++) {
          const row = base + (oy * stride + ky) * input.width + ox * stride;
          for (let kx = 0; kx < kernel; kx++) {
            const v = input.data[row + kx];
            if (take === "max") {
              if (v > acc) acc = v;
            } else {
              acc += v;
            }
          }
        }
        out.set(c, oy, ox, take === "max" ? acc : Math.fround(acc / (kernel * kernel)));
      }
    }
  }
  return out;
}

export function maxPool(input: Tensor, kernel: number, stride: number): Tensor {
  return pool(input, kernel, stride, "max");
}

export function avgPool(input: Tensor, kernel: number, stride: number): Tensor {
  return pool(input, kernel, stride, "avg");
}

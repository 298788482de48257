/** Camera-side pixel handling: luma conversion, frame pacing, fps.
 *
 * The grayscale conversion must agree byte for byte with the service's
 * (0.299, 0.587, 0.114 luma, round half to even), so a frame posted by
 * the UI thresholds identically to one converted server side.
 */

export const LUMA_WEIGHTS: readonly [number, number, number] = [0.299, 0.587, 0.114];

/** Round half to even, matching IEEE/numpy rint semantics. */
export function rint(x: number): number {
  const floor = Math.floor(x);
  const diff = x - floor;
  if (diff > 0.5) return floor + 1;
  if (diff < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

/** RGBA canvas pixels to one gray byte per pixel. */
export function rgbaToGray(rgba: Uint8ClampedArray, width: number, height: number): Uint8Array {
  if (rgba.length !== width * height * 4) {
    throw new Error(`expected ${width * height * 4} rgba bytes, got ${rgba.length}`);
  }
  const out = new Uint8Array(width * height);
  const [wr, wg, wb] = LUMA_WEIGHTS;
  for (let i = 0, p = 0; i < out.length; i++, p += 4) {
    const y = rint(rgba[p] * wr + rgba[p + 1] * wg + rgba[p + 2] * wb);
    out[i] = y < 0 ? 0 : y > 255 ? 255 : y;
  }
  return out;
}

/** One frame in flight: while a job runs, later frames are dropped. */
export class FrameGate {
  private busy = false;
  dropped = 0;

  async run<T>(job: () => Promise<T>): Promise<T | null> {
    if (this.busy) {
      this.dropped++;
      return null;
    }
    this.busy = true;
    try {
      return await job();
    } finally {
      this.busy = false;
    }
  }
}

/** Sliding-window rate estimate over the last `windowMs` of ticks. */
export class FpsEstimator {
  private stamps: number[] = [];

  constructor(private readonly windowMs = 2000) {}

  tick(nowMs: number): void {
    this.stamps.push(nowMs);
    const cutoff = nowMs - this.windowMs;
    while (this.stamps.length && this.stamps[0] < cutoff) {
      this.stamps.shift();
    }
  }

  rate(nowMs: number): number {
    const cutoff = nowMs - this.windowMs;
    while (this.stamps.length && this.stamps[0] < cutoff) {
      this.stamps.shift();
    }
    if (this.stamps.length < 2) return 0;
    const span = this.stamps[this.stamps.length - 1] - this.stamps[0];
    return span <= 0 ? 0 : ((this.stamps.length - 1) * 1000) / span;
  }
}

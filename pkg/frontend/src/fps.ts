/** Frame-rate meter: 1-second moving average over render timestamps. */

export class FpsMeter {
  private stamps: number[] = [];

  tick(nowMs: number): void {
    this.stamps.push(nowMs);
    const cutoff = nowMs - 1000;
    while (this.stamps.length && this.stamps[0] < cutoff) {
      this.stamps.shift();
    }
  }

  /** Frames per second averaged over the trailing second. */
  value(): number {
    if (this.stamps.length < 2) return 0;
    const span = this.stamps[this.stamps.length - 1] - this.stamps[0];
    if (span <= 0) return 0;
    return ((this.stamps.length - 1) * 1000) / span;
  }
}

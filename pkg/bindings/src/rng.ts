/**
 * SplitMix64 stream, bit-for-bit identical to the core implementation.
 *
 * Sampled token ids must replay exactly across language ports, so the
 * stream is defined here rather than borrowed from the platform RNG.
 * Reference outputs for seed 0: e220a8397b1dcdaf, 6e789e6aa1b965f4,
 * 06c45d188009454f.
 */

const MASK64 = (1n << 64n) - 1n;
const GOLDEN_GAMMA = 0x9e3779b97f4a7c15n;
const MIX_A = 0xbf58476d1ce4e5b9n;
const MIX_B = 0x94d049bb133111ebn;

export function mix64(z: bigint): bigint {
  z &= MASK64;
  z = ((z ^ (z >> 30n)) * MIX_A) & MASK64;
  z = ((z ^ (z >> 27n)) * MIX_B) & MASK64;
  return z ^ (z >> 31n);
}

export class SplitMix64 {
  readonly seed: bigint;
  private state: bigint;

  constructor(seed: bigint | number) {
    this.seed = BigInt(seed) & MASK64;
    this.state = this.seed;
  }

  nextU64(): bigint {
    this.state = (this.state + GOLDEN_GAMMA) & MASK64;
    return mix64(this.state);
  }

  /** Uniform double in [0, 1) built from the top 53 bits. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }

  /** Child stream derived from the original seed, independent of position. */
  split(index: number): SplitMix64 {
    const child = mix64(this.seed ^ mix64((BigInt(index + 1) * GOLDEN_GAMMA) & MASK64));
    return new SplitMix64(child);
  }
}

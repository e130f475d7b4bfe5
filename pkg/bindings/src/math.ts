/**
 * Distribution math and truncation rules, mirroring the core semantics:
 * inclusive threshold cuts, ascending-id rank ties, zero-probability tokens
 * never admitted, derived thresholds clamped to the modal probability when
 * float error pushes them past it.
 */

import { SplitMix64 } from "./rng.js";

export const THRESHOLD_CLAMP_TOL = 1e-12;

export interface Truncation {
  /** Realized probability cutoff. */
  threshold: number;
  /** Admitted token ids, ascending. */
  admitted: Int32Array;
  /** Renormalized probabilities aligned with `admitted`. */
  renormProbs: Float64Array;
}

export function softmaxWithTemperature(scores: ArrayLike<number>, tau: number): Float64Array {
  if (!Number.isFinite(tau) || tau <= 0) {
    throw rangeError("E_BAD_TEMPERATURE", `temperature must be positive and finite, got ${tau}`);
  }
  const n = scores.length;
  const scaled = new Float64Array(n);
  let top = -Infinity;
  for (let i = 0; i < n; i++) {
    const value = scores[i] / tau;
    if (!Number.isFinite(value)) {
      throw rangeError("E_NOT_FINITE", `score ${scores[i]} at index ${i} is not usable`);
    }
    scaled[i] = value;
    if (value > top) top = value;
  }
  let total = 0;
  const probs = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const weight = Math.exp(scaled[i] - top);
    probs[i] = weight;
    total += weight;
  }
  for (let i = 0; i < n; i++) probs[i] /= total;
  return probs;
}

export function shannonEntropy(probs: Float64Array): number {
  let acc = 0;
  for (let i = 0; i < probs.length; i++) {
    const p = probs[i];
    if (p > 0) acc += p * Math.log(p);
  }
  return -acc;
}

export function collisionLikelihood(probs: Float64Array): number {
  let acc = 0;
  for (let i = 0; i < probs.length; i++) acc += probs[i] * probs[i];
  return acc;
}

export function plessNormThreshold(probs: Float64Array): number {
  const c = probs.length;
  if (c < 2) {
    throw rangeError("E_DEGENERATE_VOCAB", "normalized threshold needs at least two tokens");
  }
  const like = collisionLikelihood(probs);
  const relaxed = (c / (c - 1.0)) * like - 1.0 / (c - 1.0);
  if (-THRESHOLD_CLAMP_TOL < relaxed && relaxed < 0.0) return 0.0;
  if (like < relaxed && relaxed <= like + THRESHOLD_CLAMP_TOL) return like;
  return relaxed;
}

export function renyiEntropy(probs: Float64Array, order: number): number {
  if (Number.isNaN(order) || order < 0) {
    throw rangeError("E_BAD_ORDER", `entropy order must be >= 0, got ${order}`);
  }
  if (order === 0) {
    let support = 0;
    for (let i = 0; i < probs.length; i++) if (probs[i] > 0) support += 1;
    return Math.log(support);
  }
  if (order === 1) return shannonEntropy(probs);
  if (!Number.isFinite(order)) return -Math.log(maxProb(probs));
  let top = -Infinity;
  for (let i = 0; i < probs.length; i++) {
    if (probs[i] > 0) {
      const logTerm = order * Math.log(probs[i]);
      if (logTerm > top) top = logTerm;
    }
  }
  let acc = 0;
  for (let i = 0; i < probs.length; i++) {
    if (probs[i] > 0) acc += Math.exp(order * Math.log(probs[i]) - top);
  }
  return (top + Math.log(acc)) / (1.0 - order);
}

export function korderThreshold(probs: Float64Array, k: number): number {
  if (!(k > 0)) throw rangeError("E_BAD_ORDER", `order must be > 0, got ${k}`);
  return Math.exp(-renyiEntropy(probs, k));
}

function maxProb(probs: Float64Array): number {
  let top = 0;
  for (let i = 0; i < probs.length; i++) if (probs[i] > top) top = probs[i];
  return top;
}

function clampToMax(threshold: number, probs: Float64Array): number {
  const top = maxProb(probs);
  if (top < threshold && threshold <= top + THRESHOLD_CLAMP_TOL) return top;
  return threshold;
}

function finish(probs: Float64Array, threshold: number, admitted: number[]): Truncation {
  const ids = Int32Array.from(admitted);
  let total = 0;
  for (const id of ids) total += probs[id];
  const renorm = new Float64Array(ids.length);
  for (let i = 0; i < ids.length; i++) renorm[i] = probs[ids[i]] / total;
  return { threshold, admitted: ids, renormProbs: renorm };
}

export function truncateAt(probs: Float64Array, threshold: number): Truncation | null {
  const admitted: number[] = [];
  if (threshold > 0) {
    for (let i = 0; i < probs.length; i++) if (probs[i] >= threshold) admitted.push(i);
  } else {
    for (let i = 0; i < probs.length; i++) if (probs[i] > 0) admitted.push(i);
  }
  if (admitted.length === 0) return null;
  return finish(probs, threshold, admitted);
}

export function fallbackToArgmax(probs: Float64Array): Truncation {
  const top = maxProb(probs);
  const admitted: number[] = [];
  for (let i = 0; i < probs.length; i++) if (probs[i] === top) admitted.push(i);
  const renorm = new Float64Array(admitted.length).fill(1.0 / admitted.length);
  return { threshold: top, admitted: Int32Array.from(admitted), renormProbs: renorm };
}

export function plessTruncate(probs: Float64Array): Truncation {
  const result = truncateAt(probs, clampToMax(collisionLikelihood(probs), probs));
  if (result === null) throw rangeError("E_EMPTY_SET", "collision threshold admitted nothing");
  return result;
}

export function plessNormTruncate(probs: Float64Array): Truncation {
  const result = truncateAt(probs, clampToMax(plessNormThreshold(probs), probs));
  if (result === null) throw rangeError("E_EMPTY_SET", "relaxed threshold admitted nothing");
  return result;
}

export function korderTruncate(probs: Float64Array, k: number): Truncation {
  const result = truncateAt(probs, clampToMax(korderThreshold(probs, k), probs));
  if (result === null) throw rangeError("E_EMPTY_SET", "k-order threshold admitted nothing");
  return result;
}

/** Ranked prefix by value boundary: everything above, then ascending-id ties. */
function takeRankedPrefix(probs: Float64Array, boundary: number, prefixSize: number): number[] {
  const admitted: number[] = [];
  for (let i = 0; i < probs.length; i++) if (probs[i] > boundary) admitted.push(i);
  let remaining = prefixSize - admitted.length;
  for (let i = 0; i < probs.length && remaining > 0; i++) {
    if (probs[i] === boundary) {
      admitted.push(i);
      remaining -= 1;
    }
  }
  admitted.sort((a, b) => a - b);
  return admitted;
}

export function topPTruncate(probs: Float64Array, p: number): Truncation {
  if (!(p > 0 && p <= 1)) throw rangeError("E_BAD_CONFIG", `top-p mass must be in (0, 1], got ${p}`);
  const ranked = Float64Array.from(probs).sort().reverse();
  let cut = ranked.length - 1;
  let acc = 0;
  for (let i = 0; i < ranked.length; i++) {
    acc += ranked[i];
    if (acc >= p) {
      cut = i;
      break;
    }
  }
  while (ranked[cut] <= 0) cut -= 1;
  const boundary = ranked[cut];
  return finish(probs, boundary, takeRankedPrefix(probs, boundary, cut + 1));
}

export function topKTruncate(probs: Float64Array, k: number): Truncation {
  if (!(Number.isInteger(k) && k >= 1)) {
    throw rangeError("E_BAD_CONFIG", `top-k size must be a positive integer, got ${k}`);
  }
  let take = Math.min(k, probs.length);
  const ranked = Float64Array.from(probs).sort().reverse();
  while (ranked[take - 1] <= 0) take -= 1;
  const boundary = ranked[take - 1];
  return finish(probs, boundary, takeRankedPrefix(probs, boundary, take));
}

export function minPTruncate(probs: Float64Array, pBase: number): Truncation {
  if (!(pBase > 0 && pBase <= 1)) {
    throw rangeError("E_BAD_CONFIG", `min-p scale must be in (0, 1], got ${pBase}`);
  }
  const result = truncateAt(probs, pBase * maxProb(probs));
  if (result === null) throw rangeError("E_EMPTY_SET", "min-p threshold admitted nothing");
  return result;
}

export function epsilonTruncate(probs: Float64Array, eps: number): Truncation {
  if (!(eps > 0 && eps < 1)) throw rangeError("E_BAD_CONFIG", `epsilon must be in (0, 1), got ${eps}`);
  return truncateAt(probs, eps) ?? fallbackToArgmax(probs);
}

export function etaTruncate(probs: Float64Array, eps: number): Truncation {
  if (!(eps > 0 && eps < 1)) throw rangeError("E_BAD_CONFIG", `eta epsilon must be in (0, 1), got ${eps}`);
  const threshold = Math.min(eps, Math.sqrt(eps) * Math.exp(-shannonEntropy(probs)));
  return truncateAt(probs, threshold) ?? fallbackToArgmax(probs);
}

export function mirostatTruncate(probs: Float64Array, mu: number): Truncation {
  const admitted: number[] = [];
  for (let i = 0; i < probs.length; i++) {
    if (probs[i] > 0 && -Math.log(probs[i]) <= mu) admitted.push(i);
  }
  if (admitted.length === 0) return fallbackToArgmax(probs);
  return finish(probs, Math.exp(-mu), admitted);
}

/**
 * Inverse-CDF draw over the admitted set in ascending token-id order.
 * A single-token set returns immediately without consuming the stream.
 */
export function sampleFromTruncation(truncation: Truncation, stream: SplitMix64): number {
  const { admitted, renormProbs } = truncation;
  if (admitted.length === 1) return admitted[0];
  const u = stream.nextFloat();
  let acc = 0;
  for (let i = 0; i < renormProbs.length; i++) {
    acc += renormProbs[i];
    if (acc >= u) return admitted[i];
  }
  return admitted[admitted.length - 1];
}

export function rangeError(code: string, message: string): RangeError {
  const error = new RangeError(message);
  (error as RangeError & { code: string }).code = code;
  return error;
}

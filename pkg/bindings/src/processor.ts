/**
 * Logits-processor boundary: a configured handle turns raw score vectors
 * into masked vectors (non-admitted positions set to -Infinity) or sampled
 * token indices, with outputs exactly equal to the core implementation on
 * the same inputs and streams.
 *
 * Mirostat state lives in a per-handle table keyed by sequence id, created
 * on first use.  The surprisal budget advances only when this boundary
 * draws the token itself (`sampleIndex`); `processRow` reads the current
 * budget without advancing it, because a masking host samples externally
 * and the outcome is never reported back.
 */

import {
  Truncation,
  epsilonTruncate,
  etaTruncate,
  fallbackToArgmax,
  korderTruncate,
  minPTruncate,
  mirostatTruncate,
  plessNormTruncate,
  plessTruncate,
  rangeError,
  sampleFromTruncation,
  softmaxWithTemperature,
  topKTruncate,
  topPTruncate,
} from "./math.js";
import { SplitMix64 } from "./rng.js";

export const INTERFACE_VERSION = 1;

export type MethodConfig =
  | { kind: "pless" }
  | { kind: "pless-norm" }
  | { kind: "korder"; k: number }
  | { kind: "top-p"; p: number }
  | { kind: "top-k"; k: number }
  | { kind: "min-p"; pBase: number }
  | { kind: "epsilon"; eps: number }
  | { kind: "eta"; eps: number }
  | { kind: "mirostat"; targetSurprisal: number; learningRate: number }
  | { kind: "greedy" };

export interface ProcessorConfig {
  method: MethodConfig;
  temperature: number;
  /** Expected score-vector length; every call is checked against it. */
  vocabSize: number;
}

interface MirostatState {
  mu: number;
}

export interface ProcessorHandle {
  readonly config: ProcessorConfig;
  readonly states: Map<string | number, MirostatState>;
}

export function createProcessor(config: ProcessorConfig): ProcessorHandle {
  if (!(Number.isInteger(config.vocabSize) && config.vocabSize >= 1)) {
    throw rangeError("E_BAD_CONFIG", `vocabSize must be a positive integer, got ${config.vocabSize}`);
  }
  if (!(Number.isFinite(config.temperature) && config.temperature > 0)) {
    throw rangeError("E_BAD_TEMPERATURE", `temperature must be positive, got ${config.temperature}`);
  }
  validateMethod(config.method);
  return { config, states: new Map() };
}

function validateMethod(method: MethodConfig): void {
  switch (method.kind) {
    case "korder":
      if (!(method.k > 0)) throw rangeError("E_BAD_CONFIG", `korder k must be > 0, got ${method.k}`);
      return;
    case "top-p":
      if (!(method.p > 0 && method.p <= 1)) {
        throw rangeError("E_BAD_CONFIG", `top-p mass must be in (0, 1], got ${method.p}`);
      }
      return;
    case "top-k":
      if (!(Number.isInteger(method.k) && method.k >= 1)) {
        throw rangeError("E_BAD_CONFIG", `top-k size must be a positive integer, got ${method.k}`);
      }
      return;
    case "min-p":
      if (!(method.pBase > 0 && method.pBase <= 1)) {
        throw rangeError("E_BAD_CONFIG", `min-p scale must be in (0, 1], got ${method.pBase}`);
      }
      return;
    case "epsilon":
    case "eta":
      if (!(method.eps > 0 && method.eps < 1)) {
        throw rangeError("E_BAD_CONFIG", `epsilon must be in (0, 1), got ${method.eps}`);
      }
      return;
    case "mirostat":
      if (!(method.targetSurprisal > 0) || !(method.learningRate > 0)) {
        throw rangeError("E_BAD_CONFIG", "mirostat needs positive target surprisal and learning rate");
      }
      return;
    case "pless":
    case "pless-norm":
    case "greedy":
      return;
  }
}

function checkScores(handle: ProcessorHandle, scores: ArrayLike<number>): void {
  if (scores.length !== handle.config.vocabSize) {
    throw rangeError(
      "E_VOCAB_MISMATCH",
      `expected ${handle.config.vocabSize} scores, got ${scores.length}`,
    );
  }
}

function mirostatBudgetFor(handle: ProcessorHandle, sequenceId: string | number): MirostatState {
  let state = handle.states.get(sequenceId);
  if (state === undefined) {
    const method = handle.config.method;
    if (method.kind !== "mirostat") throw rangeError("E_BAD_CONFIG", "state requested for a stateless method");
    state = { mu: 2.0 * method.targetSurprisal };
    handle.states.set(sequenceId, state);
  }
  return state;
}

function truncateForMethod(
  handle: ProcessorHandle,
  probs: Float64Array,
  sequenceId: string | number,
): Truncation {
  const method = handle.config.method;
  switch (method.kind) {
    case "pless":
      return plessTruncate(probs);
    case "pless-norm":
      return plessNormTruncate(probs);
    case "korder":
      return korderTruncate(probs, method.k);
    case "top-p":
      return topPTruncate(probs, method.p);
    case "top-k":
      return topKTruncate(probs, method.k);
    case "min-p":
      return minPTruncate(probs, method.pBase);
    case "epsilon":
      return epsilonTruncate(probs, method.eps);
    case "eta":
      return etaTruncate(probs, method.eps);
    case "mirostat":
      return mirostatTruncate(probs, mirostatBudgetFor(handle, sequenceId).mu);
    case "greedy":
      return fallbackToArgmax(probs);
  }
}

/**
 * Mask non-admitted positions with -Infinity so the host's own sampler
 * respects the truncation; admitted positions keep their original scores.
 */
export function processRow(
  handle: ProcessorHandle,
  scores: ArrayLike<number>,
  sequenceId: string | number = 0,
): Float64Array {
  checkScores(handle, scores);
  const probs = softmaxWithTemperature(scores, handle.config.temperature);
  const truncation = truncateForMethod(handle, probs, sequenceId);
  const masked = new Float64Array(scores.length).fill(-Infinity);
  for (const id of truncation.admitted) masked[id] = scores[id];
  return masked;
}

/**
 * Draw the next token over the truncated, renormalized distribution with a
 * SplitMix64 stream seeded by the caller.  For mirostat this also advances
 * the sequence's surprisal budget.
 */
export function sampleIndex(
  handle: ProcessorHandle,
  scores: ArrayLike<number>,
  sequenceId: string | number,
  seed: bigint | number,
): number {
  checkScores(handle, scores);
  const probs = softmaxWithTemperature(scores, handle.config.temperature);
  const method = handle.config.method;
  if (method.kind === "greedy") {
    return fallbackToArgmax(probs).admitted[0];
  }
  const truncation = truncateForMethod(handle, probs, sequenceId);
  const token = sampleFromTruncation(truncation, new SplitMix64(seed));
  if (method.kind === "mirostat") {
    const state = mirostatBudgetFor(handle, sequenceId);
    const observed = -Math.log(probs[token]);
    state.mu = state.mu - method.learningRate * (observed - method.targetSurprisal);
  }
  return token;
}

/** Current mirostat budget for a sequence, if one has been created. */
export function mirostatBudget(
  handle: ProcessorHandle,
  sequenceId: string | number,
): number | undefined {
  return handle.states.get(sequenceId)?.mu;
}

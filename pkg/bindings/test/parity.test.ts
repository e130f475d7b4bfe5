/**
 * Golden parity: every fixture row, every method, admitted sets and sampled
 * indices exactly equal to the core outputs; mirostat budget threading
 * within 1e-12 over a core-produced three-step trace.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { MethodConfig, createProcessor, mirostatBudget, processRow, sampleIndex } from "../src/processor.js";

interface FixtureRow {
  id: number;
  temperature: number;
  /** decimal string; 64-bit seeds do not survive a float JSON parse */
  seed: string;
  logits: number[];
  expected: Record<string, { admitted: number[]; token: number; mu_after?: number }>;
}

interface Fixture {
  format_version: number;
  vocab_size: number;
  methods: Record<string, Record<string, number>>;
  rows: FixtureRow[];
  mirostat_trace: {
    target_surprisal: number;
    learning_rate: number;
    temperature: number;
    logits: number[][];
    seeds: string[];
    expected: { tokens: number[]; mus: number[] };
  };
}

const here = dirname(fileURLToPath(import.meta.url));
const fixture: Fixture = JSON.parse(readFileSync(join(here, "..", "fixtures", "parity.json"), "utf-8"));

function methodConfig(name: string, params: Record<string, number>): MethodConfig {
  switch (name) {
    case "pless":
      return { kind: "pless" };
    case "pless-norm":
      return { kind: "pless-norm" };
    case "korder-0.5":
    case "korder-4":
      return { kind: "korder", k: params.k };
    case "top-p":
      return { kind: "top-p", p: params.p };
    case "top-k":
      return { kind: "top-k", k: params.k };
    case "min-p":
      return { kind: "min-p", pBase: params.p_base };
    case "epsilon":
    case "epsilon-high":
      return { kind: "epsilon", eps: params.eps };
    case "eta":
      return { kind: "eta", eps: params.eps };
    case "mirostat":
      return { kind: "mirostat", targetSurprisal: params.target_surprisal, learningRate: params.learning_rate };
    case "greedy":
      return { kind: "greedy" };
    default:
      throw new Error(`fixture uses unknown method ${name}`);
  }
}

function admittedFromMask(masked: Float64Array, original: number[]): number[] {
  const ids: number[] = [];
  for (let i = 0; i < masked.length; i++) {
    if (masked[i] !== -Infinity) {
      expect(masked[i]).toBe(original[i]);
      ids.push(i);
    }
  }
  return ids;
}

describe("golden parity with the core implementation", () => {
  it("pins the fixture schema", () => {
    expect(fixture.format_version).toBe(1);
    expect(fixture.rows.length).toBe(1000);
    expect(Object.keys(fixture.methods).sort()).toEqual(
      [
        "epsilon",
        "epsilon-high",
        "eta",
        "greedy",
        "korder-0.5",
        "korder-4",
        "min-p",
        "mirostat",
        "pless",
        "pless-norm",
        "top-k",
        "top-p",
      ].sort(),
    );
  });

  for (const [name, params] of Object.entries(fixture.methods)) {
    it(`matches admitted sets and sampled indices for ${name}`, () => {
      for (const row of fixture.rows) {
        const expected = row.expected[name];
        const maskHandle = createProcessor({
          method: methodConfig(name, params),
          temperature: row.temperature,
          vocabSize: fixture.vocab_size,
        });
        const masked = processRow(maskHandle, row.logits, row.id);
        expect(admittedFromMask(masked, row.logits)).toEqual(expected.admitted);

        const sampleHandle = createProcessor({
          method: methodConfig(name, params),
          temperature: row.temperature,
          vocabSize: fixture.vocab_size,
        });
        const token = sampleIndex(sampleHandle, row.logits, row.id, BigInt(row.seed));
        expect(token).toBe(expected.token);
        if (expected.mu_after !== undefined) {
          const mu = mirostatBudget(sampleHandle, row.id);
          expect(mu).toBeDefined();
          expect(Math.abs((mu as number) - expected.mu_after)).toBeLessThanOrEqual(1e-12);
        }
      }
    });
  }

  it("threads mirostat state across a core-produced three-step trace", () => {
    const trace = fixture.mirostat_trace;
    const handle = createProcessor({
      method: {
        kind: "mirostat",
        targetSurprisal: trace.target_surprisal,
        learningRate: trace.learning_rate,
      },
      temperature: trace.temperature,
      vocabSize: fixture.vocab_size,
    });
    const sequence = "traced-sequence";
    for (let step = 0; step < trace.logits.length; step++) {
      const token = sampleIndex(handle, trace.logits[step], sequence, BigInt(trace.seeds[step]));
      expect(token).toBe(trace.expected.tokens[step]);
      const mu = mirostatBudget(handle, sequence);
      expect(mu).toBeDefined();
      expect(Math.abs((mu as number) - trace.expected.mus[step])).toBeLessThanOrEqual(1e-12);
    }
  });
});

export { SplitMix64, mix64 } from "./rng.js";
export {
  Truncation,
  collisionLikelihood,
  epsilonTruncate,
  etaTruncate,
  fallbackToArgmax,
  korderThreshold,
  korderTruncate,
  minPTruncate,
  mirostatTruncate,
  plessNormThreshold,
  plessNormTruncate,
  plessTruncate,
  renyiEntropy,
  sampleFromTruncation,
  shannonEntropy,
  softmaxWithTemperature,
  topKTruncate,
  topPTruncate,
  truncateAt,
} from "./math.js";
export {
  INTERFACE_VERSION,
  MethodConfig,
  ProcessorConfig,
  ProcessorHandle,
  createProcessor,
  mirostatBudget,
  processRow,
  sampleIndex,
} from "./processor.js";

export { BindingError, FlatCloud, toRows, validateCloud } from "./flatcloud.js";
export { SamplerClient, ServiceError } from "./client.js";
export { BenchRow, SchemaError, SweepPoint, extractGammaSweep, parseBenchCsv } from "./bench.js";
export { plotGammaSweep, renderGammaSweep } from "./plot.js";

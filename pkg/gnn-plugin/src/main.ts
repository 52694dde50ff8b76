/**
 * Plugin entry: `node dist/main.js <exchange-dir> [--raw-degrees]
 * [--epochs N] [--seed S]`.
 *
 * Reads the exchange directory, trains the spectral regressor on the
 * pooled steps, and writes estimate.json. The initialization seed comes
 * from meta.json (gnn_seed) unless overridden.
 */

import { readExchange, writeEstimate } from "./exchange.js";
import { fitPredictGate } from "./model.js";

export function run(argv: string[]): number {
  const positional: string[] = [];
  let rawDegrees = false;
  let epochs: number | undefined;
  let seedOverride: number | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--raw-degrees") rawDegrees = true;
    else if (arg === "--epochs") epochs = Number.parseInt(argv[++i], 10);
    else if (arg === "--seed") seedOverride = Number.parseInt(argv[++i], 10);
    else positional.push(arg);
  }
  if (positional.length !== 1) {
    console.error("usage: main.js <exchange-dir> [--raw-degrees] [--epochs N] [--seed S]");
    return 2;
  }
  const dir = positional[0];
  const exchange = readExchange(dir);
  const seed = seedOverride ?? exchange.meta.gnn_seed ?? 2;
  const result = fitPredictGate(exchange.steps, seed, { epochs, rawDegrees });
  writeEstimate(dir, result);
  if (!result.converged) {
    console.error(`warning: final training loss ${result.finalLoss.toFixed(3)} > 1.0`);
  }
  return 0;
}

const isEntry = process.argv[1]?.endsWith("main.js");
if (isEntry) {
  process.exit(run(process.argv.slice(2)));
}

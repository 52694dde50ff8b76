/**
 * Repeated-versus-merged check:
 * `node dist/compare.js <repeated-dir> <distinct-dir> [output.json]`.
 *
 * Fits the estimator on both exchange directories (which must carry
 * true_gate in meta.json), reports both biases, and flags whether the
 * distinct-proportion merge beat the repeated one in magnitude.
 */

import * as fs from "node:fs";

import { readExchange, writeEstimate } from "./exchange.js";
import { fitPredictGate } from "./model.js";

interface Side {
  dir: string;
  tau_hat: number;
  final_loss: number;
  bias: number;
}

function fitSide(dir: string, epochs?: number): Side {
  const exchange = readExchange(dir);
  if (exchange.meta.true_gate === undefined) {
    throw new Error(`${dir}: meta.json must carry true_gate for a bias comparison`);
  }
  const result = fitPredictGate(exchange.steps, exchange.meta.gnn_seed ?? 2, { epochs });
  writeEstimate(dir, result);
  return {
    dir,
    tau_hat: result.tauHat,
    final_loss: result.finalLoss,
    bias: result.tauHat - exchange.meta.true_gate,
  };
}

export function runCompare(argv: string[]): number {
  const positional: string[] = [];
  let epochs: number | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--epochs") epochs = Number.parseInt(argv[++i], 10);
    else positional.push(argv[i]);
  }
  if (positional.length < 2 || positional.length > 3) {
    console.error("usage: compare.js <repeated-dir> <distinct-dir> [output.json]");
    return 2;
  }
  const [repeatedDir, distinctDir] = positional;
  const output = positional[2] ?? "comparison.json";
  const repeated = fitSide(repeatedDir, epochs);
  const distinct = fitSide(distinctDir, epochs);
  const payload = {
    repeated,
    distinct,
    distinct_improves: Math.abs(distinct.bias) < Math.abs(repeated.bias),
  };
  fs.writeFileSync(output, JSON.stringify(payload, null, 2));
  console.log(
    `repeated bias ${repeated.bias.toFixed(4)}; distinct bias ` +
    `${distinct.bias.toFixed(4)}; distinct improves: ${payload.distinct_improves}`,
  );
  return 0;
}

const isEntry = process.argv[1]?.endsWith("compare.js");
if (isEntry) {
  process.exit(runCompare(process.argv.slice(2)));
}

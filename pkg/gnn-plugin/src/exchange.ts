/**
 * Harness exchange-directory protocol.
 *
 * Layout: step_<t>_edges.csv ("u,v" per line, 0-indexed), panel.csv
 * ("step,unit,z,y" with header), meta.json {n, proportions, model_kind,
 * graph_files, gnn_seed, true_gate?}. The estimator answers by writing
 * estimate.json {tau_hat, final_loss, converged}.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { buildCsr } from "./csr.js";
import { FitResult, StepData, makeStep } from "./model.js";

export interface ExchangeMeta {
  n: number;
  proportions: number[];
  model_kind: string;
  graph_files: string[];
  gnn_seed: number;
  true_gate?: number;
}

export interface Exchange {
  meta: ExchangeMeta;
  steps: StepData[];
}

function readEdges(filePath: string): Array<[number, number]> {
  const edges: Array<[number, number]> = [];
  const text = fs.readFileSync(filePath, "utf-8");
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const [u, v] = trimmed.split(",");
    edges.push([Number.parseInt(u, 10), Number.parseInt(v, 10)]);
  }
  return edges;
}

export function readExchange(dir: string): Exchange {
  const metaPath = path.join(dir, "meta.json");
  if (!fs.existsSync(metaPath)) throw new Error(`missing meta.json in ${dir}`);
  const meta = JSON.parse(fs.readFileSync(metaPath, "utf-8")) as ExchangeMeta;
  const panelPath = path.join(dir, "panel.csv");
  if (!fs.existsSync(panelPath)) throw new Error(`missing panel.csv in ${dir}`);

  const stepCount = meta.proportions.length;
  const zs = Array.from({ length: stepCount }, () => new Float64Array(meta.n));
  const ys = Array.from({ length: stepCount }, () => new Float64Array(meta.n));
  const lines = fs.readFileSync(panelPath, "utf-8").split("\n");
  if (lines[0].trim() !== "step,unit,z,y") {
    throw new Error(`unexpected panel header: ${lines[0]}`);
  }
  let records = 0;
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const [t, unit, z, y] = line.split(",");
    const step = Number.parseInt(t, 10);
    const u = Number.parseInt(unit, 10);
    zs[step][u] = Number.parseFloat(z);
    ys[step][u] = Number.parseFloat(y);
    records += 1;
  }
  if (records !== stepCount * meta.n) {
    throw new Error(`panel has ${records} records, expected ${stepCount * meta.n}`);
  }

  const steps: StepData[] = [];
  for (let t = 0; t < stepCount; t++) {
    const edgeFile = meta.graph_files?.[t] ?? `step_${t}_edges.csv`;
    const graph = buildCsr(meta.n, readEdges(path.join(dir, edgeFile)));
    steps.push(makeStep(graph, zs[t], ys[t]));
  }
  return { meta, steps };
}

export function writeEstimate(dir: string, result: FitResult): void {
  const payload = {
    tau_hat: result.tauHat,
    final_loss: result.finalLoss,
    converged: result.converged,
  };
  fs.writeFileSync(path.join(dir, "estimate.json"), JSON.stringify(payload, null, 2));
}

/**
 * Three-layer spectral-convolution regressor for global-effect estimation.
 *
 * Architecture (in, out, filter size): (2, 16, 2), (16, 16, 1), (16, 1, 1)
 * with rectifier activations after the first two layers. One model is
 * trained on the pooled node regression loss across all experiment steps
 * (each step against its own graph), then queried at everyone-treated and
 * no-one-treated feature settings on the final step's graph; the estimate
 * is the mean predicted gap.
 */

import { ChebCache, ChebConv } from "./cheb.js";
import { CsrGraph, scaledLaplacianValues } from "./csr.js";
import { Prng } from "./prng.js";
import { reluBackwardInPlace, reluInPlace, zeros } from "./tensor.js";

export interface StepData {
  graph: CsrGraph;
  lapValues: Float64Array;
  z: Float64Array;
  y: Float64Array;
}

export interface TrainOptions {
  epochs?: number;
  learningRate?: number;
  beta1?: number;
  beta2?: number;
  epsilon?: number;
  rawDegrees?: boolean;
}

export interface FitResult {
  tauHat: number;
  finalLoss: number;
  converged: boolean;
}

export const DEFAULT_LAYERS: Array<[number, number, number]> = [
  [2, 16, 2],
  [16, 16, 1],
  [16, 1, 1],
];

/** Node features [treatment, degree] with the degree column standardized. */
export function nodeFeatures(
  graph: CsrGraph,
  z: Float64Array,
  rawDegrees: boolean,
): Float64Array {
  const n = graph.n;
  const x = new Float64Array(n * 2);
  let scale = 1.0;
  let shift = 0.0;
  if (!rawDegrees) {
    let mean = 0;
    for (let i = 0; i < n; i++) mean += graph.degrees[i];
    mean /= n;
    let variance = 0;
    for (let i = 0; i < n; i++) variance += (graph.degrees[i] - mean) ** 2;
    variance /= n;
    shift = mean;
    scale = variance > 0 ? 1.0 / Math.sqrt(variance) : 0.0;
  }
  for (let i = 0; i < n; i++) {
    x[2 * i] = z[i];
    x[2 * i + 1] = rawDegrees
      ? graph.degrees[i]
      : (graph.degrees[i] - shift) * scale;
  }
  return x;
}

interface StepForward {
  caches: ChebCache[];
  preActivations: Float64Array[];
  activations: Float64Array[];
  out: Float64Array;
}

export class GateGnn {
  readonly layers: ChebConv[];

  constructor(seed: number, layerSpec: Array<[number, number, number]> = DEFAULT_LAYERS) {
    const rng = new Prng(seed);
    this.layers = layerSpec.map(([i, o, k]) => new ChebConv(i, o, k, rng));
  }

  private forwardStep(graph: CsrGraph, lapValues: Float64Array, x: Float64Array): StepForward {
    const n = graph.n;
    const caches: ChebCache[] = [];
    const preActivations: Float64Array[] = [];
    const activations: Float64Array[] = [];
    let h = x;
    for (let l = 0; l < this.layers.length; l++) {
      const layer = this.layers[l];
      const cache = layer.computeBases(h, n, graph, lapValues);
      caches.push(cache);
      h = layer.forward(cache);
      if (l < this.layers.length - 1) {
        preActivations.push(Float64Array.from(h));
        reluInPlace(h);
        activations.push(h);
      }
    }
    return { caches, preActivations, activations, out: h };
  }

  predict(graph: CsrGraph, lapValues: Float64Array, x: Float64Array): Float64Array {
    return this.forwardStep(graph, lapValues, x).out;
  }

  /** Pooled mean squared error and gradient accumulation for one step. */
  private backwardStep(
    step: StepData,
    x: Float64Array,
    totalRecords: number,
  ): number {
    const fwd = this.forwardStep(step.graph, step.lapValues, x);
    const n = step.graph.n;
    let loss = 0;
    const gradOut = zeros(n);
    for (let i = 0; i < n; i++) {
      const diff = fwd.out[i] - step.y[i];
      loss += diff * diff;
      gradOut[i] = (2 * diff) / totalRecords;
    }
    let grad: Float64Array | null = gradOut;
    for (let l = this.layers.length - 1; l >= 0; l--) {
      if (l > 0) {
        const nextGrad: Float64Array = this.layers[l].backward(
          fwd.caches[l], grad!, true, step.graph, step.lapValues,
        ) as Float64Array;
        reluBackwardInPlace(nextGrad, fwd.preActivations[l - 1]);
        grad = nextGrad;
      } else {
        this.layers[l].backward(fwd.caches[l], grad!, false, step.graph, step.lapValues);
        grad = null;
      }
    }
    return loss;
  }

  fit(steps: StepData[], options: TrainOptions = {}): number {
    const epochs = options.epochs ?? 400;
    const lr = options.learningRate ?? 0.004;
    const beta1 = options.beta1 ?? 0.9;
    const beta2 = options.beta2 ?? 0.999;
    const eps = options.epsilon ?? 1e-8;
    const rawDegrees = options.rawDegrees ?? false;

    const xs = steps.map((s) => nodeFeatures(s.graph, s.z, rawDegrees));
    const totalRecords = steps.reduce((acc, s) => acc + s.graph.n, 0);

    const params: Float64Array[] = [];
    const grads: Float64Array[] = [];
    for (const layer of this.layers) {
      params.push(...layer.parameters());
      grads.push(...layer.gradients());
    }
    const m = params.map((p) => new Float64Array(p.length));
    const v = params.map((p) => new Float64Array(p.length));

    let loss = Number.POSITIVE_INFINITY;
    for (let epoch = 1; epoch <= epochs; epoch++) {
      for (const layer of this.layers) layer.zeroGrad();
      let sq = 0;
      for (let s = 0; s < steps.length; s++) {
        sq += this.backwardStep(steps[s], xs[s], totalRecords);
      }
      loss = sq / totalRecords;
      const correction1 = 1 - Math.pow(beta1, epoch);
      const correction2 = 1 - Math.pow(beta2, epoch);
      for (let p = 0; p < params.length; p++) {
        const param = params[p];
        const grad = grads[p];
        const mp = m[p];
        const vp = v[p];
        for (let i = 0; i < param.length; i++) {
          mp[i] = beta1 * mp[i] + (1 - beta1) * grad[i];
          vp[i] = beta2 * vp[i] + (1 - beta2) * grad[i] * grad[i];
          const mHat = mp[i] / correction1;
          const vHat = vp[i] / correction2;
          param[i] -= (lr * mHat) / (Math.sqrt(vHat) + eps);
        }
      }
    }
    return loss;
  }

  /** Mean predicted gap between global treatment and global control. */
  estimateGate(finalStep: StepData, rawDegrees = false): number {
    const n = finalStep.graph.n;
    const ones = new Float64Array(n).fill(1);
    const zerosVec = new Float64Array(n);
    const xTreated = nodeFeatures(finalStep.graph, ones, rawDegrees);
    const xControl = nodeFeatures(finalStep.graph, zerosVec, rawDegrees);
    const yTreated = this.predict(finalStep.graph, finalStep.lapValues, xTreated);
    const yControl = this.predict(finalStep.graph, finalStep.lapValues, xControl);
    let acc = 0;
    for (let i = 0; i < n; i++) acc += yTreated[i] - yControl[i];
    return acc / n;
  }
}

export function fitPredictGate(
  steps: StepData[],
  seed: number,
  options: TrainOptions = {},
): FitResult {
  const model = new GateGnn(seed);
  const finalLoss = model.fit(steps, options);
  const tauHat = model.estimateGate(steps[steps.length - 1], options.rawDegrees ?? false);
  return { tauHat, finalLoss, converged: finalLoss <= 1.0 };
}

export function makeStep(graph: CsrGraph, z: Float64Array, y: Float64Array): StepData {
  return { graph, lapValues: scaledLaplacianValues(graph), z, y };
}

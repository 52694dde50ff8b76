/**
 * Chebyshev spectral graph convolution with manual gradients.
 *
 * A layer of filter size K applies out = sum_{j<K} T_j(Lhat) X W_j + b,
 * where T_0 = I, T_1 = Lhat, T_j = 2 Lhat T_{j-1} - T_{j-2} and Lhat is
 * the rescaled symmetric Laplacian (see csr.scaledLaplacianValues). A
 * filter of size 1 therefore reduces to a per-node linear map.
 */

import { CsrGraph, spmm } from "./csr.js";
import { Prng } from "./prng.js";
import {
  addRowVectorInPlace,
  columnSumsAcc,
  matmulAcc,
  matmulRightTransAcc,
  matmulTransAcc,
  zeros,
} from "./tensor.js";

export interface ChebCache {
  bases: Float64Array[]; // T_j applied to the layer input, each n x inDim
  n: number;
}

export class ChebConv {
  readonly inDim: number;
  readonly outDim: number;
  readonly k: number;
  weights: Float64Array[];
  bias: Float64Array;
  gradWeights: Float64Array[];
  gradBias: Float64Array;

  constructor(inDim: number, outDim: number, k: number, rng: Prng) {
    if (k < 1) throw new Error("filter size must be at least 1");
    this.inDim = inDim;
    this.outDim = outDim;
    this.k = k;
    const limit = Math.sqrt(6.0 / (inDim + outDim));
    this.weights = [];
    this.gradWeights = [];
    for (let j = 0; j < k; j++) {
      const w = new Float64Array(inDim * outDim);
      for (let i = 0; i < w.length; i++) w[i] = rng.uniformSigned(limit);
      this.weights.push(w);
      this.gradWeights.push(new Float64Array(inDim * outDim));
    }
    this.bias = new Float64Array(outDim);
    this.gradBias = new Float64Array(outDim);
  }

  /** Chebyshev bases of the input; only needs the graph when k > 1. */
  computeBases(
    input: Float64Array,
    n: number,
    graph?: CsrGraph,
    lapValues?: Float64Array,
  ): ChebCache {
    const bases: Float64Array[] = [input];
    if (this.k > 1) {
      if (!graph || !lapValues) {
        throw new Error("filter size > 1 needs the graph operator");
      }
      bases.push(spmm(graph, lapValues, input, this.inDim));
      for (let j = 2; j < this.k; j++) {
        const next = spmm(graph, lapValues, bases[j - 1], this.inDim);
        for (let i = 0; i < next.length; i++) {
          next[i] = 2 * next[i] - bases[j - 2][i];
        }
        bases.push(next);
      }
    }
    return { bases, n };
  }

  forward(cache: ChebCache): Float64Array {
    const out = zeros(cache.n * this.outDim);
    for (let j = 0; j < this.k; j++) {
      matmulAcc(cache.bases[j], this.weights[j], out, cache.n, this.inDim, this.outDim);
    }
    addRowVectorInPlace(out, this.bias, cache.n, this.outDim);
    return out;
  }

  /**
   * Accumulate parameter gradients; optionally return the input gradient.
   *
   * The input gradient propagates back through the Chebyshev recurrence
   * (the operator is symmetric, so its transpose is itself).
   */
  backward(
    cache: ChebCache,
    gradOut: Float64Array,
    needInputGrad: boolean,
    graph?: CsrGraph,
    lapValues?: Float64Array,
  ): Float64Array | null {
    const n = cache.n;
    columnSumsAcc(gradOut, this.gradBias, n, this.outDim);
    for (let j = 0; j < this.k; j++) {
      matmulTransAcc(cache.bases[j], gradOut, this.gradWeights[j], n, this.inDim, this.outDim);
    }
    if (!needInputGrad) return null;
    const gradBases: Float64Array[] = [];
    for (let j = 0; j < this.k; j++) {
      const g = zeros(n * this.inDim);
      matmulRightTransAcc(gradOut, this.weights[j], g, n, this.outDim, this.inDim);
      gradBases.push(g);
    }
    for (let j = this.k - 1; j >= 2; j--) {
      if (!graph || !lapValues) throw new Error("recurrence backward needs the graph");
      const back = spmm(graph, lapValues, gradBases[j], this.inDim);
      for (let i = 0; i < back.length; i++) {
        gradBases[j - 1][i] += 2 * back[i];
        gradBases[j - 2][i] -= gradBases[j][i];
      }
    }
    const gradInput = gradBases[0];
    if (this.k > 1) {
      if (!graph || !lapValues) throw new Error("recurrence backward needs the graph");
      const back = spmm(graph, lapValues, gradBases[1], this.inDim);
      for (let i = 0; i < gradInput.length; i++) gradInput[i] += back[i];
    }
    return gradInput;
  }

  zeroGrad(): void {
    for (const g of this.gradWeights) g.fill(0);
    this.gradBias.fill(0);
  }

  parameters(): Float64Array[] {
    return [...this.weights, this.bias];
  }

  gradients(): Float64Array[] {
    return [...this.gradWeights, this.gradBias];
  }
}

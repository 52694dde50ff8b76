import { describe, expect, it } from "vitest";

import { ChebConv } from "../src/cheb.js";
import { scaledLaplacianValues } from "../src/csr.js";
import { GateGnn, makeStep, nodeFeatures } from "../src/model.js";
import { Prng } from "../src/prng.js";
import { pathGraph, ringGraph } from "./helpers.js";

describe("ChebConv", () => {
  it("filter size 1 is a per-node linear map, independent of the graph", () => {
    const layer = new ChebConv(2, 3, 1, new Prng(0));
    layer.weights[0].set([1, 2, 3, 4, 5, 6]); // rows: feature, cols: output
    layer.bias.set([0.5, -0.5, 0.0]);
    const x = Float64Array.from([1, 0, 0, 1, 2, -1]);
    const out = layer.forward(layer.computeBases(x, 3));
    // Hand-computed: node0 [1,0] -> [1,2,3]+b; node1 [0,1] -> [4,5,6]+b;
    // node2 [2,-1] -> [2-4, 4-5, 6-6]+b.
    expect(Array.from(out)).toEqual([1.5, 1.5, 3, 4.5, 4.5, 6, -1.5, -1.5, 0]);
  });

  it("filter size 2 propagates through the rescaled Laplacian", () => {
    const g = pathGraph(3);
    const lap = scaledLaplacianValues(g);
    const layer = new ChebConv(1, 1, 2, new Prng(0));
    layer.weights[0].set([0.0]); // isolate the propagated term
    layer.weights[1].set([1.0]);
    layer.bias.set([0.0]);
    const x = Float64Array.from([1, 0, 0]);
    const out = layer.forward(layer.computeBases(x, 3, g, lap));
    // Lhat = -D^{-1/2} A D^{-1/2}: node1 sees -1/sqrt(2*1) of node0.
    expect(out[0]).toBeCloseTo(0.0, 12);
    expect(out[1]).toBeCloseTo(-1 / Math.sqrt(2), 12);
    expect(out[2]).toBeCloseTo(0.0, 12);
  });

  it("recurrence matches dense Chebyshev polynomials for k = 4", () => {
    const g = ringGraph(5);
    const lap = scaledLaplacianValues(g);
    const layer = new ChebConv(1, 1, 4, new Prng(0));
    // Dense reference: Lhat for a 2-regular ring is -A/2.
    const dense = [...Array(5)].map(() => new Float64Array(5));
    for (let u = 0; u < 5; u++) {
      for (let p = g.indptr[u]; p < g.indptr[u + 1]; p++) {
        dense[u][g.indices[p]] = -0.5;
      }
    }
    const x = Float64Array.from([1, -1, 2, 0, 0.5]);
    const matvec = (v: Float64Array) => {
      const out = new Float64Array(5);
      for (let i = 0; i < 5; i++) {
        for (let j = 0; j < 5; j++) out[i] += dense[i][j] * v[j];
      }
      return out;
    };
    const t0 = x;
    const t1 = matvec(t0);
    const t2 = matvec(t1).map((v, i) => 2 * v - t0[i]);
    const t3 = matvec(Float64Array.from(t2)).map((v, i) => 2 * v - t1[i]);
    const cache = layer.computeBases(x, 5, g, lap);
    for (let i = 0; i < 5; i++) {
      expect(cache.bases[2][i]).toBeCloseTo(t2[i], 12);
      expect(cache.bases[3][i]).toBeCloseTo(t3[i], 12);
    }
  });

  it("analytic gradients match finite differences", () => {
    const g = pathGraph(5);
    const step = makeStep(
      g,
      Float64Array.from([1, 0, 1, 0, 1]),
      Float64Array.from([2.0, 1.1, 2.3, 0.9, 2.5]),
    );
    const model = new GateGnn(7);
    const x = nodeFeatures(g, step.z, false);
    const lossOf = () => {
      const out = model.predict(g, step.lapValues, x);
      let s = 0;
      for (let i = 0; i < 5; i++) s += (out[i] - step.y[i]) ** 2;
      return s / 5;
    };
    for (const layer of model.layers) layer.zeroGrad();
    // @ts-expect-error private access is fine inside the test
    model.backwardStep(step, x, 5);
    let worst = 0;
    for (const layer of model.layers) {
      const params = layer.parameters();
      const grads = layer.gradients();
      for (let p = 0; p < params.length; p++) {
        for (let i = 0; i < Math.min(params[p].length, 8); i++) {
          const eps = 1e-6;
          const orig = params[p][i];
          params[p][i] = orig + eps;
          const up = lossOf();
          params[p][i] = orig - eps;
          const down = lossOf();
          params[p][i] = orig;
          worst = Math.max(worst, Math.abs((up - down) / (2 * eps) - grads[p][i]));
        }
      }
    }
    expect(worst).toBeLessThan(1e-6);
  });
});

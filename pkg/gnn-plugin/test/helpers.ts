import { CsrGraph, buildCsr } from "../src/csr.js";

export function ringGraph(n: number): CsrGraph {
  const edges: Array<[number, number]> = [];
  for (let i = 0; i < n; i++) edges.push([i, (i + 1) % n]);
  return buildCsr(n, edges);
}

export function pathGraph(n: number): CsrGraph {
  const edges: Array<[number, number]> = [];
  for (let i = 0; i + 1 < n; i++) edges.push([i, i + 1]);
  return buildCsr(n, edges);
}

/** Disjoint cliques of the given sizes, bridged in a cycle of anchors. */
export function mixedCliques(sizes: number[]): CsrGraph {
  const edges: Array<[number, number]> = [];
  const anchors: number[] = [];
  let base = 0;
  for (const s of sizes) {
    for (let i = 0; i < s; i++) {
      for (let j = i + 1; j < s; j++) edges.push([base + i, base + j]);
    }
    anchors.push(base);
    base += s;
  }
  for (let a = 0; a < anchors.length; a++) {
    edges.push([anchors[a], anchors[(a + 1) % anchors.length]]);
  }
  return buildCsr(base, edges);
}

/** y_i = b0 + b1 z_i + r * (share of treated neighbors). */
export function onehopOutcomes(
  g: CsrGraph, z: Float64Array, b0 = 1, b1 = 1, r = 1,
): Float64Array {
  const y = new Float64Array(g.n);
  for (let u = 0; u < g.n; u++) {
    let treated = 0;
    for (let p = g.indptr[u]; p < g.indptr[u + 1]; p++) treated += z[g.indices[p]];
    y[u] = b0 + b1 * z[u] + (r * treated) / g.degrees[u];
  }
  return y;
}

/** Fixed-seed complete randomization draw (test-local shuffling). */
export function completeDraw(n: number, d: number, seed: number): Float64Array {
  const idx = Array.from({ length: n }, (_, i) => i);
  let s = seed;
  for (let i = n - 1; i > 0; i--) {
    s = (s * 1103515245 + 12345) % 2147483648;
    const j = s % (i + 1);
    [idx[i], idx[j]] = [idx[j], idx[i]];
  }
  const z = new Float64Array(n);
  for (let i = 0; i < d; i++) z[idx[i]] = 1;
  return z;
}

/**
 * Compressed sparse row graphs and the scaled-Laplacian operator used by
 * Chebyshev convolutions.
 */

export interface CsrGraph {
  n: number;
  indptr: Int32Array;
  indices: Int32Array;
  degrees: Float64Array;
  numEdges: number;
}

/** Build an undirected CSR graph from unique (u, v) pairs. */
export function buildCsr(n: number, edges: Array<[number, number]>): CsrGraph {
  const degrees = new Float64Array(n);
  for (const [u, v] of edges) {
    if (u === v) throw new Error(`self-loop on node ${u}`);
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw new Error(`edge (${u}, ${v}) outside 0..${n - 1}`);
    }
    degrees[u] += 1;
    degrees[v] += 1;
  }
  const indptr = new Int32Array(n + 1);
  for (let i = 0; i < n; i++) indptr[i + 1] = indptr[i] + degrees[i];
  const indices = new Int32Array(indptr[n]);
  const cursor = Int32Array.from(indptr.subarray(0, n));
  for (const [u, v] of edges) {
    indices[cursor[u]++] = v;
    indices[cursor[v]++] = u;
  }
  for (let i = 0; i < n; i++) {
    if (degrees[i] === 0) throw new Error(`isolated node ${i}`);
  }
  return { n, indptr, indices, degrees, numEdges: edges.length };
}

/**
 * Scaled-Laplacian weights for the Chebyshev basis.
 *
 * With the symmetrically normalized Laplacian L = I - D^{-1/2} A D^{-1/2}
 * and the spectral bound fixed at 2, the rescaled operator is
 * 2L/lambda_max - I = -D^{-1/2} A D^{-1/2}: the same sparsity pattern as
 * the adjacency with weights -1/sqrt(deg_u * deg_v).
 */
export function scaledLaplacianValues(g: CsrGraph): Float64Array {
  const values = new Float64Array(g.indices.length);
  for (let u = 0; u < g.n; u++) {
    for (let p = g.indptr[u]; p < g.indptr[u + 1]; p++) {
      const v = g.indices[p];
      values[p] = -1.0 / Math.sqrt(g.degrees[u] * g.degrees[v]);
    }
  }
  return values;
}

/** Y = M X for a CSR operator (values aligned with indices), X of shape n x c. */
export function spmm(
  g: CsrGraph,
  values: Float64Array,
  x: Float64Array,
  channels: number,
): Float64Array {
  const out = new Float64Array(g.n * channels);
  for (let u = 0; u < g.n; u++) {
    const rowStart = g.indptr[u];
    const rowEnd = g.indptr[u + 1];
    const base = u * channels;
    for (let p = rowStart; p < rowEnd; p++) {
      const v = g.indices[p];
      const w = values[p];
      const vBase = v * channels;
      for (let c = 0; c < channels; c++) {
        out[base + c] += w * x[vBase + c];
      }
    }
  }
  return out;
}

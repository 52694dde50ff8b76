/** Minimal dense helpers over Float64Array, row-major. */

export function zeros(size: number): Float64Array {
  return new Float64Array(size);
}

/** C += A (n x k) @ B (k x m). */
export function matmulAcc(
  a: Float64Array, b: Float64Array, c: Float64Array,
  n: number, k: number, m: number,
): void {
  for (let i = 0; i < n; i++) {
    const aBase = i * k;
    const cBase = i * m;
    for (let p = 0; p < k; p++) {
      const av = a[aBase + p];
      if (av === 0) continue;
      const bBase = p * m;
      for (let j = 0; j < m; j++) {
        c[cBase + j] += av * b[bBase + j];
      }
    }
  }
}

/** C += A^T (n x k) @ B (n x m), giving k x m. */
export function matmulTransAcc(
  a: Float64Array, b: Float64Array, c: Float64Array,
  n: number, k: number, m: number,
): void {
  for (let i = 0; i < n; i++) {
    const aBase = i * k;
    const bBase = i * m;
    for (let p = 0; p < k; p++) {
      const av = a[aBase + p];
      if (av === 0) continue;
      const cBase = p * m;
      for (let j = 0; j < m; j++) {
        c[cBase + j] += av * b[bBase + j];
      }
    }
  }
}

/** C += A (n x k) @ B^T (m x k), giving n x m. */
export function matmulRightTransAcc(
  a: Float64Array, b: Float64Array, c: Float64Array,
  n: number, k: number, m: number,
): void {
  for (let i = 0; i < n; i++) {
    const aBase = i * k;
    const cBase = i * m;
    for (let j = 0; j < m; j++) {
      const bBase = j * k;
      let acc = 0;
      for (let p = 0; p < k; p++) acc += a[aBase + p] * b[bBase + p];
      c[cBase + j] += acc;
    }
  }
}

export function addRowVectorInPlace(x: Float64Array, bias: Float64Array,
                                    n: number, m: number): void {
  for (let i = 0; i < n; i++) {
    const base = i * m;
    for (let j = 0; j < m; j++) x[base + j] += bias[j];
  }
}

export function reluInPlace(x: Float64Array): void {
  for (let i = 0; i < x.length; i++) if (x[i] < 0) x[i] = 0;
}

/** grad := grad masked by pre-activation sign (backward of relu). */
export function reluBackwardInPlace(grad: Float64Array, pre: Float64Array): void {
  for (let i = 0; i < grad.length; i++) if (pre[i] <= 0) grad[i] = 0;
}

export function columnSumsAcc(x: Float64Array, out: Float64Array,
                              n: number, m: number): void {
  for (let i = 0; i < n; i++) {
    const base = i * m;
    for (let j = 0; j < m; j++) out[j] += x[base + j];
  }
}

/**
 * Flat row-major buffers describing a point cloud, the exchange type for all
 * sampler bindings. Buffers stay untouched by the binding; they are only read
 * when a call serializes them for the service (HTTP does not permit passing
 * views through, so a copy happens at the transport boundary).
 */
export interface FlatCloud {
  /** Number of points. */
  n: number;
  /** Length 3*n, row-major xyz. */
  coords: Float64Array;
  /** Optional length n*c, row-major. */
  features?: Float64Array;
  /** Optional length n, each in [0, 1]. */
  scores?: Float64Array;
  /** Feature width, required when features are present. */
  c?: number;
}

export class BindingError extends Error {}

export function validateCloud(cloud: FlatCloud): void {
  if (!Number.isInteger(cloud.n) || cloud.n < 0) {
    throw new BindingError(`invalid point count ${cloud.n}`);
  }
  if (cloud.coords.length !== 3 * cloud.n) {
    throw new BindingError(
      `coords buffer has ${cloud.coords.length} values, expected ${3 * cloud.n}`,
    );
  }
  if (cloud.features !== undefined) {
    if (cloud.c === undefined || !Number.isInteger(cloud.c) || cloud.c < 1) {
      throw new BindingError("features present but feature width c is missing");
    }
    if (cloud.features.length !== cloud.n * cloud.c) {
      throw new BindingError(
        `features buffer has ${cloud.features.length} values, expected ${cloud.n * cloud.c}`,
      );
    }
  }
  if (cloud.scores !== undefined && cloud.scores.length !== cloud.n) {
    throw new BindingError(
      `scores buffer has ${cloud.scores.length} values, expected ${cloud.n}`,
    );
  }
}

/** Unflatten a buffer into n rows of the given width (plain arrays for JSON). */
export function toRows(buffer: Float64Array, n: number, width: number): number[][] {
  const rows: number[][] = new Array(n);
  for (let i = 0; i < n; i++) {
    const row: number[] = new Array(width);
    for (let j = 0; j < width; j++) {
      row[j] = buffer[i * width + j];
    }
    rows[i] = row;
  }
  return rows;
}

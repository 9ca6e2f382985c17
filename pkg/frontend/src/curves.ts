/**
 * Reference logical-error curves for the four bivariate-bicycle codes.
 *
 * Each curve is p_L(p) = p^(d/2) * exp(c0 + c1*p + c2*p^2) with constants
 * fitted separately for the sparse and flat shuttling schedules.  These are
 * the overlay lines drawn behind the Monte-Carlo points; the simulation
 * package carries the same table.
 */

export interface CurveConstants {
  c0: number;
  c1: number;
  c2: number;
}

export const DISTANCES: Record<string, number> = {
  bb72: 6,
  bb90: 10,
  bb108: 10,
  bb144: 12,
};

export const REFERENCE_CURVES: Record<string, CurveConstants> = {
  "bb72/sparse": { c0: 12.002, c1: 674.98, c2: -67694 },
  "bb90/sparse": { c0: 24.397, c1: -290.59, c2: 24215 },
  "bb108/sparse": { c0: 22.137, c1: 683.86, c2: -72746 },
  "bb144/sparse": { c0: 28.049, c1: 375.3, c2: -42586 },
  "bb72/flat": { c0: 11.963, c1: 408.55, c2: -29498 },
  "bb90/flat": { c0: 24.105, c1: -325.04, c2: 34571 },
  "bb108/flat": { c0: 21.678, c1: 522.45, c2: -43848 },
  "bb144/flat": { c0: 27.422, c1: 140.49, c2: 3216.1 },
};

export function referenceRate(code: string, layout: string, p: number): number {
  const curve = REFERENCE_CURVES[`${code}/${layout}`];
  const d = DISTANCES[code];
  if (curve === undefined || d === undefined) {
    throw new Error(`no reference curve for ${code}/${layout}`);
  }
  return Math.pow(p, d / 2) * Math.exp(curve.c0 + curve.c1 * p + curve.c2 * p * p);
}

export function hasReferenceCurve(code: string, layout: string): boolean {
  return `${code}/${layout}` in REFERENCE_CURVES && code in DISTANCES;
}

/**
 * Analytic 95% probability contours for the built-in 2-D targets.
 *
 * Both targets are smooth pushforwards of a bivariate normal, so the contour
 * is the image of the normal's 95% ellipse under the defining map.
 */

import { SchemaError } from "./csv.js";

/** chi-square(2 dof) quantile at 0.95 */
const CHI2_95 = 5.991464547107979;

export interface TargetSpec {
  kind: "warped_gaussian" | "gaussian";
  sigma2?: number;
  b?: number;
  /** row-major 2x2 covariance for kind = gaussian */
  cov?: number[][];
}

export interface Curve {
  xs: number[];
  ys: number[];
}

function chol2(cov: number[][]): [number, number, number] {
  const [[a, b], [c, d]] = cov;
  if (Math.abs(b - c) > 1e-9) {
    throw new SchemaError("covariance must be symmetric");
  }
  if (a <= 0 || a * d - b * b <= 0) {
    throw new SchemaError("covariance must be positive-definite");
  }
  const l11 = Math.sqrt(a);
  const l21 = b / l11;
  const l22 = Math.sqrt(d - l21 * l21);
  return [l11, l21, l22];
}

export function contour95(spec: TargetSpec, points = 256): Curve {
  const xs: number[] = [];
  const ys: number[] = [];
  const radius = Math.sqrt(CHI2_95);
  if (spec.kind === "warped_gaussian") {
    const sigma2 = spec.sigma2 ?? 100.0;
    const b = spec.b ?? 0.1;
    const sigma = Math.sqrt(sigma2);
    for (let i = 0; i <= points; i += 1) {
      const theta = (2 * Math.PI * i) / points;
      const x1 = sigma * radius * Math.cos(theta);
      const z2 = radius * Math.sin(theta);
      xs.push(x1);
      ys.push(z2 - b * x1 * x1 + sigma2 * b);
    }
    return { xs, ys };
  }
  if (!spec.cov) {
    throw new SchemaError("gaussian target needs a covariance");
  }
  const [l11, l21, l22] = chol2(spec.cov);
  for (let i = 0; i <= points; i += 1) {
    const theta = (2 * Math.PI * i) / points;
    const u = radius * Math.cos(theta);
    const v = radius * Math.sin(theta);
    xs.push(l11 * u);
    ys.push(l21 * u + l22 * v);
  }
  return { xs, ys };
}

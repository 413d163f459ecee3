/**
 * The three figure kinds rendered from sampler CSV artifacts.
 *
 * contours:   empirical kernel scatter over the analytic 95% target contour
 * trajectory: integrator or diffusion path, darkening with step index
 * scaling:    acceptance rate against dimension, one series per integrator
 */

import { readChainCsv, readScalingCsv, readTrajectoryCsv, SchemaError } from "./csv.js";
import { contour95, TargetSpec } from "./contour.js";
import { boundsOf, mergeBounds, padBounds, Scene } from "./svg.js";

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

export function renderContours(csvTexts: string[], sources: string[],
                               target: TargetSpec): string {
  if (csvTexts.length === 0) {
    throw new SchemaError("contours: need at least one chain CSV");
  }
  const chains = csvTexts.map((text, i) => {
    const chain = readChainCsv(text, sources[i]);
    if (chain.coords.length < 2) {
      throw new SchemaError(`${sources[i]}: missing column 'q2'`);
    }
    return chain;
  });
  const curve = contour95(target);
  let bounds = boundsOf(curve.xs, curve.ys);
  for (const chain of chains) {
    bounds = mergeBounds(bounds, boundsOf(chain.coords[0], chain.coords[1]));
  }
  const scene = new Scene(padBounds(bounds), "Kernel spread vs 95% target contour",
                          "q1", "q2");
  scene.polyline(curve.xs, curve.ys, "#444", 2.0);
  chains.forEach((chain, c) => {
    const color = SERIES_COLORS[c % SERIES_COLORS.length];
    const xs = chain.coords[0];
    const ys = chain.coords[1];
    for (let i = 0; i < xs.length; i += 1) {
      scene.dot(xs[i], ys[i], color, 2, 0.35);
    }
    scene.marker(xs[0], ys[0], "#ffcc00");
  });
  scene.legend(chains.map((_, c) => ({
    label: sources[c].replace(/^.*\//, ""),
    color: SERIES_COLORS[c % SERIES_COLORS.length],
  })));
  return scene.render();
}

export function renderTrajectory(csvText: string, source: string): string {
  const traj = readTrajectoryCsv(csvText, source);
  // phase portrait for 1-D systems, position-plane path otherwise
  const [xs, ys, xLabel, yLabel] =
    traj.qs.length >= 2
      ? [traj.qs[0], traj.qs[1], "q1", "q2"]
      : [traj.qs[0], traj.ps[0], "q1", "p1"];
  const scene = new Scene(padBounds(boundsOf(xs, ys)),
                          "Trajectory (darkens with step index)", xLabel, yLabel);
  const n = xs.length;
  for (let i = 0; i + 1 < n; i += 1) {
    const shade = 0.15 + 0.85 * (i / Math.max(1, n - 2));
    scene.segment(xs[i], ys[i], xs[i + 1], ys[i + 1], "#1f77b4", 1.5, shade);
  }
  scene.marker(xs[0], ys[0], "#ffcc00");
  return scene.render();
}

export function renderScaling(csvText: string, source: string): string {
  const points = readScalingCsv(csvText, source);
  if (points.length === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }
  const integrators = [...new Set(points.map((p) => p.integrator))];
  const dims = points.map((p) => p.dim);
  const bounds = {
    xMin: Math.min(...dims),
    xMax: Math.max(...dims),
    yMin: 0.0,
    yMax: 1.05,
  };
  const scene = new Scene(bounds, "Acceptance rate vs dimension",
                          "dimension", "mean acceptance rate", { logX: true });
  integrators.forEach((name, i) => {
    const series = points
      .filter((p) => p.integrator === name)
      .sort((a, b) => a.dim - b.dim);
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    scene.polyline(series.map((p) => p.dim), series.map((p) => p.acceptRate), color, 2);
    for (const p of series) {
      scene.dot(p.dim, p.acceptRate, color, 3);
    }
  });
  scene.legend(integrators.map((name, i) => ({
    label: name,
    color: SERIES_COLORS[i % SERIES_COLORS.length],
  })));
  return scene.render();
}

/**
 * CSV readers for the sampler's artifact schemas.
 *
 * Three schemas are consumed:
 *   chain:      chain,iter,accepted,divergent,delta_h,q1..qn
 *   trajectory: step,h,q1..qn,p1..pn
 *   scaling:    dim,integrator,accept_rate
 *
 * Schema violations raise SchemaError naming the offending column so a bad
 * input fails loudly instead of producing an empty plot.
 */

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string, source = "<csv>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new SchemaError(`${source}: needs a header row and at least one data row`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const fields = line.split(",");
    if (fields.length !== header.length) {
      throw new SchemaError(
        `${source}: row ${i + 1} has ${fields.length} fields, header has ${header.length}`,
      );
    }
    return fields;
  });
  return { header, rows };
}

function requireColumn(table: Table, name: string, source: string): number {
  const index = table.header.indexOf(name);
  if (index < 0) {
    throw new SchemaError(`${source}: missing column '${name}'`);
  }
  return index;
}

function numericColumn(table: Table, name: string, source: string): number[] {
  const index = requireColumn(table, name, source);
  return table.rows.map((row, i) => {
    const value = Number(row[index]);
    if (Number.isNaN(value)) {
      throw new SchemaError(`${source}: column '${name}' row ${i + 1} is not numeric`);
    }
    return value;
  });
}

export interface ChainData {
  /** positions, one array per coordinate q1..qn */
  coords: number[][];
  accepted: number[];
  divergent: number[];
}

export function readChainCsv(text: string, source = "chain.csv"): ChainData {
  const table = parseCsv(text, source);
  for (const name of ["chain", "iter", "accepted", "divergent", "delta_h"]) {
    requireColumn(table, name, source);
  }
  const coords: number[][] = [];
  for (let i = 1; table.header.includes(`q${i}`); i += 1) {
    coords.push(numericColumn(table, `q${i}`, source));
  }
  if (coords.length === 0) {
    throw new SchemaError(`${source}: missing column 'q1'`);
  }
  return {
    coords,
    accepted: numericColumn(table, "accepted", source),
    divergent: numericColumn(table, "divergent", source),
  };
}

export interface TrajectoryData {
  h: number[];
  qs: number[][];
  ps: number[][];
}

export function readTrajectoryCsv(text: string, source = "trajectory.csv"): TrajectoryData {
  const table = parseCsv(text, source);
  requireColumn(table, "step", source);
  const h = numericColumn(table, "h", source);
  const qs: number[][] = [];
  const ps: number[][] = [];
  for (let i = 1; table.header.includes(`q${i}`); i += 1) {
    qs.push(numericColumn(table, `q${i}`, source));
    ps.push(numericColumn(table, `p${i}`, source));
  }
  if (qs.length === 0) {
    throw new SchemaError(`${source}: missing column 'q1'`);
  }
  return { h, qs, ps };
}

export interface ScalingPoint {
  dim: number;
  integrator: string;
  acceptRate: number;
}

export function readScalingCsv(text: string, source = "scaling.csv"): ScalingPoint[] {
  const table = parseCsv(text, source);
  const dim = numericColumn(table, "dim", source);
  const integrator = requireColumn(table, "integrator", source);
  const accept = numericColumn(table, "accept_rate", source);
  return table.rows.map((row, i) => ({
    dim: dim[i],
    integrator: row[integrator],
    acceptRate: accept[i],
  }));
}

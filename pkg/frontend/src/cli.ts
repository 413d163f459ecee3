/**
 * render <kind> --in <csv...> --out <svg> [target flags]
 *
 * Kinds: contours | trajectory | scaling.  Contours take the target through
 * --target warped_gaussian [--sigma2 S --b B] or --target gaussian --cov FILE
 * (whitespace-separated 2x2 matrix).  Inputs are read-only; the output file
 * is written in one pass.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { SchemaError } from "./csv.js";
import { TargetSpec } from "./contour.js";
import { renderContours, renderScaling, renderTrajectory } from "./figures.js";

interface Args {
  kind: string;
  inputs: string[];
  out: string;
  target: string;
  sigma2: number;
  b: number;
  cov?: string;
}

export function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new SchemaError("usage: render <contours|trajectory|scaling> --in <csv...> --out <file.svg>");
  }
  const args: Args = {
    kind: argv[0],
    inputs: [],
    out: "",
    target: "warped_gaussian",
    sigma2: 100.0,
    b: 0.1,
  };
  let i = 1;
  while (i < argv.length) {
    const flag = argv[i];
    switch (flag) {
      case "--in":
        i += 1;
        while (i < argv.length && !argv[i].startsWith("--")) {
          args.inputs.push(argv[i]);
          i += 1;
        }
        break;
      case "--out":
        args.out = argv[i + 1] ?? "";
        i += 2;
        break;
      case "--target":
        args.target = argv[i + 1] ?? "";
        i += 2;
        break;
      case "--sigma2":
        args.sigma2 = Number(argv[i + 1]);
        i += 2;
        break;
      case "--b":
        args.b = Number(argv[i + 1]);
        i += 2;
        break;
      case "--cov":
        args.cov = argv[i + 1];
        i += 2;
        break;
      default:
        throw new SchemaError(`unknown flag '${flag}'`);
    }
  }
  if (args.inputs.length === 0) {
    throw new SchemaError("no input CSVs (--in)");
  }
  if (!args.out) {
    throw new SchemaError("no output path (--out)");
  }
  return args;
}

function loadCovariance(path: string): number[][] {
  const rows = readFileSync(path, "utf-8")
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0)
    .map((line) => line.trim().split(/\s+/).map(Number));
  if (rows.length !== 2 || rows.some((r) => r.length !== 2 || r.some(Number.isNaN))) {
    throw new SchemaError(`${path}: expected a 2x2 numeric matrix`);
  }
  return rows;
}

function targetSpec(args: Args): TargetSpec {
  if (args.target === "warped_gaussian") {
    return { kind: "warped_gaussian", sigma2: args.sigma2, b: args.b };
  }
  if (args.target === "gaussian") {
    if (!args.cov) {
      throw new SchemaError("gaussian target needs --cov <matrix file>");
    }
    return { kind: "gaussian", cov: loadCovariance(args.cov) };
  }
  throw new SchemaError(`unknown target '${args.target}' for contours`);
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const texts = args.inputs.map((path) => readFileSync(path, "utf-8"));
    let svg: string;
    switch (args.kind) {
      case "contours":
        svg = renderContours(texts, args.inputs, targetSpec(args));
        break;
      case "trajectory":
        svg = renderTrajectory(texts[0], args.inputs[0]);
        break;
      case "scaling":
        svg = renderScaling(texts[0], args.inputs[0]);
        break;
      default:
        throw new SchemaError(`unknown figure kind '${args.kind}'`);
    }
    writeFileSync(args.out, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(run(process.argv.slice(2)));
}

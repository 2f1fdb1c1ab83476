/** figures <kind> --in <path...> --out <file> [--d <int>] */

import { writeFileSync } from "fs";
import { pathToFileURL } from "url";
import { render, type FigureKind } from "./figures.js";

const KINDS = [
  "frequency-ladder",
  "nodal-contour",
  "energy-decay",
  "gap-fit",
  "blowdown-trend",
];

export function main(argv: string[]): number {
  const usage = `usage: figures <${KINDS.join("|")}> --in <path...> --out <file> [--d <int>]`;
  if (argv.length === 0 || argv[0] === "--help") {
    console.log(usage);
    return argv.length === 0 ? 2 : 0;
  }
  const kind = argv[0];
  if (!KINDS.includes(kind)) {
    console.error(`unknown kind "${kind}"\n${usage}`);
    return 2;
  }
  const inputs: string[] = [];
  let out = "";
  let dLine: number | undefined;
  for (let i = 1; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--in") {
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        inputs.push(argv[++i]);
      }
    } else if (a === "--out") {
      out = argv[++i] ?? "";
    } else if (a === "--d") {
      dLine = Number(argv[++i]);
      if (!Number.isFinite(dLine)) {
        console.error("--d must be a number");
        return 2;
      }
    } else {
      console.error(`unexpected argument "${a}"\n${usage}`);
      return 2;
    }
  }
  if (inputs.length === 0 || !out) {
    console.error(usage);
    return 2;
  }
  let svg: string;
  try {
    svg = render(kind as FigureKind, inputs, dLine);
  } catch (err) {
    console.error(`figures: ${(err as Error).message}`);
    return 1; // nothing written on failure
  }
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
  return 0;
}

const entry = process.argv[1] ? pathToFileURL(process.argv[1]).href : "";
if (import.meta.url === entry) {
  process.exitCode = main(process.argv.slice(2));
}

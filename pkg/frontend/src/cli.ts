#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { CsvFormatError, parseSweepCsv } from "./csv.js";
import { renderSweepSvg } from "./svg.js";

const USAGE = "usage: plot_sweep <csv> --out <file> [--title <text>]";

/** Run the command line and return the process exit code. */
export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        title: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    console.error(USAGE);
    return 2;
  }
  const { positionals, values } = parsed;
  if (positionals.length !== 1 || !values.out) {
    console.error(USAGE);
    return 2;
  }
  const csvPath = positionals[0] ?? "";

  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (err) {
    console.error(`error: cannot read ${csvPath}: ${err instanceof Error ? err.message : err}`);
    return 2;
  }

  let rows;
  try {
    rows = parseSweepCsv(text);
  } catch (err) {
    if (err instanceof CsvFormatError) {
      console.error(`error: ${csvPath}: ${err.message}`);
      return 2;
    }
    throw err;
  }
  if (rows.length === 0) {
    console.error(`warning: ${csvPath} has no data rows; rendering empty axes`);
  }

  const svg = renderSweepSvg(rows, values.title ? { title: values.title } : {});
  try {
    writeFileSync(values.out, svg, "utf8");
  } catch (err) {
    console.error(`error: cannot write ${values.out}: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plot_sweep")) {
  process.exit(main(process.argv.slice(2)));
}

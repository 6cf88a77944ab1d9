export { CsvFormatError, SWEEP_HEADER, parseSweepCsv } from "./csv.js";
export type { SweepRow } from "./csv.js";
export { linearScale, niceTicks, renderSweepSvg } from "./svg.js";
export type { PlotOptions } from "./svg.js";
export { main } from "./cli.js";

export const SWEEP_HEADER = [
  "ratio_db",
  "ours_mean",
  "ours_std",
  "chamon_mean",
  "chamon_std",
  "summers_mean",
  "summers_std",
] as const;

export interface SweepRow {
  ratioDb: number;
  oursMean: number;
  oursStd: number;
  chamonMean: number;
  chamonStd: number;
  summersMean: number;
  summersStd: number;
}

/** Raised for any deviation from the sweep CSV format. */
export class CsvFormatError extends Error {}

const parseField = (raw: string, line: number, column: string): number => {
  // Number("") is 0 and Number("0x10") is 16; neither is acceptable here.
  if (raw === "" || !/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(raw)) {
    throw new CsvFormatError(
      `line ${line}: column ${column} is not a decimal number: ${JSON.stringify(raw)}`,
    );
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new CsvFormatError(`line ${line}: column ${column} is not finite: ${raw}`);
  }
  return value;
};

/**
 * Parse the strict seven-column sweep format. The header must match
 * exactly and every data row must hold seven finite decimal numbers.
 * A header-only file yields an empty array.
 */
export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.split("\n");
  // the writer terminates the final row with a newline
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new CsvFormatError("empty file: expected a header line");
  }
  const header = (lines[0] ?? "").replace(/\r$/, "");
  if (header !== SWEEP_HEADER.join(",")) {
    throw new CsvFormatError(
      `line 1: bad header: ${JSON.stringify(header)}`,
    );
  }
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = (lines[i] ?? "").replace(/\r$/, "");
    const fields = line.split(",");
    if (fields.length !== SWEEP_HEADER.length) {
      throw new CsvFormatError(
        `line ${i + 1}: expected ${SWEEP_HEADER.length} fields, got ${fields.length}`,
      );
    }
    const at = (k: number) => parseField(fields[k] ?? "", i + 1, SWEEP_HEADER[k] ?? "");
    rows.push({
      ratioDb: at(0),
      oursMean: at(1),
      oursStd: at(2),
      chamonMean: at(3),
      chamonStd: at(4),
      summersMean: at(5),
      summersStd: at(6),
    });
  }
  return rows;
}

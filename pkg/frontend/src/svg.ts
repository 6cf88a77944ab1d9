import { SweepRow } from "./csv.js";

export interface PlotOptions {
  title?: string;
  width?: number;
  height?: number;
  yMin?: number;
  yMax?: number;
  bandOpacity?: number;
}

interface SeriesSpec {
  key: "ours" | "chamon" | "summers";
  mean: (r: SweepRow) => number;
  std: (r: SweepRow) => number;
  stroke: string;
  dash: string;
}

const SERIES: SeriesSpec[] = [
  { key: "ours", mean: (r) => r.oursMean, std: (r) => r.oursStd, stroke: "#000000", dash: "" },
  { key: "chamon", mean: (r) => r.chamonMean, std: (r) => r.chamonStd, stroke: "#1f77b4", dash: "2 3" },
  { key: "summers", mean: (r) => r.summersMean, std: (r) => r.summersStd, stroke: "#d62728", dash: "8 4" },
];

const MARGIN = { top: 40, right: 24, bottom: 48, left: 56 };

const px = (v: number) => String(Math.round(v * 100) / 100);

const tickLabel = (v: number) => String(Number(v.toPrecision(10)));

const escapeXml = (s: string) =>
  s.replace(/[&<>"']/g, (c) =>
    c === "&" ? "&amp;" : c === "<" ? "&lt;" : c === ">" ? "&gt;" : c === '"' ? "&quot;" : "&#39;",
  );

/** Affine map from [lo, hi] onto [rangeLo, rangeHi]. */
export function linearScale(lo: number, hi: number, rangeLo: number, rangeHi: number) {
  const span = hi - lo;
  return (v: number) => rangeLo + ((v - lo) / span) * (rangeHi - rangeLo);
}

/** Round tick positions covering [lo, hi] with a 1/2/5 step. */
export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(1, count);
  const power = Math.floor(Math.log10(rawStep));
  const base = 10 ** power;
  let step = 10 * base;
  for (const mult of [1, 2, 5]) {
    if (mult * base >= rawStep) {
      step = mult * base;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

const polyline = (pts: Array<[number, number]>): string =>
  pts.map(([x, y], i) => `${i === 0 ? "M" : "L"}${px(x)},${px(y)}`).join(" ");

const bandPath = (upper: Array<[number, number]>, lower: Array<[number, number]>): string => {
  if (upper.length === 0) return "";
  return `${polyline(upper)} ${polyline([...lower].reverse()).replace(/^M/, "L")} Z`;
};

/**
 * Render the three sweep series as a static SVG string: solid black for
 * ours, dotted blue for chamon, dashed red for summers, each with a
 * shaded band of one standard deviation on either side. Output depends
 * only on the rows and options, so equal inputs give byte-equal figures.
 */
export function renderSweepSvg(rows: SweepRow[], options: PlotOptions = {}): string {
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const yMin = options.yMin ?? 0;
  const yMax = options.yMax ?? 1;
  const bandOpacity = options.bandOpacity ?? 0.15;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  let xLo = 0;
  let xHi = 1;
  if (rows.length === 1) {
    xLo = (rows[0]?.ratioDb ?? 0) - 1;
    xHi = (rows[0]?.ratioDb ?? 0) + 1;
  } else if (rows.length > 1) {
    xLo = rows[0]?.ratioDb ?? 0;
    xHi = rows[rows.length - 1]?.ratioDb ?? 1;
  }
  const x = linearScale(xLo, xHi, MARGIN.left, MARGIN.left + plotW);
  const y = linearScale(yMin, yMax, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(
    `<clipPath id="plot-area"><rect x="${px(MARGIN.left)}" y="${px(MARGIN.top)}" ` +
      `width="${px(plotW)}" height="${px(plotH)}"/></clipPath>`,
  );

  if (options.title) {
    parts.push(
      `<text x="${px(width / 2)}" y="22" text-anchor="middle" font-size="15" ` +
        `font-weight="bold">${escapeXml(options.title)}</text>`,
    );
  }

  const xTicks = niceTicks(xLo, xHi);
  const yTicks = niceTicks(yMin, yMax);
  const axisY = MARGIN.top + plotH;
  for (const t of yTicks) {
    parts.push(
      `<line x1="${px(MARGIN.left)}" y1="${px(y(t))}" x2="${px(MARGIN.left + plotW)}" ` +
        `y2="${px(y(t))}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${px(MARGIN.left - 8)}" y="${px(y(t) + 4)}" text-anchor="end" ` +
        `font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const t of xTicks) {
    parts.push(
      `<line x1="${px(x(t))}" y1="${px(axisY)}" x2="${px(x(t))}" y2="${px(axisY + 5)}" ` +
        `stroke="#000000" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${px(x(t))}" y="${px(axisY + 18)}" text-anchor="middle" ` +
        `font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${px(MARGIN.left)}" y1="${px(axisY)}" x2="${px(MARGIN.left + plotW)}" ` +
      `y2="${px(axisY)}" stroke="#000000" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${px(MARGIN.left)}" y1="${px(MARGIN.top)}" x2="${px(MARGIN.left)}" ` +
      `y2="${px(axisY)}" stroke="#000000" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${px(MARGIN.left + plotW / 2)}" y="${px(height - 10)}" text-anchor="middle" ` +
      `font-size="12">ratio (dB)</text>`,
  );
  parts.push(
    `<text x="16" y="${px(MARGIN.top + plotH / 2)}" text-anchor="middle" font-size="12" ` +
      `transform="rotate(-90 16 ${px(MARGIN.top + plotH / 2)})">guarantee coefficient</text>`,
  );

  if (rows.length > 0) {
    parts.push(`<g clip-path="url(#plot-area)">`);
    for (const spec of SERIES) {
      const upper: Array<[number, number]> = rows.map((r) => [
        x(r.ratioDb),
        y(spec.mean(r) + spec.std(r)),
      ]);
      const lower: Array<[number, number]> = rows.map((r) => [
        x(r.ratioDb),
        y(spec.mean(r) - spec.std(r)),
      ]);
      parts.push(
        `<path data-band="${spec.key}" d="${bandPath(upper, lower)}" fill="${spec.stroke}" ` +
          `fill-opacity="${bandOpacity}" stroke="none"/>`,
      );
    }
    for (const spec of SERIES) {
      const pts: Array<[number, number]> = rows.map((r) => [x(r.ratioDb), y(spec.mean(r))]);
      const dash = spec.dash ? ` stroke-dasharray="${spec.dash}"` : "";
      parts.push(
        `<path data-series="${spec.key}" d="${polyline(pts)}" fill="none" ` +
          `stroke="${spec.stroke}" stroke-width="1.8"${dash}/>`,
      );
      if (rows.length === 1) {
        // a one-vertex path has no extent, so mark the lone sample
        const pt = pts[0] ?? [0, 0];
        parts.push(
          `<circle data-point="${spec.key}" cx="${px(pt[0])}" cy="${px(pt[1])}" r="3" ` +
            `fill="${spec.stroke}"/>`,
        );
      }
    }
    parts.push(`</g>`);

    const legendX = MARGIN.left + plotW - 120;
    let legendY = MARGIN.top + 14;
    for (const spec of SERIES) {
      const dash = spec.dash ? ` stroke-dasharray="${spec.dash}"` : "";
      parts.push(
        `<line x1="${px(legendX)}" y1="${px(legendY - 4)}" x2="${px(legendX + 28)}" ` +
          `y2="${px(legendY - 4)}" stroke="${spec.stroke}" stroke-width="1.8"${dash}/>`,
      );
      parts.push(
        `<text x="${px(legendX + 34)}" y="${px(legendY)}" font-size="12">${spec.key}</text>`,
      );
      legendY += 18;
    }
  }

  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}

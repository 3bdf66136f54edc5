import { writeFile, readFile } from "node:fs/promises";

import { extractGammaSweep, parseBenchCsv, SchemaError, SweepPoint } from "./bench.js";

const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = { left: 60, right: 20, top: 30, bottom: 45 };

/**
 * Gamma positions on a log10 axis. Zero cannot sit on a log axis, so it is
 * pinned one decade left of the smallest positive gamma and labeled "0".
 */
function gammaPosition(gamma: number, minPositive: number): number {
  return Math.log10(gamma === 0 ? minPositive / 10 : gamma);
}

function polyline(points: [number, number][], color: string, dashed = false): string {
  const attr = dashed ? ' stroke-dasharray="6 3"' : "";
  const path = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="2"${attr} points="${path}"/>`;
}

export function renderGammaSweep(points: SweepPoint[]): string {
  if (points.length === 0) {
    throw new SchemaError("nothing to plot");
  }
  const positive = points.filter((p) => p.gamma > 0).map((p) => p.gamma);
  if (positive.length === 0) {
    throw new SchemaError("need at least one positive gamma for a log axis");
  }
  const minPositive = Math.min(...positive);
  const xs = points.map((p) => gammaPosition(p.gamma, minPositive));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const span = xMax - xMin || 1;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const toX = (x: number) => MARGIN.left + ((x - xMin) / span) * plotW;
  const toY = (v: number) => MARGIN.top + (1 - v) * plotH;

  const recallPts: [number, number][] = [];
  const ratePts: [number, number][] = [];
  points.forEach((p, i) => {
    ratePts.push([toX(xs[i]), toY(p.foregroundRate)]);
    if (p.pointRecall !== null) {
      recallPts.push([toX(xs[i]), toY(p.pointRecall)]);
    }
  });

  const gridY = [0, 0.25, 0.5, 0.75, 1.0]
    .map(
      (v) =>
        `<line x1="${MARGIN.left}" y1="${toY(v)}" x2="${WIDTH - MARGIN.right}" y2="${toY(v)}" stroke="#ddd"/>` +
        `<text x="${MARGIN.left - 8}" y="${toY(v) + 4}" text-anchor="end" font-size="11">${v}</text>`,
    )
    .join("\n");
  const ticks = points
    .map((p, i) => {
      const label = p.gamma === 0 ? "0" : String(p.gamma);
      return (
        `<line x1="${toX(xs[i])}" y1="${HEIGHT - MARGIN.bottom}" x2="${toX(xs[i])}" y2="${HEIGHT - MARGIN.bottom + 5}" stroke="#333"/>` +
        `<text x="${toX(xs[i])}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle" font-size="11">${label}</text>`
      );
    })
    .join("\n");

  const values = points.flatMap((p) =>
    p.pointRecall === null ? [p.foregroundRate] : [p.foregroundRate, p.pointRecall],
  );
  const gammas = points.map((p) => p.gamma);
  const legendRecall =
    recallPts.length > 0
      ? `<line x1="480" y1="14" x2="505" y2="14" stroke="#1f77b4" stroke-width="2"/>` +
        `<text x="510" y="18" font-size="11">point recall</text>`
      : "";

  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}"
  data-gamma-min="${Math.min(...gammas)}" data-gamma-max="${Math.max(...gammas)}"
  data-value-min="${Math.min(...values)}" data-value-max="${Math.max(...values)}"
  data-points="${points.length}">
<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>
<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-size="13">sampling quality vs balance factor</text>
${gridY}
${ticks}
<text x="${WIDTH / 2}" y="${HEIGHT - 8}" text-anchor="middle" font-size="12">gamma (log scale)</text>
${polyline(ratePts, "#d62728", true)}
${recallPts.length > 0 ? polyline(recallPts, "#1f77b4") : ""}
<line x1="480" y1="30" x2="505" y2="30" stroke="#d62728" stroke-width="2" stroke-dasharray="6 3"/>
<text x="510" y="34" font-size="11">foreground rate</text>
${legendRecall}
</svg>
`;
}

/** Render the gamma sweep in a bench CSV to an SVG image file. */
export async function plotGammaSweep(csvPath: string, outPath: string, level?: number): Promise<void> {
  const text = await readFile(csvPath, "utf8");
  const sweep = extractGammaSweep(parseBenchCsv(text), level);
  await writeFile(outPath, renderGammaSweep(sweep), "utf8");
}

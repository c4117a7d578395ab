import { BandPoint, ErrorPoint } from "./series";

const WIDTH = 720;
const HEIGHT = 420;
const MARGIN = { top: 24, right: 24, bottom: 48, left: 72 };

interface Scale {
  (v: number): number;
  domain: [number, number];
}

function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  return fn;
}

function ticks([lo, hi]: [number, number], n = 5): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const unit = [1, 2, 5, 10].find((u) => span / (step * u) <= n * 1.6) ?? 10;
  const inc = step * unit;
  const start = Math.ceil(lo / inc) * inc;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += inc) out.push(Number(v.toPrecision(12)));
  return out;
}

function fmt(v: number): string {
  return Math.abs(v) >= 1000 ? v.toExponential(1) : String(Number(v.toPrecision(6)));
}

function axes(x: Scale, y: Scale, xLabel: string, yLabel: string): string {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  const parts: string[] = [
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
  ];
  for (const t of ticks(x.domain)) {
    const px = x(t);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(`<text x="${px}" y="${y0 + 20}" font-size="11" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of ticks(y.domain)) {
    const py = y(t);
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
    parts.push(`<text x="${x0 - 8}" y="${py + 4}" font-size="11" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 10}" font-size="13" text-anchor="middle">${xLabel}</text>`);
  parts.push(`<text x="16" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 ${(y0 + y1) / 2})">${yLabel}</text>`);
  return parts.join("\n");
}

function document(body: string): string {
  return `<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">
<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>
${body}
</svg>
`;
}

function spans(values: number[]): [number, number] {
  return [Math.min(...values), Math.max(...values)];
}

export function renderLearningCurve(points: BandPoint[], xLabel = "environment steps",
                                    yLabel = "undiscounted return"): string {
  const x = linearScale([0, Math.max(...points.map((p) => p.envStep))],
                        [MARGIN.left, WIDTH - MARGIN.right]);
  const lows = points.map((p) => p.mean - p.halfWidth);
  const highs = points.map((p) => p.mean + p.halfWidth);
  const y = linearScale(spans([...lows, ...highs]),
                        [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const band =
    points.map((p, i) => `${i ? "L" : "M"}${x(p.envStep)},${y(p.mean + p.halfWidth)}`).join(" ") +
    " " +
    [...points].reverse().map((p) => `L${x(p.envStep)},${y(p.mean - p.halfWidth)}`).join(" ") +
    " Z";
  const line = points
    .map((p, i) => `${i ? "L" : "M"}${x(p.envStep)},${y(p.mean)}`)
    .join(" ");
  return document([
    axes(x, y, xLabel, yLabel),
    `<path d="${band}" fill="steelblue" fill-opacity="0.25" stroke="none"/>`,
    `<path d="${line}" fill="none" stroke="steelblue" stroke-width="1.5"/>`,
  ].join("\n"));
}

export function renderPerfPoints(points: ErrorPoint[], xLabel: string,
                                 yLabel = "average return"): string {
  const xs = points.map((p) => p.x);
  const x = linearScale([0, Math.max(...xs) * 1.05],
                        [MARGIN.left, WIDTH - MARGIN.right]);
  const lows = points.map((p) => p.y - p.err);
  const highs = points.map((p) => p.y + p.err);
  const y = linearScale(spans([...lows, ...highs]),
                        [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const sorted = [...points].sort((a, b) => a.x - b.x);
  const line = sorted.map((p, i) => `${i ? "L" : "M"}${x(p.x)},${y(p.y)}`).join(" ");
  const marks = sorted
    .map(
      (p) =>
        `<line x1="${x(p.x)}" y1="${y(p.y - p.err)}" x2="${x(p.x)}" y2="${y(p.y + p.err)}" stroke="darkorange" stroke-width="1.5"/>` +
        `<circle cx="${x(p.x)}" cy="${y(p.y)}" r="3.5" fill="darkorange"/>`,
    )
    .join("\n");
  return document([
    axes(x, y, xLabel, yLabel),
    `<path d="${line}" fill="none" stroke="darkorange" stroke-width="1"/>`,
    marks,
  ].join("\n"));
}

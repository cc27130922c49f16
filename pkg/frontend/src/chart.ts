/**
 * Minimal log-log SVG charts: one or more point series with connecting
 * lines, decade grid lines, and an optional reference-slope guide line.
 * Rendering is a pure function of the input, so regenerating a figure from
 * the same data produces identical bytes.
 */

export interface Series {
  label: string;
  /** (x, y) pairs; y values <= 0 are clamped to the plot floor and drawn hollow. */
  points: Array<[number, number]>;
  color: string;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  /** Slope of a dashed guide line through the first series' first point. */
  guideSlope?: number;
  width?: number;
  height?: number;
  /** Positive floor used to display non-positive y values on the log axis. */
  yFloor?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

const MARGIN = { left: 64, right: 24, top: 36, bottom: 48 };

function fmt(value: number): string {
  return value.toPrecision(6).replace(/\.?0+$/, "").replace(/\.$/, "");
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); e <= Math.floor(Math.log10(hi) + 1e-9); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderLogLogChart(opts: ChartOptions): string {
  const width = opts.width ?? 560;
  const height = opts.height ?? 420;
  const floor = opts.yFloor ?? 1e-16;
  if (opts.series.length === 0 || opts.series.every((s) => s.points.length === 0)) {
    throw new Error("nothing to plot: every series is empty");
  }
  const xs = opts.series.flatMap((s) => s.points.map((p) => p[0]));
  if (xs.some((x) => x <= 0)) throw new Error("log axis requires positive x values");
  const ysRaw = opts.series.flatMap((s) => s.points.map((p) => p[1]));
  const ys = ysRaw.map((y) => (y > 0 ? y : floor));
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys, floor);
  let yHi = Math.max(...ys);
  if (xLo === xHi) [xLo, xHi] = [xLo / 2, xHi * 2];
  if (yLo === yHi) [yLo, yHi] = [yLo / 2, yHi * 2];
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  const toX = (v: number) =>
    MARGIN.left + ((Math.log10(v) - Math.log10(xLo)) / (Math.log10(xHi) - Math.log10(xLo))) * innerW;
  const toY = (v: number) =>
    MARGIN.top + innerH -
    ((Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) * innerH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif" font-size="11">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="13">${escapeXml(opts.title)}</text>`,
  );

  for (const tick of decadeTicks(xLo, xHi)) {
    const x = toX(tick);
    parts.push(
      `<line x1="${x.toFixed(2)}" y1="${MARGIN.top}" x2="${x.toFixed(2)}" ` +
        `y2="${MARGIN.top + innerH}" stroke="#dddddd" stroke-width="0.6"/>`,
      `<text x="${x.toFixed(2)}" y="${MARGIN.top + innerH + 16}" text-anchor="middle">` +
        `${fmt(tick)}</text>`,
    );
  }
  for (const tick of decadeTicks(yLo, yHi)) {
    const y = toY(tick);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(2)}" x2="${MARGIN.left + innerW}" ` +
        `y2="${y.toFixed(2)}" stroke="#dddddd" stroke-width="0.6"/>`,
      `<text x="${MARGIN.left - 6}" y="${(y + 3).toFixed(2)}" text-anchor="end">${fmt(tick)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" ` +
      `fill="none" stroke="#444444" stroke-width="1"/>`,
    `<text x="${MARGIN.left + innerW / 2}" y="${height - 10}" text-anchor="middle">` +
      `${escapeXml(opts.xLabel)}</text>`,
    `<text x="16" y="${MARGIN.top + innerH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + innerH / 2})">${escapeXml(opts.yLabel)}</text>`,
  );

  if (opts.guideSlope !== undefined) {
    const anchor = opts.series[0].points.find((p) => p[1] > 0);
    if (anchor) {
      const [x0, y0] = anchor;
      const guideY = (x: number) => y0 * Math.pow(x / x0, opts.guideSlope as number);
      const clamp = (y: number) => Math.min(Math.max(y, yLo), yHi);
      parts.push(
        `<line x1="${toX(xLo).toFixed(2)}" y1="${toY(clamp(guideY(xLo))).toFixed(2)}" ` +
          `x2="${toX(xHi).toFixed(2)}" y2="${toY(clamp(guideY(xHi))).toFixed(2)}" ` +
          `stroke="#888888" stroke-width="1" stroke-dasharray="6,4" class="guide"/>`,
        `<text x="${MARGIN.left + innerW - 4}" y="${MARGIN.top + 14}" text-anchor="end" ` +
          `fill="#888888">slope ${fmt(opts.guideSlope)}</text>`,
      );
    }
  }

  opts.series.forEach((series, index) => {
    const color = series.color || seriesColor(index);
    const coords = series.points.map(([x, y]) => {
      const clamped = y > 0 ? y : floor;
      return { x: toX(x), y: toY(clamped), clamped: y <= 0 };
    });
    const path = coords
      .map((c, i) => `${i === 0 ? "M" : "L"}${c.x.toFixed(2)} ${c.y.toFixed(2)}`)
      .join(" ");
    parts.push(
      `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5" class="series"/>`,
    );
    for (const c of coords) {
      parts.push(
        `<circle cx="${c.x.toFixed(2)}" cy="${c.y.toFixed(2)}" r="3" ` +
          (c.clamped ? `fill="white" stroke="${color}"` : `fill="${color}"`) + `/>`,
      );
    }
    const ly = MARGIN.top + 14 + 14 * index;
    parts.push(
      `<line x1="${MARGIN.left + 8}" y1="${ly - 4}" x2="${MARGIN.left + 28}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="1.5"/>`,
      `<text x="${MARGIN.left + 33}" y="${ly}">${escapeXml(series.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

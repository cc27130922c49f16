#!/usr/bin/env node
/**
 * Dual-interpolant figure: the unit-ball excess (sup norm minus one) of the
 * interpolated exact dual field against the number of vertices on log-log
 * axes.  Settings whose excess stays O(h) decay along the guide; settings
 * without such a bound rise away from it.  Non-positive excesses are drawn
 * as hollow markers on the plot floor.
 *
 * Usage: plot_interp --in interp_phi0.csv:phi=0 --in interp_pi4.csv:phi=pi/4 --out interp.svg
 */

import { readFileSync, writeFileSync } from "node:fs";

import { parsePlotArgs, type PlotJob } from "./args.js";
import { renderLogLogChart, seriesColor, type Series } from "./chart.js";
import { parseInterpCsv, type InterpRow } from "./csv.js";

export function interpSeries(rows: InterpRow[], label: string, index: number): Series {
  return {
    label,
    points: rows.map((row) => [row.n, row.supNorm - 1.0] as [number, number]),
    color: seriesColor(index),
  };
}

export function buildInterpChart(
  datasets: Array<{ label: string; rows: InterpRow[] }>,
  guide = -0.5,
): string {
  const series = datasets.map((d, i) => interpSeries(d.rows, d.label, i));
  return renderLogLogChart({
    title: "Unit-ball excess of the interpolated dual vs number of vertices",
    xLabel: "vertices N",
    yLabel: "sup norm - 1",
    series,
    guideSlope: guide,
    yFloor: 1e-7,
  });
}

export function runPlotInterp(job: PlotJob): void {
  const datasets = job.inputs.map(({ path, label }) => ({
    label,
    rows: parseInterpCsv(readFileSync(path, "ascii"), path),
  }));
  if (datasets.some((d) => d.rows.length === 0)) {
    throw new Error("refusing to plot an empty series");
  }
  writeFileSync(job.out, buildInterpChart(datasets, job.guide ?? -0.5), "ascii");
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("plot_interp.js") || entry.endsWith("plot_interp")) {
  try {
    runPlotInterp(parsePlotArgs(process.argv.slice(2), -0.5));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exit(1);
  }
}

#!/usr/bin/env node
/**
 * Convergence-rate figure: squared midpoint errors against the number of
 * vertices on log-log axes, with a reference guide of slope -1/2 (squared
 * errors decaying like h correspond to N^(-1/2)).
 *
 * Usage: plot_rates --in two_disk.csv:two-disk --in four_disk.csv --out rates.svg [--guide -0.5]
 */

import { readFileSync, writeFileSync } from "node:fs";

import { parsePlotArgs, type PlotJob } from "./args.js";
import { renderLogLogChart, seriesColor, type Series } from "./chart.js";
import { parseSolveCsv, type SolveRow } from "./csv.js";

export function ratesSeries(rows: SolveRow[], label: string, index: number): Series {
  return {
    label,
    points: rows.map((row) => [row.n, row.errSq] as [number, number]),
    color: seriesColor(index),
  };
}

export function buildRatesChart(
  datasets: Array<{ label: string; rows: SolveRow[] }>,
  guide = -0.5,
): string {
  const series = datasets.map((d, i) => ratesSeries(d.rows, d.label, i));
  return renderLogLogChart({
    title: "Squared midpoint error vs number of vertices",
    xLabel: "vertices N",
    yLabel: "squared L2 error",
    series,
    guideSlope: guide,
  });
}

export function runPlotRates(job: PlotJob): void {
  const datasets = job.inputs.map(({ path, label }) => ({
    label,
    rows: parseSolveCsv(readFileSync(path, "ascii"), path),
  }));
  if (datasets.some((d) => d.rows.length < 2)) {
    throw new Error("each series needs at least two rows to plot a rate");
  }
  writeFileSync(job.out, buildRatesChart(datasets, job.guide ?? -0.5), "ascii");
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("plot_rates.js") || entry.endsWith("plot_rates")) {
  try {
    runPlotRates(parsePlotArgs(process.argv.slice(2), -0.5));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exit(1);
  }
}

import { describe, expect, it } from "vitest";

import { parseInterpCsv, parseSolveCsv, SOLVE_HEADER } from "../src/csv.js";

const SOLVE_SAMPLE = [
  SOLVE_HEADER,
  "3,81,0.35,0.04,nan,4.98,5,1.1",
  "4,289,0.175,0.02,1.0,4.47,6,0.57",
].join("\n");

describe("parseSolveCsv", () => {
  it("parses well-formed rows", () => {
    const rows = parseSolveCsv(SOLVE_SAMPLE);
    expect(rows).toHaveLength(2);
    expect(rows[0].k).toBe(3);
    expect(rows[0].n).toBe(81);
    expect(rows[0].eoc).toBeNaN();
    expect(rows[1].errSq).toBeCloseTo(0.02);
  });

  it("names the offending column on a wrong header", () => {
    expect(() => parseSolveCsv("k,N,h,errors\n", "f.csv")).toThrow(/column 'err_sq'/);
  });

  it("reports the failing line number", () => {
    const bad = SOLVE_HEADER + "\n1,2,3\n";
    expect(() => parseSolveCsv(bad, "f.csv")).toThrow(/f\.csv:2/);
  });

  it("rejects non-numeric cells with the column name", () => {
    const bad = SOLVE_HEADER + "\n3,81,0.35,oops,nan,4.98,5,1.1\n";
    expect(() => parseSolveCsv(bad, "f.csv")).toThrow(/err_sq/);
  });

  it("rejects empty files", () => {
    expect(() => parseSolveCsv("", "f.csv")).toThrow(/empty/);
  });
});

describe("parseInterpCsv", () => {
  it("parses the interp schema", () => {
    const text = "k,N,h,sup_norm,excess_over_h\n1,9,1.41,0.55,-0.316\n";
    const rows = parseInterpCsv(text);
    expect(rows[0].supNorm).toBeCloseTo(0.55);
    expect(rows[0].excessOverH).toBeCloseTo(-0.316);
  });

  it("rejects the solve header", () => {
    expect(() => parseInterpCsv(SOLVE_SAMPLE, "f.csv")).toThrow(/sup_norm/);
  });
});

/**
 * Parsing of the benchmark CSV schemas.
 *
 * Two file kinds are consumed: convergence runs
 * (`k,N,h,err_sq,eoc,energy,steps,gap`) and dual-interpolant checks
 * (`k,N,h,sup_norm,excess_over_h`).  Parsing is strict: a wrong header or a
 * malformed cell raises with the offending column or line.
 */

export interface SolveRow {
  k: number;
  n: number;
  h: number;
  errSq: number;
  eoc: number;
  energy: number;
  steps: number;
  gap: number;
}

export interface InterpRow {
  k: number;
  n: number;
  h: number;
  supNorm: number;
  excessOverH: number;
}

export const SOLVE_HEADER = "k,N,h,err_sq,eoc,energy,steps,gap";
export const INTERP_HEADER = "k,N,h,sup_norm,excess_over_h";

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.length > 0);
}

function checkHeader(expected: string, got: string, source: string): void {
  const expectedCols = expected.split(",");
  const gotCols = got.split(",");
  for (let i = 0; i < expectedCols.length; i++) {
    if (gotCols[i] !== expectedCols[i]) {
      throw new Error(
        `${source}: expected column '${expectedCols[i]}' at position ${i + 1}, ` +
          `got '${gotCols[i] ?? "<missing>"}'`,
      );
    }
  }
  if (gotCols.length !== expectedCols.length) {
    throw new Error(`${source}: expected ${expectedCols.length} columns, got ${gotCols.length}`);
  }
}

function parseNumber(cell: string, column: string, line: number, source: string): number {
  if (cell === "nan") return NaN;
  const value = Number(cell);
  if (cell === "" || Number.isNaN(value)) {
    throw new Error(`${source}:${line}: column '${column}' is not a number: '${cell}'`);
  }
  return value;
}

export function parseSolveCsv(text: string, source = "<csv>"): SolveRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new Error(`${source}: empty file`);
  checkHeader(SOLVE_HEADER, lines[0], source);
  return lines.slice(1).map((line, index) => {
    const cells = line.split(",");
    const at = index + 2;
    if (cells.length !== 8) {
      throw new Error(`${source}:${at}: expected 8 columns, got ${cells.length}`);
    }
    return {
      k: parseNumber(cells[0], "k", at, source),
      n: parseNumber(cells[1], "N", at, source),
      h: parseNumber(cells[2], "h", at, source),
      errSq: parseNumber(cells[3], "err_sq", at, source),
      eoc: parseNumber(cells[4], "eoc", at, source),
      energy: parseNumber(cells[5], "energy", at, source),
      steps: parseNumber(cells[6], "steps", at, source),
      gap: parseNumber(cells[7], "gap", at, source),
    };
  });
}

export function parseInterpCsv(text: string, source = "<csv>"): InterpRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new Error(`${source}: empty file`);
  checkHeader(INTERP_HEADER, lines[0], source);
  return lines.slice(1).map((line, index) => {
    const cells = line.split(",");
    const at = index + 2;
    if (cells.length !== 5) {
      throw new Error(`${source}:${at}: expected 5 columns, got ${cells.length}`);
    }
    return {
      k: parseNumber(cells[0], "k", at, source),
      n: parseNumber(cells[1], "N", at, source),
      h: parseNumber(cells[2], "h", at, source),
      supNorm: parseNumber(cells[3], "sup_norm", at, source),
      excessOverH: parseNumber(cells[4], "excess_over_h", at, source),
    };
  });
}

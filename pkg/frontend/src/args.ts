/** Shared CLI argument handling: repeated --in csv[:label], --out, --guide. */

export interface PlotJob {
  inputs: Array<{ path: string; label: string }>;
  out: string;
  guide?: number;
}

export function parsePlotArgs(argv: string[], defaultGuide?: number): PlotJob {
  const inputs: Array<{ path: string; label: string }> = [];
  let out: string | undefined;
  let guide = defaultGuide;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i++;
      if (i >= argv.length) throw new Error(`missing value after ${arg}`);
      return argv[i];
    };
    if (arg === "--in") {
      const value = next();
      // an optional legend label follows the file extension: path.csv:label
      const marker = value.lastIndexOf(".csv:");
      if (marker >= 0) {
        const split = marker + ".csv".length;
        inputs.push({ path: value.slice(0, split), label: value.slice(split + 1) });
      } else {
        inputs.push({ path: value, label: value });
      }
    } else if (arg === "--out") {
      out = next();
    } else if (arg === "--guide") {
      const value = Number(next());
      if (Number.isNaN(value)) throw new Error("--guide expects a number");
      guide = value;
    } else {
      throw new Error(`unknown argument ${arg}`);
    }
  }
  if (inputs.length === 0) throw new Error("at least one --in csv[:label] is required");
  if (!out) throw new Error("--out <file.svg> is required");
  return { inputs, out, guide };
}

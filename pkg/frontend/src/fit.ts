/** Least-squares slope of log10(y) against log10(x) over the positive pairs. */
export function fitLogLogSlope(xs: number[], ys: number[]): number {
  if (xs.length !== ys.length) throw new Error("fit inputs must have equal length");
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < xs.length; i++) {
    if (xs[i] > 0 && ys[i] > 0) pts.push([Math.log10(xs[i]), Math.log10(ys[i])]);
  }
  if (pts.length < 2) throw new Error("need at least two positive points to fit a slope");
  const mx = pts.reduce((s, p) => s + p[0], 0) / pts.length;
  const my = pts.reduce((s, p) => s + p[1], 0) / pts.length;
  let cov = 0;
  let varX = 0;
  for (const [x, y] of pts) {
    cov += (x - mx) * (y - my);
    varX += (x - mx) * (x - mx);
  }
  if (varX === 0) throw new Error("degenerate fit: all abscissae equal");
  return cov / varX;
}

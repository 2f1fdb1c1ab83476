/**
 * The five figure kinds, all pure functions of the documented artifact files:
 * frequency-ladder, nodal-contour, energy-decay, gap-fit, blowdown-trend.
 * Solver quantities are never recomputed here; fitted constants come from the
 * fit report, traces from the CSVs, fields from the PSFLD1 dump.
 */

import { readFileSync } from "fs";
import { column, readCsv } from "./csv.js";
import { readPsfld, type FieldDump } from "./psfld.js";
import { fmt, frame, Svg } from "./svg.js";

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

export function frequencyLadder(inputs: string[], dLine?: number): string {
  if (inputs.length === 0) throw new Error("frequency-ladder needs at least one trace CSV");
  const tables = inputs.map((p) => ({ path: p, t: readCsv(p) }));
  const rAll: number[] = [];
  const nAll: number[] = [];
  for (const { path, t } of tables) {
    rAll.push(...column(t, "r", path));
    nAll.push(...column(t, "N", path));
  }
  const d = dLine ?? Math.round(nAll[nAll.length - 1]);
  const yHi = Math.max(d + 0.3, Math.max(...nAll) + 0.1);
  const f = frame(560, 380, [0, Math.max(...rAll)], [0, yHi], {
    xLabel: "r",
    yLabel: "N(r)",
    title: "Almgren frequency ladder",
  });
  f.svg.line(f.x(0), f.y(d), f.x(Math.max(...rAll)), f.y(d), "#888", 1, "6,4");
  f.svg.text(f.x(Math.max(...rAll)) - 4, f.y(d) - 5, `N = ${d}`, 10, "end");
  tables.forEach(({ path, t }, i) => {
    const r = column(t, "r", path);
    const N = column(t, "N", path);
    f.svg.polyline(r.map((v, m) => [f.x(v), f.y(N[m])] as [number, number]), PALETTE[i % PALETTE.length]);
  });
  return f.svg.render();
}

export function energyDecay(inputs: string[]): string {
  if (inputs.length !== 1) throw new Error("energy-decay takes exactly one energy CSV");
  const t = readCsv(inputs[0]);
  const ts = column(t, "t", inputs[0]);
  const E = column(t, "E", inputs[0]);
  const f = frame(560, 380, [0, Math.max(...ts)], [Math.min(...E), Math.max(...E)], {
    xLabel: "t",
    yLabel: "E_R",
    title: "Energy decay along the flow",
  });
  f.svg.polyline(ts.map((v, m) => [f.x(v), f.y(E[m])] as [number, number]), PALETTE[0]);
  return f.svg.render();
}

export function gapFit(inputs: string[]): string {
  if (inputs.length !== 2) {
    throw new Error("gap-fit takes the eigen CSV and the fit JSON, in that order");
  }
  const [csvPath, fitPath] = inputs;
  const t = readCsv(csvPath);
  const dCol = column(t, "d", csvPath);
  const lam = column(t, "Lambda", csvPath);
  const val = column(t, "L_value", csvPath);
  const d = dCol[0];
  const gaps = val.map((v, i) => {
    const g = d * d - v;
    if (g <= 0) throw new Error(`${csvPath}: row ${i + 2}: gap d^2 - L is not positive`);
    return g;
  });
  const fit = JSON.parse(readFileSync(fitPath, "utf8")) as { C: number; slope: number };
  if (typeof fit.C !== "number" || typeof fit.slope !== "number") {
    throw new Error(`${fitPath}: fit report must carry numeric C and slope`);
  }
  const f = frame(
    560,
    380,
    [Math.min(...lam) / 2, Math.max(...lam) * 2],
    [Math.min(...gaps) / 2, Math.max(...gaps) * 2],
    { xLabel: "Lambda", yLabel: `d^2 - L (d = ${d})`, xLog: true, yLog: true, title: "Eigenvalue gap fit" }
  );
  const line = [Math.min(...lam), Math.max(...lam)].map(
    (L) => [f.x(L), f.y(fit.C * Math.pow(L, fit.slope))] as [number, number]
  );
  f.svg.polyline(line, "#888", 1);
  lam.forEach((L, i) => f.svg.circle(f.x(L), f.y(gaps[i]), 3.5, PALETTE[0]));
  f.svg.text(f.x(lam[1]), f.y(gaps[1]) - 12, `slope = ${fit.slope.toFixed(3)}`, 11);
  return f.svg.render();
}

export function blowdownTrend(inputs: string[]): string {
  if (inputs.length !== 1) throw new Error("blowdown-trend takes exactly one blowdown CSV");
  const t = readCsv(inputs[0]);
  const R = column(t, "R", inputs[0]);
  const resid = column(t, "residual", inputs[0]);
  const f = frame(560, 380, [0, Math.max(...R) * 1.1], [0, Math.max(...resid) * 1.2], {
    xLabel: "blow-down radius R",
    yLabel: "harmonic fit residual",
    title: "Blow-down residual trend",
  });
  f.svg.polyline(R.map((v, m) => [f.x(v), f.y(resid[m])] as [number, number]), PALETTE[0]);
  R.forEach((v, m) => f.svg.circle(f.x(v), f.y(resid[m]), 3.5, PALETTE[0]));
  return f.svg.render();
}

/** Marching-squares zero contour of u - v on the polar grid, in Cartesian. */
export function zeroContourSegments(dump: FieldDump): Array<[number, number][]> {
  if (dump.k < 2) throw new Error("nodal contour needs at least two components");
  const { nR, nTheta, R } = dump;
  const u = dump.fields[0];
  const v = dump.fields[1];
  const g = (i: number, j: number) => u[i * nTheta + (j % nTheta)] - v[i * nTheta + (j % nTheta)];
  const hTheta = (2 * Math.PI) / nTheta;
  const toXY = (ri: number, th: number): [number, number] => [
    (ri * R) / nR * Math.cos(th),
    (ri * R) / nR * Math.sin(th),
  ];
  const segments: Array<[number, number][]> = [];
  for (let i = 0; i < nR; i++) {
    for (let j = 0; j < nTheta; j++) {
      const c = [g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1)];
      const corners: Array<[number, number]> = [
        [i, j],
        [i + 1, j],
        [i + 1, j + 1],
        [i, j + 1],
      ];
      const pts: Array<[number, number]> = [];
      for (let e = 0; e < 4; e++) {
        const a = c[e];
        const b = c[(e + 1) % 4];
        if ((a > 0 && b <= 0) || (a <= 0 && b > 0)) {
          const t = a / (a - b);
          const [iA, jA] = corners[e];
          const [iB, jB] = corners[(e + 1) % 4];
          const ri = iA + t * (iB - iA);
          const th = (jA + t * (jB - jA)) * hTheta;
          pts.push(toXY(ri, th));
        }
      }
      for (let m = 0; m + 1 < pts.length; m += 2) {
        const [a, b] = [pts[m], pts[m + 1]];
        // exact zeros (center ring, nodal columns) produce degenerate points
        if (Math.hypot(a[0] - b[0], a[1] - b[1]) > 1e-12 * R) {
          segments.push([a, b]);
        }
      }
    }
  }
  return segments;
}

export function nodalContour(inputs: string[]): string {
  if (inputs.length !== 1) throw new Error("nodal-contour takes exactly one PSFLD1 dump");
  const dump = readPsfld(inputs[0]);
  const { R, d } = dump;
  const size = 520;
  const pad = 24;
  const scale = (size - 2 * pad) / (2 * R);
  const px = (x: number) => size / 2 + x * scale;
  const py = (y: number) => size / 2 - y * scale;
  const svg = new Svg(size, size + 26);
  svg.text(size / 2, 16, `zero set of u - v with the ${d} nodal lines of Re(z^${d})`, 12, "middle");
  svg.raw(
    `<circle cx="${fmt(size / 2)}" cy="${fmt(size / 2 + 26)}" r="${fmt(R * scale)}" fill="none" stroke="black"/>`
  );
  const dInt = Math.round(d);
  for (let i = 1; i <= dInt; i++) {
    const alpha = ((2 * i - 1) * Math.PI) / (2 * d);
    svg.line(
      px(R * Math.cos(alpha)),
      py(R * Math.sin(alpha)) + 26,
      px(-R * Math.cos(alpha)),
      py(-R * Math.sin(alpha)) + 26,
      "#aaa",
      1,
      "5,5"
    );
  }
  for (const [[x1, y1], [x2, y2]] of zeroContourSegments(dump)) {
    svg.line(px(x1), py(y1) + 26, px(x2), py(y2) + 26, PALETTE[1], 1.6);
  }
  return svg.render();
}

export type FigureKind =
  | "frequency-ladder"
  | "nodal-contour"
  | "energy-decay"
  | "gap-fit"
  | "blowdown-trend";

export function render(kind: FigureKind, inputs: string[], dLine?: number): string {
  switch (kind) {
    case "frequency-ladder":
      return frequencyLadder(inputs, dLine);
    case "nodal-contour":
      return nodalContour(inputs);
    case "energy-decay":
      return energyDecay(inputs);
    case "gap-fit":
      return gapFit(inputs);
    case "blowdown-trend":
      return blowdownTrend(inputs);
    default:
      throw new Error(`unknown figure kind: ${kind as string}`);
  }
}

/** Minimal deterministic SVG assembly: fixed number formatting, no timestamps. */

export const fmt = (v: number): string => {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate ${v}`);
  const s = v.toPrecision(8);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+(e|$)/, "$1")
    : s;
};

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  if (domain[0] <= 0 || domain[1] <= 0) {
    throw new Error("log scale needs a positive domain");
  }
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const f = ((v: number) => inner(Math.log10(v))) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const first = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += s) out.push(Number(v.toPrecision(12)));
  return out;
}

export class Svg {
  private parts: string[] = [];
  constructor(readonly width: number, readonly height: number) {}

  raw(s: string) {
    this.parts.push(s);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = "") {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5) {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`
    );
  }

  circle(x: number, y: number, r: number, fill: string) {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, size = 11, anchor = "start") {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" font-family="sans-serif" text-anchor="${anchor}">${s}</text>`
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export interface Frame {
  svg: Svg;
  x: Scale;
  y: Scale;
}

/** Standard plot frame with axes, tick marks and labels. */
export function frame(
  width: number,
  height: number,
  xDomain: [number, number],
  yDomain: [number, number],
  opts: { xLabel?: string; yLabel?: string; xLog?: boolean; yLog?: boolean; title?: string } = {}
): Frame {
  const m = { left: 58, right: 16, top: opts.title ? 30 : 14, bottom: 40 };
  const svg = new Svg(width, height);
  const x = (opts.xLog ? logScale : linearScale)(xDomain, [m.left, width - m.right]);
  const y = (opts.yLog ? logScale : linearScale)(yDomain, [height - m.bottom, m.top]);
  svg.line(m.left, height - m.bottom, width - m.right, height - m.bottom, "black");
  svg.line(m.left, m.top, m.left, height - m.bottom, "black");
  const xt = opts.xLog
    ? ticks(Math.log10(xDomain[0]), Math.log10(xDomain[1]), 5).map((e) => Math.pow(10, e))
    : ticks(xDomain[0], xDomain[1]);
  for (const v of xt) {
    const px = x(v);
    svg.line(px, height - m.bottom, px, height - m.bottom + 4, "black");
    svg.text(px, height - m.bottom + 16, opts.xLog ? `1e${Math.round(Math.log10(v))}` : fmt(v), 10, "middle");
  }
  const yt = opts.yLog
    ? ticks(Math.log10(yDomain[0]), Math.log10(yDomain[1]), 5).map((e) => Math.pow(10, e))
    : ticks(yDomain[0], yDomain[1]);
  for (const v of yt) {
    const py = y(v);
    svg.line(m.left - 4, py, m.left, py, "black");
    svg.text(m.left - 7, py + 3, opts.yLog ? `1e${Math.round(Math.log10(v))}` : fmt(v), 10, "end");
  }
  if (opts.xLabel) svg.text((m.left + width - m.right) / 2, height - 8, opts.xLabel, 11, "middle");
  if (opts.yLabel) svg.text(14, m.top - 4, opts.yLabel, 11, "start");
  if (opts.title) svg.text(width / 2, 18, opts.title, 12, "middle");
  return { svg, x, y };
}

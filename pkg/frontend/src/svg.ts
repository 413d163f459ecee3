/**
 * Minimal SVG scene building: a data-space frame with axes plus shapes.
 * No DOM, no dependencies; the output is a standalone SVG document string.
 */

export interface Bounds {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

const WIDTH = 640;
const HEIGHT = 480;
const MARGIN = { left: 64, right: 20, top: 42, bottom: 52 };

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Round to a short decimal so SVG files stay small and diff-stable. */
function r(x: number): string {
  return Number.isFinite(x) ? x.toFixed(2) : "0";
}

export function padBounds(b: Bounds, frac = 0.06): Bounds {
  const dx = (b.xMax - b.xMin) || 1;
  const dy = (b.yMax - b.yMin) || 1;
  return {
    xMin: b.xMin - frac * dx,
    xMax: b.xMax + frac * dx,
    yMin: b.yMin - frac * dy,
    yMax: b.yMax + frac * dy,
  };
}

export function boundsOf(xs: number[], ys: number[]): Bounds {
  return {
    xMin: Math.min(...xs),
    xMax: Math.max(...xs),
    yMin: Math.min(...ys),
    yMax: Math.max(...ys),
  };
}

export function mergeBounds(a: Bounds, b: Bounds): Bounds {
  return {
    xMin: Math.min(a.xMin, b.xMin),
    xMax: Math.max(a.xMax, b.xMax),
    yMin: Math.min(a.yMin, b.yMin),
    yMax: Math.max(a.yMax, b.yMax),
  };
}

function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    out.push(Number(v.toFixed(12)));
  }
  return out;
}

export class Scene {
  private parts: string[] = [];
  private readonly b: Bounds;
  readonly logX: boolean;

  constructor(bounds: Bounds, private title: string,
              private xLabel: string, private yLabel: string,
              opts: { logX?: boolean } = {}) {
    this.logX = opts.logX ?? false;
    this.b = this.logX
      ? { ...bounds, xMin: Math.log10(bounds.xMin), xMax: Math.log10(bounds.xMax) }
      : bounds;
  }

  x(v: number): number {
    const t = this.logX ? Math.log10(v) : v;
    const frac = (t - this.b.xMin) / (this.b.xMax - this.b.xMin || 1);
    return MARGIN.left + frac * (WIDTH - MARGIN.left - MARGIN.right);
  }

  y(v: number): number {
    const frac = (v - this.b.yMin) / (this.b.yMax - this.b.yMin || 1);
    return HEIGHT - MARGIN.bottom - frac * (HEIGHT - MARGIN.top - MARGIN.bottom);
  }

  polyline(xs: number[], ys: number[], stroke: string, width = 1.5, opacity = 1.0) {
    const points = xs.map((x, i) => `${r(this.x(x))},${r(this.y(ys[i]))}`).join(" ");
    this.parts.push(
      `<polyline points="${points}" fill="none" stroke="${stroke}" ` +
      `stroke-width="${width}" stroke-opacity="${opacity.toFixed(3)}"/>`,
    );
  }

  segment(x1: number, y1: number, x2: number, y2: number,
          stroke: string, width = 1.5, opacity = 1.0) {
    this.parts.push(
      `<line x1="${r(this.x(x1))}" y1="${r(this.y(y1))}" x2="${r(this.x(x2))}" ` +
      `y2="${r(this.y(y2))}" stroke="${stroke}" stroke-width="${width}" ` +
      `stroke-opacity="${opacity.toFixed(3)}"/>`,
    );
  }

  dot(x: number, y: number, fill: string, radius = 2, opacity = 1.0) {
    this.parts.push(
      `<circle cx="${r(this.x(x))}" cy="${r(this.y(y))}" r="${radius}" ` +
      `fill="${fill}" fill-opacity="${opacity.toFixed(3)}"/>`,
    );
  }

  marker(x: number, y: number, fill: string) {
    const cx = this.x(x);
    const cy = this.y(y);
    this.parts.push(
      `<path d="M ${r(cx)} ${r(cy - 6)} L ${r(cx + 6)} ${r(cy)} L ${r(cx)} ` +
      `${r(cy + 6)} L ${r(cx - 6)} ${r(cy)} Z" fill="${fill}" stroke="black"/>`,
    );
  }

  legend(entries: Array<{ label: string; color: string }>) {
    entries.forEach((entry, i) => {
      const y = MARGIN.top + 14 + 18 * i;
      const x = WIDTH - MARGIN.right - 150;
      this.parts.push(
        `<rect x="${x}" y="${y - 9}" width="12" height="12" fill="${entry.color}"/>`,
        `<text x="${x + 18}" y="${y}" font-size="12">${esc(entry.label)}</text>`,
      );
    });
  }

  private axes(): string {
    const parts: string[] = [];
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#444"/>`);
    const xt = this.logX
      ? ticks(this.b.xMin, this.b.xMax, 5).map((t) => Math.pow(10, t))
      : ticks(this.b.xMin, this.b.xMax);
    for (const t of xt) {
      const px = this.x(t);
      parts.push(
        `<line x1="${r(px)}" y1="${y0}" x2="${r(px)}" y2="${y0 + 5}" stroke="#444"/>`,
        `<text x="${r(px)}" y="${y0 + 18}" font-size="11" text-anchor="middle">${formatTick(t)}</text>`,
      );
    }
    for (const t of ticks(this.b.yMin, this.b.yMax)) {
      const py = this.y(t);
      parts.push(
        `<line x1="${x0 - 5}" y1="${r(py)}" x2="${x0}" y2="${r(py)}" stroke="#444"/>`,
        `<text x="${x0 - 8}" y="${r(py + 4)}" font-size="11" text-anchor="end">${formatTick(t)}</text>`,
      );
    }
    parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" font-size="13" text-anchor="middle">${esc(this.xLabel)}</text>`,
      `<text x="18" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 ${(y0 + y1) / 2})">${esc(this.yLabel)}</text>`,
      `<text x="${(x0 + x1) / 2}" y="24" font-size="15" text-anchor="middle">${esc(this.title)}</text>`,
    );
    return parts.join("\n");
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      this.axes(),
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

function formatTick(t: number): string {
  if (t !== 0 && (Math.abs(t) >= 1e4 || Math.abs(t) < 1e-3)) {
    return t.toExponential(0);
  }
  return Number(t.toPrecision(6)).toString();
}

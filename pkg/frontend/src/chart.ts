import { formatScore } from "./format.js";

/**
 * SVG chart builders. Pure string producers so they are testable without a
 * DOM. Every chart fixes the [1, 5] axis so variants stay visually
 * comparable; values are plotted exactly as the service returned them.
 */

const AXIS_MIN = 1;
const AXIS_MAX = 5;

export interface Bar {
  name: string;
  value: number;
  fraction: number;
}

export function profileBars(profile: Record<string, number>): Bar[] {
  return Object.entries(profile).map(([name, value]) => ({
    name,
    value,
    fraction: (value - AXIS_MIN) / (AXIS_MAX - AXIS_MIN),
  }));
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

/** Horizontal bar chart of the 12-dimension profile on the fixed [1,5] axis. */
export function profileBarSvg(profile: Record<string, number>, width = 420): string {
  const bars = profileBars(profile);
  const rowH = 22;
  const labelW = 130;
  const trackW = width - labelW - 50;
  const height = bars.length * rowH + 8;
  const rows = bars
    .map((bar, i) => {
      const y = i * rowH + 4;
      const w = Math.max(0, Math.min(1, bar.fraction)) * trackW;
      return [
        `<text x="${labelW - 6}" y="${y + 13}" text-anchor="end" class="dim-label">${esc(bar.name)}</text>`,
        `<rect x="${labelW}" y="${y + 3}" width="${trackW}" height="12" class="track"></rect>`,
        `<rect x="${labelW}" y="${y + 3}" width="${w.toFixed(1)}" height="12" class="bar" data-dimension="${esc(bar.name)}"></rect>`,
        `<text x="${labelW + trackW + 6}" y="${y + 13}" class="value" data-dimension-value="${esc(bar.name)}">${formatScore(bar.value)}</text>`,
      ].join("");
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${width} ${height}" role="img" aria-label="perception profile" class="profile-chart">` +
    rows +
    `</svg>`
  );
}

/** Radar polygon of the profile, same fixed axis. */
export function profileRadarSvg(profile: Record<string, number>, size = 260): string {
  const bars = profileBars(profile);
  const cx = size / 2;
  const cy = size / 2;
  const radius = size / 2 - 36;
  const point = (i: number, frac: number): [number, number] => {
    const angle = (2 * Math.PI * i) / bars.length - Math.PI / 2;
    const r = Math.max(0, Math.min(1, frac)) * radius;
    return [cx + r * Math.cos(angle), cy + r * Math.sin(angle)];
  };
  const outline = bars.map((_, i) => point(i, 1).map((c) => c.toFixed(1)).join(",")).join(" ");
  const poly = bars.map((b, i) => point(i, b.fraction).map((c) => c.toFixed(1)).join(",")).join(" ");
  const labels = bars
    .map((b, i) => {
      const [x, y] = point(i, 1.16);
      return `<text x="${x.toFixed(1)}" y="${y.toFixed(1)}" text-anchor="middle" class="dim-label">${esc(b.name)}</text>`;
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${size} ${size}" role="img" aria-label="perception radar" class="radar-chart">` +
    `<polygon points="${outline}" class="track"></polygon>` +
    `<polygon points="${poly}" class="bar" data-radar></polygon>` +
    labels +
    `</svg>`
  );
}

/**
 * Engagement deltas arrive on the log-outcome scale; the service's
 * convention for a percent change is exp(delta) - 1.
 */
export function engagementPercent(logDelta: number): number {
  return Math.expm1(logDelta);
}

export function formatPercent(logDelta: number): string {
  const pct = engagementPercent(logDelta) * 100;
  const sign = pct > 0 ? "+" : "";
  return `${sign}${pct.toFixed(1)}%`;
}

export const PERCENT_TOOLTIP =
  "Percent change of the raw outcome per the service's exp(delta) - 1 convention on log-transformed engagement.";

export function formatScore(value: number): string {
  return value.toFixed(2);
}

export function formatDelta(value: number): string {
  const sign = value > 0 ? "+" : "";
  return `${sign}${value.toFixed(2)}`;
}

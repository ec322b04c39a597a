/**
 * The console's documented formatting, applied verbatim to API fields.
 *
 * These five functions are the only path from an API number to the screen;
 * the fixture-fidelity tests assert rendered text equals the formatter
 * applied to the raw field, so any recomputation would fail string-exact
 * comparison.
 *
 * - quantities/costs: up to 2 fraction digits, thousands-separated, no
 *   trailing zeros ("1,234.5", "403.5", "16")
 * - fractions (service level, utilization, reliability): percent with one
 *   decimal ("77.5%")
 * - carbon: quantity formatting plus " kg"
 * - ticks/counts: plain integers
 */

const quantityFormatter = new Intl.NumberFormat("en-US", {
  maximumFractionDigits: 2,
});

export function fmtQuantity(value: number): string {
  return quantityFormatter.format(value);
}

export function fmtFraction(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export function fmtCarbon(value: number): string {
  return `${fmtQuantity(value)} kg`;
}

export function fmtTick(value: number): string {
  return String(Math.trunc(value));
}

export function fmtSigned(value: number): string {
  const text = fmtQuantity(Math.abs(value));
  if (value > 0) return `+${text}`;
  if (value < 0) return `-${text}`;
  return "0";
}

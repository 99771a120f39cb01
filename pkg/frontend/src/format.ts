/** Shared number formatting; every estimate renders with its uncertainty. */

export function fixed(value: number, digits = 2): string {
  // Avoid "-0.00" so zero-ish values read as the zero they are.
  const out = value.toFixed(digits);
  return out === `-${(0).toFixed(digits)}` ? (0).toFixed(digits) : out;
}

export function signed(value: number, digits = 2): string {
  const body = fixed(value, digits);
  return value > 0 ? `+${body}` : body;
}

/** "1.23 ± 0.04" */
export function withSe(value: number, se: number, digits = 2): string {
  return `${fixed(value, digits)} ± ${fixed(se, digits)}`;
}

/** "+12.3% ± 1.2%" */
export function percentWithSe(pct: number, sePct: number, digits = 1): string {
  return `${signed(pct, digits)}% ± ${fixed(sePct, digits)}%`;
}

export function share(fraction: number): string {
  return `${fixed(100 * fraction, 1)}%`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

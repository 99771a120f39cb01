import type { DashboardPayload } from "../types.js";
import { escapeHtml, fixed, signed } from "../format.js";

/**
 * One bar per context field: how much better the bandit is because that
 * field is included, with its standard error.
 */
export function renderContextBars(payload: DashboardPayload): string {
  const bars = payload.context_bars;
  if (!bars || bars.length === 0) {
    return `<section id="context-bars"><div class="card error-badge">context contribution unavailable</div></section>`;
  }
  const maxAbs = Math.max(...bars.map((b) => Math.abs(b.gain)), 1e-12);
  const rows = bars
    .map((bar) => {
      const width = Math.min(100, (100 * Math.abs(bar.gain)) / maxAbs);
      const sign = bar.gain >= 0 ? "positive" : "negative";
      return (
        `<div class="bar-row" data-field="${escapeHtml(bar.field_name)}">` +
        `<span class="bar-label">${escapeHtml(bar.field_name)}</span>` +
        `<span class="bar ${sign}" style="width:${fixed(width, 1)}%"></span>` +
        `<span class="bar-value">${signed(bar.gain)} ± ${fixed(bar.gain_se)} ${escapeHtml(
          payload.goal_metric.units
        )}</span>` +
        `</div>`
      );
    })
    .join("");
  return `<section id="context-bars"><h2>Context contribution</h2>${rows}</section>`;
}

import type { DashboardPayload, VariantRow } from "../types.js";
import { escapeHtml, fixed, share, signed } from "../format.js";

export type ShareMode = "display" | "predicted_best";

export const BENEFIT_EXPLAINER =
  "How much value per player the bandit would lose if this option were " +
  "removed and its traffic went to the remaining options.";

/** Inline bar spanning the p10..p90 prediction range, with the mean marked. */
function rangeBar(row: VariantRow, lo: number, hi: number): string {
  const span = hi - lo || 1;
  const left = (100 * (row.p10 - lo)) / span;
  const width = (100 * (row.p90 - row.p10)) / span;
  const mid = (100 * (row.mean_reward - lo)) / span;
  return (
    `<span class="range-bar" data-p10="${row.p10}" data-p90="${row.p90}">` +
    `<span class="range-fill" style="left:${fixed(left, 1)}%;width:${fixed(width, 1)}%"></span>` +
    `<span class="range-mean" style="left:${fixed(mid, 1)}%"></span>` +
    `</span>`
  );
}

export function renderVariantTable(
  payload: DashboardPayload,
  shareMode: ShareMode = "display"
): string {
  const rows = payload.variant_rows;
  if (!rows || rows.length === 0) {
    return `<section id="variants"><div class="card error-badge">variant table unavailable</div></section>`;
  }
  const lo = Math.min(...rows.map((r) => r.p10));
  const hi = Math.max(...rows.map((r) => r.p90));
  const shareLabel =
    shareMode === "display" ? "Share shown" : "Share predicted best";
  const body = rows
    .map((row) => {
      const shareValue =
        shareMode === "display" ? row.display_share : row.predicted_best_share;
      const flags = [
        row.is_baseline ? `<span class="tag">baseline</span>` : "",
        row.low_sample
          ? `<span class="tag warning" title="Fewer than 10 logged contexts back this row.">low sample</span>`
          : "",
      ].join("");
      return (
        `<tr data-arm="${escapeHtml(row.arm_id)}">` +
        `<td>${escapeHtml(row.label)}${flags}</td>` +
        `<td>${fixed(row.mean_reward)} <span class="range">(${fixed(row.p10)}–${fixed(
          row.p90
        )})</span> ${rangeBar(row, lo, hi)}</td>` +
        `<td>${signed(row.expected_benefit)} ± ${fixed(row.expected_benefit_se)}</td>` +
        `<td>${share(shareValue)}</td>` +
        `</tr>`
      );
    })
    .join("");
  const total = rows.reduce(
    (acc, row) =>
      acc + (shareMode === "display" ? row.display_share : row.predicted_best_share),
    0
  );
  return (
    `<section id="variants">` +
    `<h2>Variant performance</h2>` +
    `<label class="share-toggle"><input type="checkbox" id="share-mode-toggle"${
      shareMode === "predicted_best" ? " checked" : ""
    }/> show predicted-best share</label>` +
    `<table><thead><tr>` +
    `<th>Variant</th>` +
    `<th>${escapeHtml(payload.goal_metric.units)} (mean, P10–P90)</th>` +
    `<th>Expected benefit <span class="explainer" title="${escapeHtml(
      BENEFIT_EXPLAINER
    )}">?</span></th>` +
    `<th>${shareLabel}</th>` +
    `</tr></thead><tbody>${body}</tbody>` +
    `<tfoot><tr><td>total</td><td></td><td></td><td>${share(total)}</td></tr></tfoot>` +
    `</table></section>`
  );
}

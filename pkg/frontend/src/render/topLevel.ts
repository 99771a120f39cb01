import type { DashboardPayload } from "../types.js";
import { escapeHtml, fixed, percentWithSe } from "../format.js";

/**
 * Three metric cards in fixed reading order: how much value the bandit is
 * adding, how many people it reaches, and its average performance.
 */
export function renderTopLevel(payload: DashboardPayload): string {
  const section = payload.top_level;
  if (!section) {
    return `<section id="top-level"><div class="card error-badge">top-level metrics unavailable</div></section>`;
  }
  const uplift = section.uplift_defined
    ? `<div class="metric">${percentWithSe(
        section.uplift_vs_original_pct ?? 0,
        section.uplift_se_pct ?? 0
      )}</div>`
    : `<div class="metric flagged" title="The baseline value estimate is not positive, so a relative uplift is not defined.">not defined</div>`;
  const cards = [
    `<div class="card" data-card="uplift"><h3>Uplift vs original offer</h3>${uplift}</div>`,
    `<div class="card" data-card="players"><h3>Players</h3><div class="metric">${section.players.toLocaleString(
      "en-US"
    )}</div></div>`,
    `<div class="card" data-card="reward-per-player"><h3>${escapeHtml(
      section.units
    )} per player</h3><div class="metric">${fixed(section.reward_per_player)}</div></div>`,
  ];
  return `<section id="top-level">${cards.join("")}</section>`;
}

import type { DashboardPayload } from "../types.js";
import { SUPPORTED_SCHEMA_VERSION } from "../types.js";
import { escapeHtml } from "../format.js";
import { renderTopLevel } from "./topLevel.js";
import { renderVariantTable, type ShareMode } from "./variantTable.js";
import { renderRadar } from "./radar.js";
import { renderContextBars } from "./contextBars.js";
import { renderWhatIfForm } from "./whatif.js";

/**
 * Whole-page render, sections in reading order: top-level summary first,
 * per-variant detail second, per-context detail last, then the what-if
 * explorer for acting on what was read.
 */
export function renderDashboard(
  payload: DashboardPayload,
  shareMode: ShareMode = "display"
): string {
  if (payload.schema_version !== SUPPORTED_SCHEMA_VERSION) {
    return (
      `<div class="upgrade-notice">This console supports payload schema ` +
      `version ${SUPPORTED_SCHEMA_VERSION} but the service sent ` +
      `${escapeHtml(String(payload.schema_version))}. Please upgrade the UI.</div>`
    );
  }
  return (
    `<header><h1>${escapeHtml(payload.experiment_id)}</h1>` +
    `<p class="subtitle">${payload.records.toLocaleString("en-US")} logged decisions · ` +
    `goal: ${escapeHtml(payload.goal_metric.name)} (${escapeHtml(
      payload.goal_metric.units
    )})</p></header>` +
    renderTopLevel(payload) +
    renderVariantTable(payload, shareMode) +
    renderRadar(payload) +
    renderContextBars(payload) +
    renderWhatIfForm(payload)
  );
}

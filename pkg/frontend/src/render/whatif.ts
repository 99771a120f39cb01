import type { DashboardPayload, ValueGainReport, WhatIfSpec } from "../types.js";
import { escapeHtml, fixed, signed } from "../format.js";

/**
 * What-if explorer: pick an arm or context field to remove, post the spec,
 * and read the answer as one plain sentence with its uncertainty.
 */

export function selectionLabel(spec: WhatIfSpec, payload: DashboardPayload): string {
  if (spec.kind === "remove_arm") {
    const row = payload.variant_rows.find((r) => r.arm_id === spec.arm_id);
    return row ? row.label : spec.arm_id ?? "?";
  }
  if (spec.kind === "remove_context_field") {
    return spec.field_name ?? "?";
  }
  return spec.kind;
}

export function whatIfSentence(
  spec: WhatIfSpec,
  report: ValueGainReport,
  payload: DashboardPayload
): string {
  if (spec.kind === "identity") {
    return `No change (${fixed(0)}).`;
  }
  // The counterfactual removes the component, so the per-player change an
  // operator would see is minus the value gain.
  const change = -report.gain;
  const units = payload.goal_metric.units;
  const amount = `${signed(change)} ± ${fixed(report.gain_se)} ${units}`;
  if (spec.kind === "baseline_only") {
    return `Showing only the baseline offer would change value per player by ${amount}.`;
  }
  if (spec.kind === "remove_arm") {
    return `Removing ${selectionLabel(spec, payload)} would change value per player by ${amount}.`;
  }
  return `Removing context field ${selectionLabel(
    spec,
    payload
  )} would change value per player by ${amount}.`;
}

export function renderWhatIfForm(payload: DashboardPayload): string {
  const armOptions = payload.variant_rows
    .map(
      (row) =>
        `<option value="remove_arm:${escapeHtml(row.arm_id)}">Remove arm ${escapeHtml(
          row.label
        )}</option>`
    )
    .join("");
  const fieldOptions = payload.context_bars
    .map(
      (bar) =>
        `<option value="remove_context_field:${escapeHtml(
          bar.field_name
        )}">Remove context field ${escapeHtml(bar.field_name)}</option>`
    )
    .join("");
  return (
    `<section id="whatif"><h2>What if…</h2>` +
    `<form id="whatif-form">` +
    `<select id="whatif-selection">` +
    `<option value="identity">No change (sanity check)</option>` +
    `<option value="baseline_only">Show only the baseline offer</option>` +
    `${armOptions}${fieldOptions}` +
    `</select>` +
    `<button type="submit">Estimate</button>` +
    `</form>` +
    `<div id="whatif-result" aria-live="polite"></div>` +
    `</section>`
  );
}

export function parseSelection(value: string): WhatIfSpec {
  if (value === "identity" || value === "baseline_only") {
    return { kind: value };
  }
  const [kind, target] = value.split(":", 2);
  if (kind === "remove_arm") {
    return { kind, arm_id: target };
  }
  if (kind === "remove_context_field") {
    return { kind, field_name: target };
  }
  throw new Error(`unrecognized selection '${value}'`);
}

export function renderWhatIfResult(
  state:
    | { phase: "idle" }
    | { phase: "pending"; spec: WhatIfSpec }
    | { phase: "done"; spec: WhatIfSpec; report: ValueGainReport }
    | { phase: "invalid"; message: string }
    | { phase: "failed"; message: string },
  payload: DashboardPayload
): string {
  switch (state.phase) {
    case "idle":
      return "";
    case "pending":
      return `<div class="pending">estimating…</div>`;
    case "done":
      return `<div class="sentence">${escapeHtml(
        whatIfSentence(state.spec, state.report, payload)
      )}</div>`;
    case "invalid":
      return `<div class="inline-error">${escapeHtml(state.message)}</div>`;
    case "failed":
      return (
        `<div class="inline-error">${escapeHtml(state.message)}</div>` +
        `<button id="whatif-retry">Retry</button>`
      );
  }
}

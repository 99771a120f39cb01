import type { DashboardPayload, RadarDot } from "../types.js";
import { escapeHtml, fixed, signed } from "../format.js";

/**
 * Segmented radar chart: one circular segment per arm, one dot per distinct
 * context placed in the segment of its predicted best arm, at a radius
 * proportional to the normalized relative uplift. Pure geometry over the
 * payload; the SVG string is deterministic.
 */

export const SIZE = 420;
export const CENTER = SIZE / 2;
export const RADIUS = SIZE / 2 - 30;
const TWO_PI = 2 * Math.PI;
const START = -Math.PI / 2; // first segment begins at 12 o'clock

export interface SegmentRange {
  start: number;
  end: number;
}

export function segmentRange(index: number, count: number): SegmentRange {
  const width = TWO_PI / count;
  const start = START + index * width;
  return { start, end: start + width };
}

/** Spread a segment's dots over interior angles, never on a boundary. */
export function dotAngle(
  segmentIndex: number,
  segmentCount: number,
  slot: number,
  slots: number
): number {
  const { start, end } = segmentRange(segmentIndex, segmentCount);
  return start + ((slot + 1) / (slots + 1)) * (end - start);
}

export function dotPosition(
  distance: number,
  angle: number
): { x: number; y: number } {
  return {
    x: CENTER + distance * RADIUS * Math.cos(angle),
    y: CENTER + distance * RADIUS * Math.sin(angle),
  };
}

/** Segment index a dot belongs to, by its best arm's catalog position. */
export function segmentIndexFor(dot: RadarDot, armIds: string[]): number {
  const index = armIds.indexOf(dot.best_arm_id);
  if (index < 0) {
    throw new Error(`radar dot references unknown arm '${dot.best_arm_id}'`);
  }
  return index;
}

function hoverText(dot: RadarDot, units: string): string {
  const fields = Object.entries(dot.context)
    .map(([key, value]) => `${key}=${value}`)
    .join(", ");
  const predictions = Object.entries(dot.predictions)
    .map(([armId, mu]) => `${armId}: ${fixed(mu)}`)
    .join(", ");
  const uplift =
    dot.relative_uplift === null
      ? "uplift undefined (baseline prediction not positive)"
      : `uplift ${signed(100 * dot.relative_uplift, 1)}% vs baseline`;
  return `${fields}\n${uplift}\npredicted ${units}: ${predictions}\n${dot.n_records} records`;
}

function segmentPath(index: number, count: number): string {
  const { start, end } = segmentRange(index, count);
  const x1 = CENTER + RADIUS * Math.cos(start);
  const y1 = CENTER + RADIUS * Math.sin(start);
  const x2 = CENTER + RADIUS * Math.cos(end);
  const y2 = CENTER + RADIUS * Math.sin(end);
  const largeArc = end - start > Math.PI ? 1 : 0;
  return (
    `M ${CENTER} ${CENTER} L ${fixed(x1, 2)} ${fixed(y1, 2)} ` +
    `A ${RADIUS} ${RADIUS} 0 ${largeArc} 1 ${fixed(x2, 2)} ${fixed(y2, 2)} Z`
  );
}

export function renderRadar(payload: DashboardPayload): string {
  const arms = payload.variant_rows.map((row) => row.arm_id);
  const labels = new Map(payload.variant_rows.map((row) => [row.arm_id, row.label]));
  if (!payload.radar || payload.radar.length === 0) {
    return `<section id="radar"><h2>Performance per context</h2><div class="empty-state">No contexts observed yet.</div></section>`;
  }

  const segments = arms
    .map(
      (armId, i) =>
        `<path class="segment segment-${i}" data-arm="${escapeHtml(armId)}" d="${segmentPath(
          i,
          arms.length
        )}"></path>`
    )
    .join("");

  const labelMarks = arms
    .map((armId, i) => {
      const { start, end } = segmentRange(i, arms.length);
      const mid = (start + end) / 2;
      const pos = dotPosition(1.12, mid);
      return `<text class="segment-label" x="${fixed(pos.x, 1)}" y="${fixed(
        pos.y,
        1
      )}" text-anchor="middle">${escapeHtml(labels.get(armId) ?? armId)}</text>`;
    })
    .join("");

  const bySegment = new Map<number, RadarDot[]>();
  for (const dot of payload.radar) {
    const seg = segmentIndexFor(dot, arms);
    const list = bySegment.get(seg) ?? [];
    list.push(dot);
    bySegment.set(seg, list);
  }

  const dots: string[] = [];
  for (const [seg, list] of [...bySegment.entries()].sort((a, b) => a[0] - b[0])) {
    const sorted = [...list].sort((a, b) =>
      a.context_key.localeCompare(b.context_key)
    );
    sorted.forEach((dot, slot) => {
      const angle = dotAngle(seg, arms.length, slot, sorted.length);
      const { x, y } = dotPosition(dot.distance, angle);
      const classes = ["dot"];
      if (dot.clamped) classes.push("clamped");
      if (dot.baseline_flagged) classes.push("flagged");
      dots.push(
        `<circle class="${classes.join(" ")}" cx="${fixed(x, 2)}" cy="${fixed(
          y,
          2
        )}" r="5" data-context="${escapeHtml(dot.context_key)}" data-arm="${escapeHtml(
          dot.best_arm_id
        )}"><title>${escapeHtml(hoverText(dot, payload.goal_metric.units))}</title></circle>`
      );
    });
  }

  return (
    `<section id="radar"><h2>Performance per context</h2>` +
    `<svg viewBox="0 0 ${SIZE} ${SIZE}" role="img" aria-label="Per-context best arm radar">` +
    `${segments}${labelMarks}<circle class="origin" cx="${CENTER}" cy="${CENTER}" r="2"></circle>${dots.join(
      ""
    )}</svg></section>`
  );
}

/**
 * Wire types mirroring the dashboard payload and what-if API documented in
 * the backend repo. The UI renders only schema_version values it supports.
 */

export const SUPPORTED_SCHEMA_VERSION = "1";

export interface GoalMetric {
  name: string;
  units: string;
}

export interface TopLevel {
  uplift_vs_original_pct: number | null;
  uplift_se_pct: number | null;
  uplift_defined: boolean;
  players: number;
  reward_per_player: number;
  units: string;
}

export interface VariantRow {
  arm_id: string;
  label: string;
  is_baseline: boolean;
  mean_reward: number;
  p10: number;
  p90: number;
  expected_benefit: number;
  expected_benefit_se: number;
  display_share: number;
  predicted_best_share: number;
  low_sample: boolean;
}

export interface RadarDot {
  context_key: string;
  context: Record<string, string | number>;
  best_arm_id: string;
  distance: number;
  relative_uplift: number | null;
  clamped: boolean;
  baseline_flagged: boolean;
  n_records: number;
  predictions: Record<string, number>;
}

export interface ContextBar {
  field_name: string;
  gain: number;
  gain_se: number;
}

export interface DashboardPayload {
  schema_version: string;
  experiment_id: string;
  goal_metric: GoalMetric;
  records: number;
  top_level: TopLevel;
  variant_rows: VariantRow[];
  radar: RadarDot[];
  context_bars: ContextBar[];
}

export type AblationKind =
  | "identity"
  | "baseline_only"
  | "remove_arm"
  | "remove_context_field";

export interface WhatIfSpec {
  kind: AblationKind;
  arm_id?: string;
  field_name?: string;
}

export interface WhatIfRequest {
  spec: WhatIfSpec;
  estimator?: "ips" | "snips" | "direct_method" | "doubly_robust";
}

export interface ValueEstimate {
  kind: string;
  point: number;
  se: number;
  n: number;
  clipped_fraction: number;
}

export interface ValueGainReport {
  spec: { kind: AblationKind; arm_id: string | null; field_name: string | null };
  v_pi: ValueEstimate;
  v_pibar: ValueEstimate;
  gain: number;
  gain_se: number;
  relative_uplift: number | null;
  relative_uplift_defined: boolean;
}

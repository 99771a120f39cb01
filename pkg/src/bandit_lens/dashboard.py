"""Assembles the three dashboard sections into one serializable payload.

Sections, in the order an operator reads them:
 1. top level: uplift vs the baseline offer, audience size, reward per
    player.
 2. variant table: per-arm predicted reward distribution, the value
    attributable to the arm (via single-arm ablation), and how often it
    was shown.
 3. per context: the predicted best arm and relative uplift for every
    distinct context (radar), and per-field value gains (bars).

The payload is a pure function of (log view, policy snapshot, config):
identical inputs serialize to identical bytes. Every estimate carries its
standard error so results can be read proportionately to their certainty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .config import ExperimentConfig
from .context import context_key
from .exceptions import ConfigError, EstimatorError
from .logstore import LogView
from .ope import ValueEstimate
from .policies import PolicySnapshot, tiebreak_argmax_rows
from .value_gain import (
    BASELINE_ONLY,
    REMOVE_ARM,
    REMOVE_CONTEXT_FIELD,
    AblationSpec,
    ValueGainReport,
    value_gain,
)

PAYLOAD_SCHEMA_VERSION = "1"
LOW_SAMPLE_THRESHOLD = 10


@dataclass(frozen=True)
class TopLevelMetrics:
    uplift_vs_original_pct: float | None
    uplift_se_pct: float | None
    uplift_defined: bool
    players: int
    reward_per_player: float
    units: str


@dataclass(frozen=True)
class VariantRow:
    arm_id: str
    label: str
    is_baseline: bool
    mean_reward: float
    p10: float
    p90: float
    expected_benefit: float
    expected_benefit_se: float
    display_share: float
    predicted_best_share: float
    low_sample: bool


@dataclass(frozen=True)
class RadarDot:
    context_key: str
    context: dict[str, Any]
    best_arm_id: str
    distance: float
    relative_uplift: float | None  # unclamped; None when baseline prediction <= 0
    clamped: bool
    baseline_flagged: bool
    n_records: int
    predictions: dict[str, float]


@dataclass(frozen=True)
class ContextBar:
    field_name: str
    gain: float
    gain_se: float


@dataclass(frozen=True)
class DashboardPayload:
    schema_version: str
    experiment_id: str
    goal_metric_name: str
    goal_metric_units: str
    records: int
    top_level: TopLevelMetrics
    variant_rows: tuple[VariantRow, ...]
    radar: tuple[RadarDot, ...]
    context_bars: tuple[ContextBar, ...]


def _player_count(view: LogView) -> int:
    user_ids = [r.user_id for r in view.records]
    if user_ids and all(uid is not None for uid in user_ids):
        return len(set(user_ids))
    return view.n


def top_level_metrics(
    view: LogView, baseline_report: ValueGainReport, config: ExperimentConfig
) -> TopLevelMetrics:
    if view.n == 0:
        raise EstimatorError("empty log")
    players = _player_count(view)
    reward_per_player = float(view.reward.sum() / players)
    if baseline_report.relative_uplift_defined:
        base = baseline_report.v_pibar.point
        uplift_pct = 100.0 * baseline_report.relative_uplift
        uplift_se_pct = 100.0 * baseline_report.gain_se / base
    else:
        uplift_pct = None
        uplift_se_pct = None
    return TopLevelMetrics(
        uplift_vs_original_pct=uplift_pct,
        uplift_se_pct=uplift_se_pct,
        uplift_defined=baseline_report.relative_uplift_defined,
        players=players,
        reward_per_player=reward_per_player,
        units=config.goal_metric.units,
    )


def variant_table(
    view: LogView, policy: PolicySnapshot, config: ExperimentConfig
) -> tuple[VariantRow, ...]:
    if view.n == 0:
        raise EstimatorError("empty log")
    model = policy.model
    if model is None:
        raise ConfigError("variant table needs a model-backed policy")
    mu_hat = model.predict_matrix(view.X)  # (n, K)
    best = tiebreak_argmax_rows(mu_hat, policy.lex_perm)
    low_sample = view.n < LOW_SAMPLE_THRESHOLD

    rows = []
    for idx, arm in enumerate(config.arms):
        preds = mu_hat[:, idx]
        benefit = value_gain(
            view,
            policy,
            AblationSpec(kind=REMOVE_ARM, arm_id=arm.arm_id),
            config.estimator,
        )
        rows.append(
            VariantRow(
                arm_id=arm.arm_id,
                label=arm.label,
                is_baseline=arm.is_baseline,
                mean_reward=float(preds.mean()),
                p10=float(np.percentile(preds, 10)),
                p90=float(np.percentile(preds, 90)),
                expected_benefit=benefit.gain,
                expected_benefit_se=benefit.gain_se,
                display_share=float((view.arm_index == idx).mean()),
                predicted_best_share=float((best == idx).mean()),
                low_sample=low_sample,
            )
        )
    return tuple(rows)


def radar_data(
    view: LogView, policy: PolicySnapshot, config: ExperimentConfig
) -> tuple[RadarDot, ...]:
    """One dot per distinct raw context: predicted best arm and how far its
    predicted reward sits above the baseline arm's, relative, normalized to
    the max across contexts. Uses the model (direct-method) per-context gain:
    per-context importance weighting over a handful of records would be
    statistically meaningless at this granularity.
    """
    if view.n == 0:
        raise EstimatorError("empty log")
    model = policy.model
    if model is None:
        raise ConfigError("radar needs a model-backed policy")

    seen: dict[str, dict] = {}
    for record in view.records:
        key = context_key(record.context.raw, view.schema)
        if key not in seen:
            seen[key] = {"context": record.context, "count": 0}
        seen[key]["count"] += 1

    baseline_idx = next(
        i for i, a in enumerate(config.arms) if a.is_baseline
    )
    keys = list(seen)
    X = np.stack([seen[k]["context"].encoded for k in keys])
    mu_hat = model.predict_matrix(X)
    best_idx = tiebreak_argmax_rows(mu_hat, policy.lex_perm)

    raw_uplifts: list[float | None] = []
    clamped_flags: list[bool] = []
    flagged: list[bool] = []
    distances_raw: list[float] = []
    for i in range(len(keys)):
        base_pred = mu_hat[i, baseline_idx]
        if base_pred <= 0.0:
            raw_uplifts.append(None)
            clamped_flags.append(False)
            flagged.append(True)
            distances_raw.append(0.0)
            continue
        uplift = float((mu_hat[i, best_idx[i]] - base_pred) / base_pred)
        raw_uplifts.append(uplift)
        clamped_flags.append(uplift < 0.0)
        flagged.append(False)
        distances_raw.append(max(0.0, float(uplift)))

    max_raw = max(distances_raw) if distances_raw else 0.0
    dots = []
    for i, key in enumerate(keys):
        distance = distances_raw[i] / max_raw if max_raw > 0.0 else 0.0
        dots.append(
            RadarDot(
                context_key=key,
                context=dict(seen[key]["context"].raw),
                best_arm_id=config.arms[best_idx[i]].arm_id,
                distance=distance,
                relative_uplift=raw_uplifts[i],
                clamped=clamped_flags[i],
                baseline_flagged=flagged[i],
                n_records=seen[key]["count"],
                predictions={
                    a.arm_id: float(mu_hat[i, j])
                    for j, a in enumerate(config.arms)
                },
            )
        )
    return tuple(dots)


def context_bars(
    view: LogView, policy: PolicySnapshot, config: ExperimentConfig
) -> tuple[ContextBar, ...]:
    if not config.schema.fields:
        raise ConfigError("schema has no context fields")
    bars = []
    for field in config.schema.fields:
        report = value_gain(
            view,
            policy,
            AblationSpec(kind=REMOVE_CONTEXT_FIELD, field_name=field.name),
            config.estimator,
        )
        bars.append(
            ContextBar(field_name=field.name, gain=report.gain, gain_se=report.gain_se)
        )
    return tuple(bars)


def assemble_dashboard(
    view: LogView, policy: PolicySnapshot, config: ExperimentConfig
) -> DashboardPayload:
    # Computed once; feeds both the headline uplift and any consumer that
    # wants to recompute it, so the two can never disagree.
    baseline_report = value_gain(
        view, policy, AblationSpec(kind=BASELINE_ONLY), config.estimator
    )
    return DashboardPayload(
        schema_version=PAYLOAD_SCHEMA_VERSION,
        experiment_id=config.experiment_id,
        goal_metric_name=config.goal_metric.name,
        goal_metric_units=config.goal_metric.units,
        records=view.n,
        top_level=top_level_metrics(view, baseline_report, config),
        variant_rows=variant_table(view, policy, config),
        radar=radar_data(view, policy, config),
        context_bars=context_bars(view, policy, config),
    )


def payload_to_dict(payload: DashboardPayload) -> dict[str, Any]:
    t = payload.top_level
    return {
        "schema_version": payload.schema_version,
        "experiment_id": payload.experiment_id,
        "goal_metric": {
            "name": payload.goal_metric_name,
            "units": payload.goal_metric_units,
        },
        "records": payload.records,
        "top_level": {
            "uplift_vs_original_pct": t.uplift_vs_original_pct,
            "uplift_se_pct": t.uplift_se_pct,
            "uplift_defined": t.uplift_defined,
            "players": t.players,
            "reward_per_player": t.reward_per_player,
            "units": t.units,
        },
        "variant_rows": [
            {
                "arm_id": r.arm_id,
                "label": r.label,
                "is_baseline": r.is_baseline,
                "mean_reward": r.mean_reward,
                "p10": r.p10,
                "p90": r.p90,
                "expected_benefit": r.expected_benefit,
                "expected_benefit_se": r.expected_benefit_se,
                "display_share": r.display_share,
                "predicted_best_share": r.predicted_best_share,
                "low_sample": r.low_sample,
            }
            for r in payload.variant_rows
        ],
        "radar": [
            {
                "context_key": d.context_key,
                "context": d.context,
                "best_arm_id": d.best_arm_id,
                "distance": d.distance,
                "relative_uplift": d.relative_uplift,
                "clamped": d.clamped,
                "baseline_flagged": d.baseline_flagged,
                "n_records": d.n_records,
                "predictions": d.predictions,
            }
            for d in payload.radar
        ],
        "context_bars": [
            {"field_name": b.field_name, "gain": b.gain, "gain_se": b.gain_se}
            for b in payload.context_bars
        ],
    }


def payload_to_json(payload: DashboardPayload) -> str:
    return json.dumps(payload_to_dict(payload), indent=2) + "\n"


def estimate_to_dict(estimate: ValueEstimate) -> dict[str, Any]:
    return {
        "kind": estimate.kind,
        "point": estimate.point,
        "se": estimate.se,
        "n": estimate.n,
        "clipped_fraction": estimate.clipped_fraction,
    }


def report_to_dict(report: ValueGainReport) -> dict[str, Any]:
    return {
        "spec": {
            "kind": report.spec.kind,
            "arm_id": report.spec.arm_id,
            "field_name": report.spec.field_name,
            "estimator": report.spec.estimator,
        },
        "v_pi": estimate_to_dict(report.v_pi),
        "v_pibar": estimate_to_dict(report.v_pibar),
        "gain": report.gain,
        "gain_se": report.gain_se,
        "relative_uplift": report.relative_uplift,
        "relative_uplift_defined": report.relative_uplift_defined,
    }

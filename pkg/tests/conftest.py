"""Shared fixtures: tiny catalogs, schemas, and hand-buildable models/logs."""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
import pytest

from bandit_lens.config import (
    Arm,
    EnvironmentConfig,
    EstimatorConfig,
    ExperimentConfig,
    GoalMetric,
    NoiseConfig,
    PolicyConfig,
    segment_keys,
)
from bandit_lens.context import CategoricalField, ContextSchema, NumericField, encode_context
from bandit_lens.logstore import LogRecord, LogStore
from bandit_lens.models import LinearRewardModel

TS0 = datetime(2026, 1, 1, tzinfo=timezone.utc)


def make_policy_config(kind="epsilon_greedy", **overrides) -> PolicyConfig:
    base = dict(
        kind=kind,
        epsilon=0.1,
        alpha=1.0,
        mc_samples=10_000,
        ridge_lambda=1.0,
        posterior_noise=1.0,
        probability_floor=0.01,
        probability_seed=20240,
    )
    base.update(overrides)
    return PolicyConfig(**base)


def make_config(
    arms=None,
    schema=None,
    policy=None,
    estimator=None,
    mean_reward=None,
    context_distribution=None,
    noise=None,
    experiment_id="test-exp",
) -> ExperimentConfig:
    """Full config with uniform context distribution and flat ground truth
    unless overridden; keeps hand fixtures short."""
    if arms is None:
        arms = (Arm("a1", "Arm 1", is_baseline=True), Arm("a2", "Arm 2"))
    if schema is None:
        schema = ContextSchema((CategoricalField("country", ("A", "B")),))
    if policy is None:
        policy = make_policy_config()
    if estimator is None:
        estimator = EstimatorConfig(kind="ips", clip=100.0)
    if context_distribution is None:
        context_distribution = {}
        for f in schema.fields:
            if isinstance(f, CategoricalField):
                p = 1.0 / len(f.levels)
                context_distribution[f.name] = {lv: p for lv in f.levels}
            else:
                context_distribution[f.name] = {"min": f.minimum, "max": f.maximum}
    if mean_reward is None:
        mean_reward = {
            key: {a.arm_id: 1.0 for a in arms} for key in segment_keys(schema)
        }
    if noise is None:
        noise = NoiseConfig(kind="lognormal", sigma=0.5)
    return ExperimentConfig(
        experiment_id=experiment_id,
        goal_metric=GoalMetric(name="dollars_spent", units="USD"),
        arms=tuple(arms),
        schema=schema,
        policy=policy,
        estimator=estimator,
        environment=EnvironmentConfig(
            context_distribution=context_distribution,
            mean_reward=mean_reward,
            noise=noise,
        ),
    )


def make_model_with_theta(arm_thetas: dict[str, np.ndarray], ridge_lambda=1.0):
    """Model whose solved weights equal the given vectors exactly
    (A = lambda*I, b = lambda*theta)."""
    arm_ids = tuple(arm_thetas)
    dim = len(next(iter(arm_thetas.values())))
    model = LinearRewardModel(arm_ids, dim, ridge_lambda)
    for arm_id, theta in arm_thetas.items():
        theta = np.asarray(theta, dtype=np.float64)
        model.set_accumulators(arm_id, ridge_lambda * np.eye(dim), ridge_lambda * theta)
    return model


def make_view(config, rows):
    """Build a snapshot from (raw_context, arm_id, propensity, reward) rows."""
    store = LogStore(config)
    for i, (raw, arm_id, propensity, reward) in enumerate(rows):
        store.append(
            LogRecord(
                record_id=f"r{i}",
                ts=TS0,
                context=encode_context(raw, config.schema),
                arm_id=arm_id,
                propensity=propensity,
                reward=reward,
            )
        )
    return store.snapshot()


@pytest.fixture
def two_arm_config():
    return make_config()


@pytest.fixture
def intercept_only_config():
    """No context fields: encoded vector is just the intercept."""
    schema = ContextSchema(())
    return make_config(schema=schema)

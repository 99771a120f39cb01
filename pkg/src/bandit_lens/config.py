"""Experiment configuration: arm catalog, schema, policy, estimator, environment.

Config files are single JSON documents. Parsing is strict in both
directions: unknown keys are a hard error and every field must be present,
so a run is reproducible from the config file alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .context import CategoricalField, ContextSchema, NumericField
from .exceptions import ConfigError

EPSILON_GREEDY = "epsilon_greedy"
UCB = "ucb"
THOMPSON = "thompson"
POLICY_KINDS = (EPSILON_GREEDY, UCB, THOMPSON)

IPS = "ips"
SNIPS = "snips"
DIRECT_METHOD = "direct_method"
DOUBLY_ROBUST = "doubly_robust"
ESTIMATOR_KINDS = (IPS, SNIPS, DIRECT_METHOD, DOUBLY_ROBUST)

GAUSSIAN = "gaussian"
LOGNORMAL = "lognormal"
BERNOULLI_SCALED = "bernoulli_scaled"
NOISE_KINDS = (GAUSSIAN, LOGNORMAL, BERNOULLI_SCALED)

MIN_MC_SAMPLES = 100


@dataclass(frozen=True)
class Arm:
    arm_id: str
    label: str
    is_baseline: bool = False


@dataclass(frozen=True)
class GoalMetric:
    name: str
    units: str


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    epsilon: float
    alpha: float
    mc_samples: int
    ridge_lambda: float
    posterior_noise: float
    probability_floor: float
    probability_seed: int

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind '{self.kind}'")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.alpha < 0.0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.mc_samples < MIN_MC_SAMPLES:
            raise ConfigError(
                f"mc_samples must be >= {MIN_MC_SAMPLES}, got {self.mc_samples}"
            )
        if self.ridge_lambda <= 0.0:
            raise ConfigError(f"ridge_lambda must be > 0, got {self.ridge_lambda}")
        if self.posterior_noise <= 0.0:
            raise ConfigError(
                f"posterior_noise must be > 0, got {self.posterior_noise}"
            )
        if not 0.0 <= self.probability_floor < 1.0:
            raise ConfigError(
                f"probability_floor must be in [0, 1), got {self.probability_floor}"
            )


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str
    clip: float | None

    def __post_init__(self) -> None:
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigError(f"unknown estimator kind '{self.kind}'")
        if self.clip is not None and self.clip < 1.0:
            raise ConfigError(f"clip must be >= 1 or null, got {self.clip}")


@dataclass(frozen=True)
class NoiseConfig:
    kind: str
    sigma: float = 0.0
    scale: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind '{self.kind}'")
        if self.kind in (GAUSSIAN, LOGNORMAL) and self.sigma <= 0.0:
            raise ConfigError(f"{self.kind} noise needs sigma > 0")
        if self.kind == BERNOULLI_SCALED and self.scale <= 0.0:
            raise ConfigError("bernoulli_scaled noise needs scale > 0")


@dataclass(frozen=True)
class EnvironmentConfig:
    """Synthetic environment: context distribution plus ground-truth means.

    ``mean_reward`` is keyed by segment key (categorical fields joined in
    schema order, e.g. ``"country=A|platform=ios"``) then arm_id.
    """

    context_distribution: Mapping[str, Any]
    mean_reward: Mapping[str, Mapping[str, float]]
    noise: NoiseConfig


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    goal_metric: GoalMetric
    arms: tuple[Arm, ...]
    schema: ContextSchema
    policy: PolicyConfig
    estimator: EstimatorConfig
    environment: EnvironmentConfig

    def __post_init__(self) -> None:
        ids = [a.arm_id for a in self.arms]
        if not ids:
            raise ConfigError("arm catalog is empty")
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate arm ids: {ids}")
        baselines = [a for a in self.arms if a.is_baseline]
        if len(baselines) != 1:
            raise ConfigError(
                f"exactly one baseline arm required, found {len(baselines)}"
            )
        k = len(self.arms)
        if self.policy.probability_floor * k > 1.0 + 1e-12:
            raise ConfigError(
                f"probability_floor {self.policy.probability_floor} infeasible "
                f"for {k} arms"
            )
        _validate_environment(self.environment, self.schema, self.arms)

    @property
    def arm_ids(self) -> tuple[str, ...]:
        return tuple(a.arm_id for a in self.arms)

    @property
    def baseline_arm(self) -> Arm:
        return next(a for a in self.arms if a.is_baseline)


def segment_keys(schema: ContextSchema) -> list[str]:
    """All categorical segment keys in deterministic (schema-order) product order."""
    keys = [""]
    for f in schema.categorical_fields:
        keys = [
            (k + "|" if k else "") + f"{f.name}={level}"
            for k in keys
            for level in f.levels
        ]
    return keys


def _validate_environment(
    env: EnvironmentConfig, schema: ContextSchema, arms: tuple[Arm, ...]
) -> None:
    dist = env.context_distribution
    extra = set(dist) - set(schema.field_names)
    if extra:
        raise ConfigError(f"context_distribution has unknown fields: {sorted(extra)}")
    for f in schema.fields:
        if f.name not in dist:
            raise ConfigError(f"context_distribution missing field '{f.name}'")
        spec = dist[f.name]
        if isinstance(f, CategoricalField):
            if set(spec) != set(f.levels):
                raise ConfigError(
                    f"distribution for '{f.name}' must cover exactly levels "
                    f"{list(f.levels)}"
                )
            probs = [float(spec[lv]) for lv in f.levels]
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
                raise ConfigError(
                    f"level probabilities for '{f.name}' must be >= 0 and sum to 1"
                )
        else:
            if set(spec) != {"min", "max"}:
                raise ConfigError(
                    f"numeric distribution for '{f.name}' needs exactly min/max"
                )
            lo, hi = float(spec["min"]), float(spec["max"])
            if lo >= hi or lo < f.minimum or hi > f.maximum:
                raise ConfigError(
                    f"sampling range [{lo}, {hi}] for '{f.name}' must sit inside "
                    f"schema bounds [{f.minimum}, {f.maximum}]"
                )

    expected_keys = segment_keys(schema)
    got_keys = list(env.mean_reward)
    if set(got_keys) != set(expected_keys):
        raise ConfigError(
            f"mean_reward must cover exactly segments {expected_keys}, "
            f"got {sorted(got_keys)}"
        )
    arm_ids = {a.arm_id for a in arms}
    for key, per_arm in env.mean_reward.items():
        if set(per_arm) != arm_ids:
            raise ConfigError(
                f"mean_reward for segment '{key}' must cover exactly arms "
                f"{sorted(arm_ids)}"
            )
        for arm_id, mu in per_arm.items():
            mu = float(mu)
            if not math.isfinite(mu) or mu < 0:
                raise ConfigError(
                    f"mean reward for ({key}, {arm_id}) must be finite and >= 0"
                )
            if env.noise.kind == BERNOULLI_SCALED and mu > env.noise.scale:
                raise ConfigError(
                    f"bernoulli_scaled requires mean <= scale; "
                    f"({key}, {arm_id}) has {mu} > {env.noise.scale}"
                )


# -- strict JSON (de)serialization ------------------------------------------


def _require(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise ConfigError(f"missing key '{key}' in {where}")
    return obj[key]


def _reject_unknown(obj: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_schema(obj: Any) -> ContextSchema:
    _reject_unknown(obj, {"fields"}, "context_schema")
    fields: list[Any] = []
    for i, f in enumerate(_require(obj, "fields", "context_schema")):
        where = f"context_schema.fields[{i}]"
        kind = _require(f, "kind", where)
        if kind == "categorical":
            _reject_unknown(f, {"name", "kind", "levels"}, where)
            fields.append(
                CategoricalField(
                    name=str(_require(f, "name", where)),
                    levels=tuple(str(x) for x in _require(f, "levels", where)),
                )
            )
        elif kind == "numeric":
            _reject_unknown(f, {"name", "kind", "min", "max"}, where)
            fields.append(
                NumericField(
                    name=str(_require(f, "name", where)),
                    minimum=float(_require(f, "min", where)),
                    maximum=float(_require(f, "max", where)),
                )
            )
        else:
            raise ConfigError(f"unknown field kind '{kind}' in {where}")
    return ContextSchema(tuple(fields))


def _parse_noise(obj: Any) -> NoiseConfig:
    kind = _require(obj, "kind", "environment.noise")
    if kind in (GAUSSIAN, LOGNORMAL):
        _reject_unknown(obj, {"kind", "sigma"}, "environment.noise")
        return NoiseConfig(kind=kind, sigma=float(_require(obj, "sigma", "noise")))
    if kind == BERNOULLI_SCALED:
        _reject_unknown(obj, {"kind", "scale"}, "environment.noise")
        return NoiseConfig(kind=kind, scale=float(_require(obj, "scale", "noise")))
    raise ConfigError(f"unknown noise kind '{kind}'")


def parse_config(doc: Mapping[str, Any]) -> ExperimentConfig:
    _reject_unknown(
        doc,
        {
            "experiment_id",
            "goal_metric",
            "arms",
            "context_schema",
            "policy",
            "estimator",
            "environment",
        },
        "config",
    )

    gm = _require(doc, "goal_metric", "config")
    _reject_unknown(gm, {"name", "units"}, "goal_metric")
    goal = GoalMetric(
        name=str(_require(gm, "name", "goal_metric")),
        units=str(_require(gm, "units", "goal_metric")),
    )

    arms = []
    for i, a in enumerate(_require(doc, "arms", "config")):
        where = f"arms[{i}]"
        _reject_unknown(a, {"arm_id", "label", "is_baseline"}, where)
        arms.append(
            Arm(
                arm_id=str(_require(a, "arm_id", where)),
                label=str(_require(a, "label", where)),
                is_baseline=bool(_require(a, "is_baseline", where)),
            )
        )

    schema = _parse_schema(_require(doc, "context_schema", "config"))

    p = _require(doc, "policy", "config")
    _reject_unknown(
        p,
        {
            "kind",
            "epsilon",
            "alpha",
            "mc_samples",
            "ridge_lambda",
            "posterior_noise",
            "probability_floor",
            "probability_seed",
        },
        "policy",
    )
    policy = PolicyConfig(
        kind=str(_require(p, "kind", "policy")),
        epsilon=float(_require(p, "epsilon", "policy")),
        alpha=float(_require(p, "alpha", "policy")),
        mc_samples=int(_require(p, "mc_samples", "policy")),
        ridge_lambda=float(_require(p, "ridge_lambda", "policy")),
        posterior_noise=float(_require(p, "posterior_noise", "policy")),
        probability_floor=float(_require(p, "probability_floor", "policy")),
        probability_seed=int(_require(p, "probability_seed", "policy")),
    )

    e = _require(doc, "estimator", "config")
    _reject_unknown(e, {"kind", "clip"}, "estimator")
    clip_raw = _require(e, "clip", "estimator")
    estimator = EstimatorConfig(
        kind=str(_require(e, "kind", "estimator")),
        clip=None if clip_raw is None else float(clip_raw),
    )

    env_doc = _require(doc, "environment", "config")
    _reject_unknown(
        env_doc, {"context_distribution", "mean_reward", "noise"}, "environment"
    )
    environment = EnvironmentConfig(
        context_distribution={
            k: dict(v)
            for k, v in _require(env_doc, "context_distribution", "environment").items()
        },
        mean_reward={
            seg: {arm: float(mu) for arm, mu in per_arm.items()}
            for seg, per_arm in _require(env_doc, "mean_reward", "environment").items()
        },
        noise=_parse_noise(_require(env_doc, "noise", "environment")),
    )

    return ExperimentConfig(
        experiment_id=str(_require(doc, "experiment_id", "config")),
        goal_metric=goal,
        arms=tuple(arms),
        schema=schema,
        policy=policy,
        estimator=estimator,
        environment=environment,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return parse_config(doc)


def dump_config(config: ExperimentConfig) -> dict[str, Any]:
    """Round-trippable dict with every field explicit."""
    schema_fields: list[dict[str, Any]] = []
    for f in config.schema.fields:
        if isinstance(f, CategoricalField):
            schema_fields.append(
                {"name": f.name, "kind": "categorical", "levels": list(f.levels)}
            )
        else:
            schema_fields.append(
                {"name": f.name, "kind": "numeric", "min": f.minimum, "max": f.maximum}
            )
    noise: dict[str, Any] = {"kind": config.environment.noise.kind}
    if config.environment.noise.kind in (GAUSSIAN, LOGNORMAL):
        noise["sigma"] = config.environment.noise.sigma
    else:
        noise["scale"] = config.environment.noise.scale
    return {
        "experiment_id": config.experiment_id,
        "goal_metric": {
            "name": config.goal_metric.name,
            "units": config.goal_metric.units,
        },
        "arms": [
            {"arm_id": a.arm_id, "label": a.label, "is_baseline": a.is_baseline}
            for a in config.arms
        ],
        "context_schema": {"fields": schema_fields},
        "policy": {
            "kind": config.policy.kind,
            "epsilon": config.policy.epsilon,
            "alpha": config.policy.alpha,
            "mc_samples": config.policy.mc_samples,
            "ridge_lambda": config.policy.ridge_lambda,
            "posterior_noise": config.policy.posterior_noise,
            "probability_floor": config.policy.probability_floor,
            "probability_seed": config.policy.probability_seed,
        },
        "estimator": {"kind": config.estimator.kind, "clip": config.estimator.clip},
        "environment": {
            "context_distribution": {
                k: dict(v) for k, v in config.environment.context_distribution.items()
            },
            "mean_reward": {
                seg: dict(per_arm)
                for seg, per_arm in config.environment.mean_reward.items()
            },
            "noise": noise,
        },
    }


def write_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dump_config(config), indent=2) + "\n")


def default_config() -> ExperimentConfig:
    """Desk-scale price-point experiment with per-segment best arms."""
    schema = ContextSchema(
        (
            CategoricalField("country", ("A", "B")),
            CategoricalField("platform", ("ios", "android")),
        )
    )
    arms = (
        Arm("p099", "$0.99", is_baseline=True),
        Arm("p299", "$2.99"),
        Arm("p599", "$5.99"),
        Arm("p999", "$9.99"),
    )
    mean_reward = {
        "country=A|platform=ios": {"p099": 1.0, "p299": 2.2, "p599": 1.2, "p999": 0.8},
        "country=A|platform=android": {
            "p099": 1.0,
            "p299": 2.0,
            "p599": 1.1,
            "p999": 0.7,
        },
        "country=B|platform=ios": {"p099": 1.1, "p299": 1.3, "p599": 2.6, "p999": 1.0},
        "country=B|platform=android": {
            "p099": 1.1,
            "p299": 1.2,
            "p599": 1.0,
            "p999": 2.8,
        },
    }
    return ExperimentConfig(
        experiment_id="pricing-default",
        goal_metric=GoalMetric(name="dollars_spent", units="USD"),
        arms=arms,
        schema=schema,
        policy=PolicyConfig(
            kind=EPSILON_GREEDY,
            epsilon=0.1,
            alpha=1.0,
            mc_samples=10_000,
            ridge_lambda=1.0,
            posterior_noise=1.0,
            probability_floor=0.01,
            probability_seed=20240,
        ),
        estimator=EstimatorConfig(kind=IPS, clip=100.0),
        environment=EnvironmentConfig(
            context_distribution={
                "country": {"A": 0.5, "B": 0.5},
                "platform": {"ios": 0.5, "android": 0.5},
            },
            mean_reward=mean_reward,
            noise=NoiseConfig(kind=GAUSSIAN, sigma=1.0),
        ),
    )

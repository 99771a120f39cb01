"""Synthetic environment with known ground truth for validating estimators.

Contexts are drawn from a configured distribution; rewards are drawn around
a ground-truth mean table keyed by (categorical segment, arm). Because the
noise transforms are mean-analyzable, the exact expected observed reward is
available for every (segment, arm), which makes the true value of any
frozen policy computable to machine precision on categorical schemas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from itertools import product
from typing import Callable

import numpy as np

from .config import (
    BERNOULLI_SCALED,
    EPSILON_GREEDY,
    GAUSSIAN,
    LOGNORMAL,
    THOMPSON,
    UCB,
    ExperimentConfig,
    segment_keys,
)
from .context import ContextVector, NumericField, encode_context
from .exceptions import ConfigError
from .logstore import LogRecord, LogStore
from .models import LinearRewardModel
from .policies import (
    PolicySnapshot,
    apply_probability_floor,
    policy_from_config,
    posterior_rng,
    tiebreak_argmax,
)

_EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _Phi(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class GroundTruthValue:
    policy_label: str
    value: float
    se: float
    method: str  # "exact" or "monte_carlo"


class Environment:
    """Context generator plus ground-truth reward process."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.schema = config.schema
        self.catalog = config.arms
        self.arm_ids = config.arm_ids
        env = config.environment
        self.noise = env.noise

        cat_fields = self.schema.categorical_fields
        self.numeric_fields = self.schema.numeric_fields
        dist = env.context_distribution

        level_choices = [
            [(f.name, level, float(dist[f.name][level])) for level in f.levels]
            for f in cat_fields
        ]
        self.segment_raws: list[dict[str, str]] = []
        probs = []
        for combo in product(*level_choices) if level_choices else [()]:
            raw = {name: level for name, level, _ in combo}
            p = 1.0
            for _, _, lp in combo:
                p *= lp
            self.segment_raws.append(raw)
            probs.append(p)
        self.segment_probs = np.array(probs) if probs else np.array([1.0])
        self.segment_keys = segment_keys(self.schema)

        k = len(self.arm_ids)
        self.mu = np.empty((len(self.segment_keys), k))
        for s, key in enumerate(self.segment_keys):
            for a, arm_id in enumerate(self.arm_ids):
                self.mu[s, a] = env.mean_reward[key][arm_id]
        # Expected observed reward per (segment, arm), exact under the noise kind.
        self.mean_observed = np.vectorize(self._noise_mean)(self.mu)

        if not self.numeric_fields:
            self.segment_contexts = [
                encode_context(raw, self.schema) for raw in self.segment_raws
            ]
            self.segment_X = np.stack(
                [c.encoded for c in self.segment_contexts]
            )
        else:
            self.segment_contexts = None
            self.segment_X = None
        self.numeric_ranges = {
            f.name: (
                float(dist[f.name]["min"]),
                float(dist[f.name]["max"]),
            )
            for f in self.numeric_fields
        }

    @property
    def enumerable(self) -> bool:
        return not self.numeric_fields

    @property
    def n_segments(self) -> int:
        return len(self.segment_raws)

    def _noise_mean(self, mu: float) -> float:
        if self.noise.kind == GAUSSIAN:
            # E[max(0, N(mu, sigma^2))]
            s = self.noise.sigma
            return mu * _Phi(mu / s) + s * _phi(mu / s)
        return mu  # lognormal and bernoulli_scaled are parameterized mean-exact

    def _reward_transform(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        kind = self.noise.kind
        if kind == GAUSSIAN:
            sigma = self.noise.sigma
            return lambda mu, z: np.maximum(0.0, mu + sigma * z)
        if kind == LOGNORMAL:
            sigma = self.noise.sigma
            shift = 0.5 * sigma * sigma
            return lambda mu, z: mu * np.exp(sigma * z - shift)
        scale = self.noise.scale
        return lambda mu, u: np.where(u * scale < mu, scale, 0.0)

    def _noise_draws(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.noise.kind == BERNOULLI_SCALED:
            return rng.random(n)
        return rng.standard_normal(n)

    def draw_segments(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(self.n_segments, size=n, p=self.segment_probs)

    def draw_context(
        self, rng: np.random.Generator, segment: int
    ) -> ContextVector:
        raw = dict(self.segment_raws[segment])
        for f in self.numeric_fields:
            lo, hi = self.numeric_ranges[f.name]
            raw[f.name] = lo + (hi - lo) * rng.random()
        return encode_context(raw, self.schema)


# -- live probability providers for the training loop ------------------------


class _LiveProbs:
    """Per-round action probabilities for a model that is still learning.

    Keeps score tables per segment so only the updated arm's column is
    recomputed after each fit. Must agree exactly with the corresponding
    PolicySnapshot implementation given the same model state.
    """

    def __init__(self, env: Environment, model: LinearRewardModel, cfg):
        self.model = model
        self.cfg = cfg
        self.kind = cfg.kind
        self.k = len(model.arm_ids)
        self.floor = cfg.probability_floor
        arm_ids = model.arm_ids
        self.lex_perm = np.array(
            sorted(range(self.k), key=lambda i: arm_ids[i]), dtype=np.int64
        )

        if self.kind == EPSILON_GREEDY:
            self.patterns = np.stack(
                [
                    apply_probability_floor(
                        np.full(self.k, cfg.epsilon / self.k)
                        + (1.0 - cfg.epsilon) * np.eye(self.k)[i],
                        self.floor,
                    )
                    for i in range(self.k)
                ]
            )
        elif self.kind == UCB:
            self.patterns = np.stack(
                [
                    apply_probability_floor(np.eye(self.k)[i], self.floor)
                    for i in range(self.k)
                ]
            )

        self.seg_X = env.segment_X if self.kind != THOMPSON else None
        if self.seg_X is not None:
            self.means = self.seg_X @ model.theta_matrix().T
            if self.kind == UCB:
                self.quads = np.stack(
                    [
                        np.einsum(
                            "ij,jk,ik->i", self.seg_X, model.a_inv(a), self.seg_X
                        )
                        for a in arm_ids
                    ],
                    axis=1,
                )

    def probabilities(self, x: np.ndarray, segment: int | None) -> np.ndarray:
        if self.kind == THOMPSON:
            # Delegate to the exact snapshot computation: Thompson rounds are
            # dominated by the Monte Carlo draws, not by these matvecs, and
            # reusing the expressions keeps live and frozen paths identical.
            means = self.model.theta_matrix() @ x
            sds = np.sqrt(
                self.cfg.posterior_noise
                * np.array([x @ self.model.a_inv(a) @ x for a in self.model.arm_ids])
            )
            rng = posterior_rng(self.cfg.probability_seed, x)
            draws = rng.standard_normal((self.cfg.mc_samples, self.k)) * sds + means
            wins = np.bincount(draws.argmax(axis=1), minlength=self.k)
            return apply_probability_floor(wins / self.cfg.mc_samples, self.floor)

        if segment is not None and self.seg_X is not None:
            means = self.means[segment]
            quads = self.quads[segment] if self.kind == UCB else None
        else:
            means = self.model.theta_matrix() @ x
            quads = (
                np.array([x @ self.model.a_inv(a) @ x for a in self.model.arm_ids])
                if self.kind == UCB
                else None
            )

        if self.kind == EPSILON_GREEDY:
            return self.patterns[tiebreak_argmax(means, self.lex_perm)]
        scores = means + self.cfg.alpha * np.sqrt(quads)
        return self.patterns[tiebreak_argmax(scores, self.lex_perm)]

    def note_update(self, arm_index: int) -> None:
        if self.seg_X is None:
            return
        arm_id = self.model.arm_ids[arm_index]
        self.means[:, arm_index] = self.seg_X @ self.model.theta(arm_id)
        if self.kind == UCB:
            self.quads[:, arm_index] = np.einsum(
                "ij,jk,ik->i", self.seg_X, self.model.a_inv(arm_id), self.seg_X
            )


def run_online(
    env: Environment,
    config: ExperimentConfig,
    rounds: int,
    seed: int,
    on_round: Callable | None = None,
) -> tuple[LogStore, PolicySnapshot]:
    """Train the configured policy online for ``rounds`` decisions.

    Per round: draw a context, choose an arm from the live policy's exact
    probability vector, observe a reward from the ground-truth process,
    log the decision with the at-decision-time propensity, then update the
    model. Returns the complete log and the final frozen snapshot.
    """
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    rng = np.random.default_rng(seed)
    model = LinearRewardModel(
        env.arm_ids, env.schema.encoded_width, config.policy.ridge_lambda
    )
    live = _LiveProbs(env, model, config.policy)

    seg_idx = env.draw_segments(rng, rounds).tolist()
    arm_u = rng.random(rounds).tolist()
    noise = env._noise_draws(rng, rounds).tolist()
    transform = env._reward_transform()
    numeric = bool(env.numeric_fields)
    arm_ids = env.arm_ids
    k = len(arm_ids)
    mu_rows = [row.tolist() for row in env.mu]
    seg_contexts = env.segment_contexts
    seg_outer = (
        None
        if numeric
        else [np.outer(c.encoded, c.encoded) for c in seg_contexts]
    )

    store = LogStore(config)
    records = []
    run_tag = f"{config.experiment_id}-{seed}"
    probabilities = live.probabilities
    note_update = live.note_update
    for i in range(rounds):
        seg = seg_idx[i]
        if numeric:
            ctx = env.draw_context(rng, seg)
            probs = probabilities(ctx.encoded, None)
        else:
            ctx = seg_contexts[seg]
            probs = probabilities(ctx.encoded, seg)

        u = arm_u[i]
        acc = 0.0
        a = k - 1
        for j in range(k):
            acc += probs[j]
            if u < acc:
                a = j
                break
        reward = float(transform(mu_rows[seg][a], noise[i]))
        arm_id = arm_ids[a]
        records.append(
            LogRecord(
                record_id=f"{run_tag}-{i}",
                ts=_EPOCH + timedelta(seconds=i),
                context=ctx,
                arm_id=arm_id,
                propensity=float(probs[a]),
                reward=reward,
            )
        )
        if on_round is not None:
            on_round(i, ctx, probs, a, reward)
        if seg_outer is None:
            model.update(arm_id, ctx.encoded, reward)
        else:
            model.update_with_outer(arm_id, seg_outer[seg], ctx.encoded, reward)
        note_update(a)

    for record in records:
        store.append(record)
    snapshot = policy_from_config(config.policy, model.copy(), env.catalog)
    return store, snapshot


def _frozen_draws(
    env: Environment, policy: PolicySnapshot, rounds: int, seed: int
):
    """Vectorized (segments, contexts, arms, propensities, rewards) for a
    policy that no longer learns."""
    rng = np.random.default_rng(seed)
    seg = env.draw_segments(rng, rounds)

    if env.enumerable:
        contexts = [env.segment_contexts[s] for s in seg]
        prob_table = policy.action_probability_matrix(env.segment_X)
        probs = prob_table[seg]
    else:
        contexts = [env.draw_context(rng, int(s)) for s in seg]
        X = np.stack([c.encoded for c in contexts])
        probs = policy.action_probability_matrix(X)

    u = rng.random(rounds)
    cum = np.cumsum(probs, axis=1)
    arm = np.minimum((u[:, None] >= cum).sum(axis=1), probs.shape[1] - 1)
    propensity = probs[np.arange(rounds), arm]
    mu = env.mu[seg, arm]
    rewards = env._reward_transform()(mu, env._noise_draws(rng, rounds))
    return seg, contexts, arm, propensity, rewards


def replay_frozen(
    env: Environment,
    policy: PolicySnapshot,
    config: ExperimentConfig,
    rounds: int,
    seed: int,
) -> LogStore:
    """Log ``rounds`` decisions from a frozen policy (no learning).

    Logged propensities are exactly the entries action_probabilities would
    report, so importance weights against the same policy are exactly 1.
    """
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    _, contexts, arm, propensity, rewards = _frozen_draws(env, policy, rounds, seed)
    store = LogStore(config)
    run_tag = f"{config.experiment_id}-frozen-{seed}"
    arm_ids = env.arm_ids
    for i in range(rounds):
        store.append(
            LogRecord(
                record_id=f"{run_tag}-{i}",
                ts=_EPOCH + timedelta(seconds=i),
                context=contexts[i],
                arm_id=arm_ids[int(arm[i])],
                propensity=float(propensity[i]),
                reward=float(rewards[i]),
            )
        )
    return store


def simulate_value(
    env: Environment, policy: PolicySnapshot, rounds: int, seed: int
) -> tuple[float, float]:
    """Empirical (mean, standard error) of an online run of a frozen policy."""
    *_, rewards = _frozen_draws(env, policy, rounds, seed)
    mean = float(rewards.mean())
    se = float(rewards.std(ddof=1) / math.sqrt(rounds)) if rounds > 1 else 0.0
    return mean, se


def true_policy_value(
    env: Environment,
    policy: PolicySnapshot,
    mc_contexts: int = 100_000,
    seed: int = 0,
) -> GroundTruthValue:
    """Exact expected reward of a frozen policy under the environment.

    With a purely categorical schema the expectation is an exact finite
    sum over segments; otherwise contexts are sampled and a Monte Carlo
    standard error is reported.
    """
    if env.enumerable:
        prob_table = policy.action_probability_matrix(env.segment_X)
        per_segment = (prob_table * env.mean_observed).sum(axis=1)
        value = float(env.segment_probs @ per_segment)
        return GroundTruthValue(policy.kind, value, 0.0, "exact")

    rng = np.random.default_rng(seed)
    seg = env.draw_segments(rng, mc_contexts)
    contexts = [env.draw_context(rng, int(s)) for s in seg]
    X = np.stack([c.encoded for c in contexts])
    probs = policy.action_probability_matrix(X)
    per_context = (probs * env.mean_observed[seg]).sum(axis=1)
    value = float(per_context.mean())
    se = float(per_context.std(ddof=1) / math.sqrt(mc_contexts))
    return GroundTruthValue(policy.kind, value, se, "monte_carlo")

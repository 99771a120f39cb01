"""Frozen decision policies and their exact per-context action probabilities.

Every policy can report the full probability vector over the arm catalog
for any context. That vector is what gets logged as the propensity at
decision time and what later fills the importance-weight denominators, so
it must be exact, reproducible, and bounded away from zero in logging mode.

Thompson sampling has no closed-form probabilities; they are estimated by
Monte Carlo over posterior draws with a seed derived deterministically from
(policy seed, context), which keeps the whole policy a pure function.
"""

from __future__ import annotations

import abc
import hashlib
import json
from pathlib import Path

import numpy as np

from .config import (
    EPSILON_GREEDY,
    MIN_MC_SAMPLES,
    THOMPSON,
    UCB,
    Arm,
    ExperimentConfig,
    PolicyConfig,
)
from .context import as_encoded
from .exceptions import ConfigError
from .models import LinearRewardModel

SNAPSHOT_SCHEMA_VERSION = "1"


def apply_probability_floor(probs: np.ndarray, floor: float) -> np.ndarray:
    """Clamp entries up to ``floor`` and rescale the rest; sum stays 1.

    Entries below the floor are pinned to exactly ``floor`` and the
    remaining mass is scaled down proportionally. Rescaling can push a
    previously-safe entry under the floor, so iterate to a fixpoint
    (at most K passes). Requires floor * K <= 1.
    """
    k = len(probs)
    if floor <= 0.0:
        return probs
    if floor * k > 1.0 + 1e-12:
        raise ConfigError(f"probability floor {floor} infeasible for {k} arms")
    out = probs.astype(np.float64).copy()
    pinned = np.zeros(k, dtype=bool)
    for _ in range(k):
        low = ~pinned & (out < floor)
        if not low.any():
            break
        pinned |= low
        out[pinned] = floor
        free = ~pinned
        budget = 1.0 - floor * pinned.sum()
        free_mass = out[free].sum()
        out[free] *= budget / free_mass
    return out


def tiebreak_argmax(scores: np.ndarray, lex_perm: np.ndarray) -> int:
    """Index of the max score; exact ties go to the lexicographically
    smallest arm_id. ``lex_perm`` lists arm indices in arm_id order, so a
    first-max argmax over the permuted scores lands on the right arm."""
    return int(lex_perm[int(np.argmax(scores[lex_perm]))])


def tiebreak_argmax_rows(scores: np.ndarray, lex_perm: np.ndarray) -> np.ndarray:
    return lex_perm[np.argmax(scores[:, lex_perm], axis=1)]


def posterior_rng(seed: int, x: np.ndarray) -> np.random.Generator:
    """Generator keyed by (policy seed, context bytes).

    Makes Monte Carlo action probabilities a pure function of the policy
    and the context: stable across calls, processes, and platforms.
    """
    h = hashlib.blake2b(digest_size=16)
    h.update(int(seed).to_bytes(8, "little", signed=True))
    h.update(np.ascontiguousarray(x, dtype=np.float64).tobytes())
    return np.random.default_rng(int.from_bytes(h.digest(), "little"))


class PolicySnapshot(abc.ABC):
    """Immutable policy over a fixed arm catalog; safe to share across threads."""

    kind: str

    def __init__(self, catalog: tuple[Arm, ...]):
        self.catalog = catalog
        self.arm_ids = tuple(a.arm_id for a in catalog)
        self.lex_perm = np.array(
            sorted(range(len(catalog)), key=lambda i: self.arm_ids[i]),
            dtype=np.int64,
        )

    @property
    def n_arms(self) -> int:
        return len(self.catalog)

    @property
    def model(self) -> LinearRewardModel | None:
        return None

    @abc.abstractmethod
    def action_probabilities(self, x) -> np.ndarray:
        """Probability vector over the catalog; sums to 1 within 1e-9."""

    def action_probability_matrix(self, X: np.ndarray) -> np.ndarray:
        """Row-wise probabilities for a batch of encoded contexts.

        Default implementation groups identical rows so repeated contexts
        (the common case for categorical schemas) are evaluated once.
        """
        X = np.asarray(X, dtype=np.float64)
        uniq, inverse = np.unique(X, axis=0, return_inverse=True)
        per_row = np.stack([self.action_probabilities(row) for row in uniq])
        return per_row[np.asarray(inverse).reshape(-1)]


class _ModelPolicy(PolicySnapshot):
    """Shared plumbing for policies backed by a LinearRewardModel."""

    def __init__(
        self,
        catalog: tuple[Arm, ...],
        model: LinearRewardModel,
        probability_floor: float,
    ):
        super().__init__(catalog)
        if tuple(model.arm_ids) != self.arm_ids:
            raise ConfigError("model arms do not match the catalog")
        self._model = model
        self.probability_floor = float(probability_floor)
        model.finalize()

    @property
    def model(self) -> LinearRewardModel:
        return self._model


class EpsilonGreedyPolicy(_ModelPolicy):
    kind = EPSILON_GREEDY

    def __init__(self, catalog, model, epsilon: float, probability_floor: float):
        super().__init__(catalog, model, probability_floor)
        if not 0.0 <= epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in [0, 1], got {epsilon}")
        self.epsilon = float(epsilon)
        # One floored pattern per possible argmax.
        k = self.n_arms
        self._patterns = np.empty((k, k))
        for i in range(k):
            p = np.full(k, self.epsilon / k)
            p[i] += 1.0 - self.epsilon
            self._patterns[i] = apply_probability_floor(p, self.probability_floor)

    def action_probabilities(self, x) -> np.ndarray:
        means = self._model.theta_matrix() @ as_encoded(x)
        return self._patterns[tiebreak_argmax(means, self.lex_perm)].copy()

    def action_probability_matrix(self, X: np.ndarray) -> np.ndarray:
        means = self._model.predict_matrix(X)
        return self._patterns[tiebreak_argmax_rows(means, self.lex_perm)]


class UcbPolicy(_ModelPolicy):
    """Deterministic argmax of mean + alpha * width, then floored.

    Pure UCB gives zero propensity to non-chosen arms, which would make
    importance weighting undefined; the floor keeps every arm evaluable.
    """

    kind = UCB

    def __init__(self, catalog, model, alpha: float, probability_floor: float):
        super().__init__(catalog, model, probability_floor)
        if alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {alpha}")
        self.alpha = float(alpha)
        k = self.n_arms
        self._patterns = np.stack(
            [apply_probability_floor(np.eye(k)[i], probability_floor) for i in range(k)]
        )

    def _scores(self, x: np.ndarray) -> np.ndarray:
        means = self._model.theta_matrix() @ x
        widths = np.array([self._model.width(a, x) for a in self.arm_ids])
        return means + self.alpha * widths

    def action_probabilities(self, x) -> np.ndarray:
        v = as_encoded(x)
        return self._patterns[tiebreak_argmax(self._scores(v), self.lex_perm)].copy()

    def action_probability_matrix(self, X: np.ndarray) -> np.ndarray:
        scores = self._model.predict_matrix(X) + self.alpha * self._model.width_matrix(X)
        return self._patterns[tiebreak_argmax_rows(scores, self.lex_perm)]


class ThompsonSamplingPolicy(_ModelPolicy):
    """Posterior-sampling policy with Monte Carlo propensities.

    For a context x the score of arm a is x^T theta_a with posterior
    N(m_a, s_a^2) where m_a = x^T theta_a and s_a^2 = noise * x^T A_a^-1 x;
    sampling these scalar projections is distributionally identical to
    sampling full parameter vectors and projecting. Win counts over
    mc_samples draws estimate the selection probabilities.
    """

    kind = THOMPSON

    def __init__(
        self,
        catalog,
        model,
        mc_samples: int,
        posterior_noise: float,
        probability_floor: float,
        probability_seed: int,
    ):
        super().__init__(catalog, model, probability_floor)
        if mc_samples < MIN_MC_SAMPLES:
            raise ConfigError(
                f"mc_samples must be >= {MIN_MC_SAMPLES}, got {mc_samples}"
            )
        if posterior_noise <= 0:
            raise ConfigError(f"posterior_noise must be > 0, got {posterior_noise}")
        self.mc_samples = int(mc_samples)
        self.posterior_noise = float(posterior_noise)
        self.probability_seed = int(probability_seed)

    def action_probabilities(self, x) -> np.ndarray:
        v = as_encoded(x)
        means = self._model.theta_matrix() @ v
        sds = np.sqrt(
            self.posterior_noise
            * np.array([v @ self._model.a_inv(a) @ v for a in self.arm_ids])
        )
        rng = posterior_rng(self.probability_seed, v)
        draws = rng.standard_normal((self.mc_samples, self.n_arms)) * sds + means
        wins = np.bincount(draws.argmax(axis=1), minlength=self.n_arms)
        return apply_probability_floor(wins / self.mc_samples, self.probability_floor)


class ConstantArmPolicy(PolicySnapshot):
    """Probability 1 on a single arm for every context."""

    kind = "constant"

    def __init__(self, catalog: tuple[Arm, ...], arm_id: str):
        super().__init__(catalog)
        if arm_id not in self.arm_ids:
            raise ConfigError(f"unknown arm_id '{arm_id}'")
        self.arm_id = arm_id
        self._probs = np.zeros(self.n_arms)
        self._probs[self.arm_ids.index(arm_id)] = 1.0
        self._probs.setflags(write=False)

    def action_probabilities(self, x) -> np.ndarray:
        return self._probs.copy()

    def action_probability_matrix(self, X: np.ndarray) -> np.ndarray:
        return np.tile(self._probs, (len(X), 1))


def policy_from_config(
    policy_cfg: PolicyConfig,
    model: LinearRewardModel,
    catalog: tuple[Arm, ...],
) -> PolicySnapshot:
    if policy_cfg.kind == EPSILON_GREEDY:
        return EpsilonGreedyPolicy(
            catalog, model, policy_cfg.epsilon, policy_cfg.probability_floor
        )
    if policy_cfg.kind == UCB:
        return UcbPolicy(catalog, model, policy_cfg.alpha, policy_cfg.probability_floor)
    if policy_cfg.kind == THOMPSON:
        return ThompsonSamplingPolicy(
            catalog,
            model,
            policy_cfg.mc_samples,
            policy_cfg.posterior_noise,
            policy_cfg.probability_floor,
            policy_cfg.probability_seed,
        )
    raise ConfigError(f"unknown policy kind '{policy_cfg.kind}'")


def clone_with_model(
    policy: PolicySnapshot, model: LinearRewardModel
) -> PolicySnapshot:
    """Same kind and hyperparameters over a different fitted model."""
    if isinstance(policy, EpsilonGreedyPolicy):
        return EpsilonGreedyPolicy(
            policy.catalog, model, policy.epsilon, policy.probability_floor
        )
    if isinstance(policy, UcbPolicy):
        return UcbPolicy(policy.catalog, model, policy.alpha, policy.probability_floor)
    if isinstance(policy, ThompsonSamplingPolicy):
        return ThompsonSamplingPolicy(
            policy.catalog,
            model,
            policy.mc_samples,
            policy.posterior_noise,
            policy.probability_floor,
            policy.probability_seed,
        )
    raise ConfigError(f"policy kind '{policy.kind}' has no reward model to replace")


def choose_arm(
    policy: PolicySnapshot, x, rng: np.random.Generator | int
) -> tuple[str, float]:
    """Sample an arm; the returned propensity is the exact vector entry."""
    rng = np.random.default_rng(rng)
    probs = policy.action_probabilities(x)
    u = rng.random()
    acc = 0.0
    idx = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            idx = i
            break
    return policy.arm_ids[idx], float(probs[idx])


# -- snapshot persistence ----------------------------------------------------


def save_snapshot(policy: PolicySnapshot, path: str | Path) -> None:
    model = policy.model
    if model is None:
        raise ConfigError("only model-backed policies can be saved")
    doc: dict = {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "kind": policy.kind,
        "arm_ids": list(policy.arm_ids),
        "dim": model.dim,
        "ridge_lambda": model.ridge_lambda,
        "probability_floor": policy.probability_floor,  # type: ignore[attr-defined]
        "arms": {
            a: {
                "A": model.accumulators(a)[0].tolist(),
                "b": model.accumulators(a)[1].tolist(),
            }
            for a in policy.arm_ids
        },
    }
    if isinstance(policy, EpsilonGreedyPolicy):
        doc["epsilon"] = policy.epsilon
    elif isinstance(policy, UcbPolicy):
        doc["alpha"] = policy.alpha
    elif isinstance(policy, ThompsonSamplingPolicy):
        doc["mc_samples"] = policy.mc_samples
        doc["posterior_noise"] = policy.posterior_noise
        doc["probability_seed"] = policy.probability_seed
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_snapshot(path: str | Path, config: ExperimentConfig) -> PolicySnapshot:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"snapshot file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"snapshot file {path} is not valid JSON: {e}") from None
    if doc.get("schema_version") != SNAPSHOT_SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported snapshot schema_version {doc.get('schema_version')!r}"
        )
    if tuple(doc["arm_ids"]) != config.arm_ids:
        raise ConfigError("snapshot arms do not match the config catalog")
    if int(doc["dim"]) != config.schema.encoded_width:
        raise ConfigError(
            f"snapshot dim {doc['dim']} does not match schema width "
            f"{config.schema.encoded_width}"
        )
    if doc["kind"] != config.policy.kind:
        raise ConfigError(
            f"snapshot policy kind '{doc['kind']}' does not match config "
            f"'{config.policy.kind}'"
        )

    model = LinearRewardModel(
        config.arm_ids, int(doc["dim"]), float(doc["ridge_lambda"])
    )
    for arm_id in config.arm_ids:
        entry = doc["arms"][arm_id]
        model.set_accumulators(
            arm_id, np.array(entry["A"], dtype=np.float64), np.array(entry["b"])
        )

    floor = float(doc["probability_floor"])
    if doc["kind"] == EPSILON_GREEDY:
        return EpsilonGreedyPolicy(config.arms, model, float(doc["epsilon"]), floor)
    if doc["kind"] == UCB:
        return UcbPolicy(config.arms, model, float(doc["alpha"]), floor)
    return ThompsonSamplingPolicy(
        config.arms,
        model,
        int(doc["mc_samples"]),
        float(doc["posterior_noise"]),
        floor,
        int(doc["probability_seed"]),
    )

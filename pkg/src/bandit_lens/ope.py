"""Off-policy estimators of counterfactual policy value from logged data.

All estimators take an immutable LogView and a frozen target policy. The
importance-weight denominator is always the propensity recorded at decision
time, never a recomputed one: the recorded value is exact, while
recomputation under a policy that was still learning is ill-defined.

Standard errors come from the sample standard deviation of the per-record
contributions; they are the normal-approximation uncertainty an operator
should see next to every number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DIRECT_METHOD, DOUBLY_ROBUST, IPS, SNIPS
from .exceptions import EstimatorError
from .logstore import LogView
from .models import LinearRewardModel
from .policies import PolicySnapshot

ON_POLICY = "on_policy"


@dataclass(frozen=True)
class ValueEstimate:
    kind: str
    point: float
    se: float
    n: int
    clipped_fraction: float = 0.0


def _se_of_mean(terms: np.ndarray) -> float:
    n = len(terms)
    if n < 2:
        return 0.0
    return float(terms.std(ddof=1) / math.sqrt(n))


def _check_inputs(view: LogView, target: PolicySnapshot) -> None:
    if view.n == 0:
        raise EstimatorError("empty log")
    if tuple(target.arm_ids) != tuple(view.arm_ids):
        raise EstimatorError(
            f"target catalog {list(target.arm_ids)} does not match "
            f"log catalog {list(view.arm_ids)}"
        )


def _weights(
    view: LogView, target: PolicySnapshot, clip: float | None
) -> tuple[np.ndarray, float]:
    """Importance weights target(a_i|x_i) / logged propensity, optionally capped."""
    probs = target.action_probability_matrix(view.X)
    pi_target = probs[np.arange(view.n), view.arm_index]
    raw = pi_target / view.propensity
    if clip is None:
        return raw, 0.0
    clipped_fraction = float((raw > clip).mean())
    return np.minimum(raw, clip), clipped_fraction


def on_policy_value(view: LogView) -> ValueEstimate:
    """Directly observed value of the logging policy: the mean logged reward."""
    if view.n == 0:
        raise EstimatorError("empty log")
    return ValueEstimate(
        kind=ON_POLICY,
        point=float(view.reward.mean()),
        se=_se_of_mean(view.reward),
        n=view.n,
    )


def ips(
    view: LogView, target: PolicySnapshot, clip: float | None = None
) -> ValueEstimate:
    """Inverse propensity scoring: mean of reweighted logged rewards.

    Each record contributes w_i * r_i with w_i the probability ratio of the
    logged action under the target versus the logging policy. Unbiased when
    propensities are exact and uncapped; the cap trades bias for variance
    and is reported via clipped_fraction.
    """
    _check_inputs(view, target)
    w, clipped_fraction = _weights(view, target, clip)
    terms = w * view.reward
    return ValueEstimate(
        kind=IPS,
        point=float(terms.mean()),
        se=_se_of_mean(terms),
        n=view.n,
        clipped_fraction=clipped_fraction,
    )


def snips(
    view: LogView, target: PolicySnapshot, clip: float | None = None
) -> ValueEstimate:
    """Self-normalized IPS: sum(w r) / sum(w). Exact for constant rewards."""
    _check_inputs(view, target)
    w, clipped_fraction = _weights(view, target, clip)
    w_sum = float(w.sum())
    if w_sum <= 0.0:
        raise EstimatorError("no overlap: all importance weights are zero")
    point = float((w * view.reward).sum() / w_sum)
    # Linearized influence of the ratio estimator.
    influence = w * (view.reward - point) / (w_sum / view.n)
    return ValueEstimate(
        kind=SNIPS,
        point=point,
        se=_se_of_mean(influence),
        n=view.n,
        clipped_fraction=clipped_fraction,
    )


def direct_method(
    view: LogView, target: PolicySnapshot, reward_model: LinearRewardModel
) -> ValueEstimate:
    """Model-based estimate: expected model reward under the target policy.

    Low variance but inherits any bias of the reward model; exempt from
    coverage guarantees when the model class cannot realize the truth.
    """
    _check_inputs(view, target)
    probs = target.action_probability_matrix(view.X)
    mu_hat = reward_model.predict_matrix(view.X)
    terms = (probs * mu_hat).sum(axis=1)
    return ValueEstimate(
        kind=DIRECT_METHOD,
        point=float(terms.mean()),
        se=_se_of_mean(terms),
        n=view.n,
    )


def doubly_robust(
    view: LogView,
    target: PolicySnapshot,
    reward_model: LinearRewardModel,
    clip: float | None = None,
) -> ValueEstimate:
    """Direct method plus an importance-weighted residual correction.

    Degenerates to IPS under a zero model and to the direct method when the
    model is perfect on noiseless data; consistent if either the model or
    the propensities are right.
    """
    _check_inputs(view, target)
    probs = target.action_probability_matrix(view.X)
    mu_hat = reward_model.predict_matrix(view.X)
    dm_terms = (probs * mu_hat).sum(axis=1)
    w, clipped_fraction = _weights(view, target, clip)
    mu_logged = mu_hat[np.arange(view.n), view.arm_index]
    terms = dm_terms + w * (view.reward - mu_logged)
    return ValueEstimate(
        kind=DOUBLY_ROBUST,
        point=float(terms.mean()),
        se=_se_of_mean(terms),
        n=view.n,
        clipped_fraction=clipped_fraction,
    )


def fit_reward_model(view: LogView, ridge_lambda: float = 1.0) -> LinearRewardModel:
    """Plain per-arm ridge fit on the view, for direct-method style estimates."""
    model = LinearRewardModel(view.arm_ids, view.X.shape[1], ridge_lambda)
    for idx, arm_id in enumerate(view.arm_ids):
        mask = view.arm_index == idx
        if mask.any():
            model.update_batch(arm_id, view.X[mask], view.reward[mask])
    model.finalize()
    return model

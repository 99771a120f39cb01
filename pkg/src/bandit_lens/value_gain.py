"""Counterfactual ablations and the value-gain metric.

The gain for an ablation is the logging policy's value minus the estimated
value of a counterfactual policy that is the same system with components
removed: every non-baseline arm, a single arm, or a context field. The
logging policy's own value is directly observed (mean logged reward); only
the counterfactual side needs an off-policy estimator.

Construction of each counterfactual:
 - baseline_only: deterministic policy putting probability 1 on the
   baseline arm in every context.
 - remove_arm: same trained model and decision rule; the removed arm's
   probability is zeroed and the rest renormalized per context. The model
   is intentionally not retrained: logged data cannot faithfully replay
   how the other arms' data would have changed.
 - remove_context_field: the reward model is refit on the logged data with
   the field's encoded components zeroed, and the same policy rule is
   instantiated over the refit model; incoming contexts are blinded to the
   field as well, so confidence widths also behave as if it never existed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DIRECT_METHOD, DOUBLY_ROBUST, IPS, SNIPS, EstimatorConfig
from .context import as_encoded
from .exceptions import AblationError
from .logstore import LogView
from .models import LinearRewardModel
from .ope import (
    ValueEstimate,
    direct_method,
    doubly_robust,
    fit_reward_model,
    ips,
    on_policy_value,
    snips,
)
from .policies import ConstantArmPolicy, PolicySnapshot, clone_with_model

IDENTITY = "identity"
BASELINE_ONLY = "baseline_only"
REMOVE_ARM = "remove_arm"
REMOVE_CONTEXT_FIELD = "remove_context_field"
ABLATION_KINDS = (IDENTITY, BASELINE_ONLY, REMOVE_ARM, REMOVE_CONTEXT_FIELD)


@dataclass(frozen=True)
class AblationSpec:
    kind: str
    arm_id: str | None = None
    field_name: str | None = None
    estimator: str | None = None  # None = experiment default

    def __post_init__(self) -> None:
        if self.kind not in ABLATION_KINDS:
            raise AblationError(f"unknown ablation kind '{self.kind}'")
        if self.kind == REMOVE_ARM and not self.arm_id:
            raise AblationError("remove_arm needs an arm_id")
        if self.kind == REMOVE_CONTEXT_FIELD and not self.field_name:
            raise AblationError("remove_context_field needs a field_name")
        if self.kind in (IDENTITY, BASELINE_ONLY) and (self.arm_id or self.field_name):
            raise AblationError(f"{self.kind} takes no arm_id or field_name")

    def validate_against(self, view: LogView) -> None:
        if self.kind == REMOVE_ARM and self.arm_id not in view.arm_ids:
            raise AblationError(f"unknown arm_id '{self.arm_id}'")
        if (
            self.kind == REMOVE_CONTEXT_FIELD
            and self.field_name not in view.schema.field_names
        ):
            raise AblationError(f"unknown context field '{self.field_name}'")

    def label(self) -> str:
        if self.kind == REMOVE_ARM:
            return f"remove_arm({self.arm_id})"
        if self.kind == REMOVE_CONTEXT_FIELD:
            return f"remove_context_field({self.field_name})"
        return self.kind


@dataclass(frozen=True)
class ValueGainReport:
    spec: AblationSpec
    v_pi: ValueEstimate
    v_pibar: ValueEstimate
    gain: float
    gain_se: float
    relative_uplift: float | None  # None when v_pibar is not positive

    @property
    def relative_uplift_defined(self) -> bool:
        return self.relative_uplift is not None


class ArmRemovedPolicy(PolicySnapshot):
    """Wraps a policy, zeroing one arm's probability and renormalizing."""

    kind = "arm_removed"

    def __init__(self, inner: PolicySnapshot, arm_id: str):
        super().__init__(inner.catalog)
        if arm_id not in self.arm_ids:
            raise AblationError(f"unknown arm_id '{arm_id}'")
        if len(self.arm_ids) < 2:
            raise AblationError("removing the only arm leaves no policy")
        self.inner = inner
        self.removed_arm_id = arm_id
        self._removed_idx = self.arm_ids.index(arm_id)

    @property
    def model(self):
        return self.inner.model

    def _renormalize(self, probs: np.ndarray) -> np.ndarray:
        probs = probs.copy()
        probs[..., self._removed_idx] = 0.0
        total = probs.sum(axis=-1, keepdims=True)
        if np.any(total <= 0.0):
            raise AblationError(
                f"no surviving support after removing '{self.removed_arm_id}'"
            )
        return probs / total

    def action_probabilities(self, x) -> np.ndarray:
        return self._renormalize(self.inner.action_probabilities(x))

    def action_probability_matrix(self, X: np.ndarray) -> np.ndarray:
        return self._renormalize(self.inner.action_probability_matrix(X))


class FieldBlindPolicy(PolicySnapshot):
    """Policy over a refit model that never sees one context field."""

    kind = "field_blind"

    def __init__(self, inner: PolicySnapshot, field_name: str, zero_slice: slice):
        super().__init__(inner.catalog)
        self.inner = inner
        self.field_name = field_name
        self._zero_slice = zero_slice

    @property
    def model(self):
        return self.inner.model

    def _blind(self, X: np.ndarray) -> np.ndarray:
        X = np.array(X, dtype=np.float64, copy=True)
        X[..., self._zero_slice] = 0.0
        return X

    def action_probabilities(self, x) -> np.ndarray:
        return self.inner.action_probabilities(self._blind(as_encoded(x)))

    def action_probability_matrix(self, X: np.ndarray) -> np.ndarray:
        return self.inner.action_probability_matrix(self._blind(X))


def build_ablated_policy(
    policy: PolicySnapshot, view: LogView, spec: AblationSpec
) -> PolicySnapshot:
    spec.validate_against(view)

    if spec.kind == IDENTITY:
        return policy

    if spec.kind == BASELINE_ONLY:
        baseline = next(a for a in policy.catalog if a.is_baseline)
        return ConstantArmPolicy(policy.catalog, baseline.arm_id)

    if spec.kind == REMOVE_ARM:
        return ArmRemovedPolicy(policy, spec.arm_id)

    # remove_context_field: refit the reward model on blinded encodings. The
    # zeroed components contribute nothing to the accumulators, so their
    # weights are exactly zero and predictions ignore the field entirely.
    model = policy.model
    if model is None:
        raise AblationError(
            f"policy kind '{policy.kind}' has no reward model to refit"
        )
    zero_slice = view.schema.encoded_slice(spec.field_name)
    X = np.array(view.X, copy=True)
    X[:, zero_slice] = 0.0
    refit = LinearRewardModel(view.arm_ids, X.shape[1], model.ridge_lambda)
    for idx, arm_id in enumerate(view.arm_ids):
        mask = view.arm_index == idx
        if mask.any():
            refit.update_batch(arm_id, X[mask], view.reward[mask])
    refit.finalize()
    return FieldBlindPolicy(clone_with_model(policy, refit), spec.field_name, zero_slice)


def _estimate_counterfactual(
    view: LogView,
    policy: PolicySnapshot,
    target: PolicySnapshot,
    estimator_kind: str,
    clip: float | None,
) -> ValueEstimate:
    if estimator_kind == IPS:
        return ips(view, target, clip)
    if estimator_kind == SNIPS:
        return snips(view, target, clip)
    ridge = policy.model.ridge_lambda if policy.model is not None else 1.0
    reward_model = fit_reward_model(view, ridge)
    if estimator_kind == DIRECT_METHOD:
        return direct_method(view, target, reward_model)
    if estimator_kind == DOUBLY_ROBUST:
        return doubly_robust(view, target, reward_model, clip)
    raise AblationError(f"unknown estimator kind '{estimator_kind}'")


def value_gain(
    view: LogView,
    policy: PolicySnapshot,
    spec: AblationSpec,
    estimator_cfg: EstimatorConfig,
) -> ValueGainReport:
    """Gain of the logging policy over the ablated counterfactual.

    v_pi is the directly observed on-policy value. For the identity spec
    the counterfactual IS the logging policy, whose value is directly
    observed too, so the gain is exactly zero with no estimator noise.
    """
    v_pi = on_policy_value(view)

    if spec.kind == IDENTITY:
        v_pibar = v_pi
        gain, gain_se = 0.0, 0.0
    else:
        target = build_ablated_policy(policy, view, spec)
        v_pibar = _estimate_counterfactual(
            view, policy, target, spec.estimator or estimator_cfg.kind,
            estimator_cfg.clip,
        )
        gain = v_pi.point - v_pibar.point
        gain_se = math.hypot(v_pi.se, v_pibar.se)

    relative = gain / v_pibar.point if v_pibar.point > 0.0 else None
    return ValueGainReport(
        spec=spec,
        v_pi=v_pi,
        v_pibar=v_pibar,
        gain=gain,
        gain_se=gain_se,
        relative_uplift=relative,
    )

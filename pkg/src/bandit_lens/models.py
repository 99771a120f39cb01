"""Per-arm linear reward models with exact ridge accumulators.

Each arm keeps a design accumulator A (initialized to lambda * I) and a
response accumulator b. The weights theta = A^-1 b are always recomputable
exactly from (A, b); caches are invalidated on update, never trusted
across one.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .context import as_encoded


class LinearRewardModel:
    def __init__(
        self, arm_ids: Sequence[str], dim: int, ridge_lambda: float = 1.0
    ):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if ridge_lambda <= 0:
            raise ValueError(f"ridge_lambda must be > 0, got {ridge_lambda}")
        self.arm_ids = tuple(arm_ids)
        self.dim = dim
        self.ridge_lambda = float(ridge_lambda)
        self._A = {a: ridge_lambda * np.eye(dim) for a in self.arm_ids}
        self._b = {a: np.zeros(dim) for a in self.arm_ids}
        self._theta: dict[str, np.ndarray] = {}
        self._a_inv: dict[str, np.ndarray] = {}

    def copy(self) -> "LinearRewardModel":
        clone = LinearRewardModel(self.arm_ids, self.dim, self.ridge_lambda)
        clone._A = {a: m.copy() for a, m in self._A.items()}
        clone._b = {a: v.copy() for a, v in self._b.items()}
        return clone

    def accumulators(self, arm_id: str) -> tuple[np.ndarray, np.ndarray]:
        return self._A[arm_id].copy(), self._b[arm_id].copy()

    def set_accumulators(self, arm_id: str, A: np.ndarray, b: np.ndarray) -> None:
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if A.shape != (self.dim, self.dim) or b.shape != (self.dim,):
            raise ValueError("accumulator shape mismatch")
        self._A[arm_id] = A.copy()
        self._b[arm_id] = b.copy()
        self._invalidate(arm_id)

    def _invalidate(self, arm_id: str) -> None:
        self._theta.pop(arm_id, None)
        self._a_inv.pop(arm_id, None)

    def update(self, arm_id: str, x, reward: float) -> None:
        """Rank-one update for one arm; other arms untouched."""
        if arm_id not in self._A:
            raise KeyError(f"unknown arm_id '{arm_id}'")
        v = as_encoded(x)
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite context vector")
        if not math.isfinite(reward):
            raise ValueError("non-finite reward")
        self._A[arm_id] += np.outer(v, v)
        self._b[arm_id] += reward * v
        self._invalidate(arm_id)

    def update_with_outer(
        self, arm_id: str, outer_xx: np.ndarray, x: np.ndarray, reward: float
    ) -> None:
        """Rank-one update with a precomputed outer product.

        Skips validation: for hot loops over contexts that were validated
        once up front. ``outer_xx`` must equal ``np.outer(x, x)``.
        """
        self._A[arm_id] += outer_xx
        self._b[arm_id] += reward * x
        self._invalidate(arm_id)

    def update_batch(self, arm_id: str, X: np.ndarray, rewards: np.ndarray) -> None:
        if arm_id not in self._A:
            raise KeyError(f"unknown arm_id '{arm_id}'")
        X = np.asarray(X, dtype=np.float64)
        rewards = np.asarray(rewards, dtype=np.float64)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(rewards))):
            raise ValueError("non-finite batch update")
        if len(X) == 0:
            return
        self._A[arm_id] += X.T @ X
        self._b[arm_id] += X.T @ rewards
        self._invalidate(arm_id)

    def theta(self, arm_id: str) -> np.ndarray:
        if arm_id not in self._theta:
            self._theta[arm_id] = np.linalg.solve(self._A[arm_id], self._b[arm_id])
        return self._theta[arm_id]

    def a_inv(self, arm_id: str) -> np.ndarray:
        if arm_id not in self._a_inv:
            self._a_inv[arm_id] = np.linalg.inv(self._A[arm_id])
        return self._a_inv[arm_id]

    def theta_matrix(self) -> np.ndarray:
        """Stacked weights, one row per arm in catalog order."""
        return np.stack([self.theta(a) for a in self.arm_ids])

    def predict_mean(self, arm_id: str, x) -> float:
        return float(self.theta(arm_id) @ as_encoded(x))

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        """Predicted means, shape (n, n_arms)."""
        return np.asarray(X, dtype=np.float64) @ self.theta_matrix().T

    def width(self, arm_id: str, x) -> float:
        """Confidence width sqrt(x^T A^-1 x); shrinks as the arm sees data."""
        v = as_encoded(x)
        return float(np.sqrt(v @ self.a_inv(arm_id) @ v))

    def width_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        cols = [
            np.sqrt(np.einsum("ij,jk,ik->i", X, self.a_inv(a), X))
            for a in self.arm_ids
        ]
        return np.stack(cols, axis=1)

    def ucb_score(self, arm_id: str, x, alpha: float) -> float:
        if alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {alpha}")
        return self.predict_mean(arm_id, x) + alpha * self.width(arm_id, x)

    def finalize(self) -> None:
        """Precompute every derived quantity so reads are pure and thread-safe."""
        for a in self.arm_ids:
            self.theta(a)
            self.a_inv(a)

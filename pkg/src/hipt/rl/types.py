"""Transition and trajectory containers shared by both hierarchy levels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Transition:
    observation: np.ndarray
    action: int
    log_prob: float
    reward: float
    value: float
    done: bool
    recurrent_state: np.ndarray | None = None

    def __post_init__(self):
        if self.log_prob > 1e-12:
            raise ValueError(f"log_prob must be <= 0, got {self.log_prob}")
        if not np.isfinite(self.reward):
            raise ValueError("non-finite reward")


@dataclass
class TrajectoryBuffer:
    """One episode segment as flat arrays.

    level "low": one row per environment step; `priors` holds the active
    sub-policy prior per step. level "high": one row per prior decision;
    `horizons` holds the executed step count p of each decision.
    """

    level: str
    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    priors: np.ndarray | None = None
    horizons: np.ndarray | None = None
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.level not in ("low", "high"):
            raise ValueError(f"level must be 'low' or 'high', got {self.level!r}")

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class PPOConfig:
    gamma_disc: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.05
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    entropy_coef_end: float = 0.0
    minibatch_transitions: int = 512
    epochs: int = 4
    normalize_advantages: bool = True
    max_grad_norm: float | None = 0.5

    def __post_init__(self):
        if not (0.0 <= self.gamma_disc <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            raise ValueError("gamma_disc and gae_lambda must lie in [0, 1]")
        if self.clip_eps <= 0.0:
            raise ValueError("clip_eps must be positive")

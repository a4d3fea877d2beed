"""PPO loss pieces with analytic gradients.

Each function returns its scalar alongside exact gradients with respect to
its differentiable inputs, so the update step can assemble head cotangents
without an autodiff graph. Conventions: the clipped surrogate and the
entropy bonus are objectives (maximized); the value loss is minimized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nets.net import log_softmax, softmax


@dataclass
class ClipObjective:
    value: float
    grad_new_log_probs: np.ndarray
    clip_fraction: float
    approx_kl: float


def ppo_clip_objective(
    new_log_probs: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    clip_eps: float,
) -> ClipObjective:
    """Mean of min(ratio * adv, clip(ratio) * adv); gradient flows only
    through new_log_probs, and only where the unclipped branch is taken."""
    if not (np.all(np.isfinite(new_log_probs)) and np.all(np.isfinite(old_log_probs))):
        raise ValueError("non-finite log-probs")
    n = len(new_log_probs)
    ratio = np.exp(new_log_probs - old_log_probs)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    per_sample = np.minimum(unclipped, clipped)
    take_unclipped = unclipped <= clipped
    grad = np.where(take_unclipped, ratio * advantages, 0.0) / n
    # k3 estimator of KL(old || new); nonnegative pointwise.
    log_ratio = new_log_probs - old_log_probs
    approx_kl = float(np.mean((ratio - 1.0) - log_ratio))
    return ClipObjective(
        value=float(per_sample.mean()),
        grad_new_log_probs=grad,
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > clip_eps)),
        approx_kl=approx_kl,
    )


def value_loss(
    value_preds: np.ndarray, return_targets: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient wrt predictions."""
    diff = value_preds - return_targets
    n = len(diff)
    return float(np.mean(diff * diff)), 2.0 * diff / n


def entropy_bonus(policy_probs: np.ndarray) -> float:
    """Mean Shannon entropy (nats) over a batch of distributions."""
    p = np.asarray(policy_probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(p), 0.0)
    return float(-terms.sum(axis=-1).mean())


def entropy_and_grad_from_logits(logits: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean entropy of softmax(logits) plus its gradient wrt the logits."""
    p = softmax(logits)
    logp = log_softmax(logits)
    row_h = -(p * logp).sum(axis=1)
    n = logits.shape[0]
    grad = -p * (logp + row_h[:, None]) / n
    return float(row_h.mean()), grad


def action_log_probs(logits: np.ndarray, actions: np.ndarray) -> np.ndarray:
    return log_softmax(logits)[np.arange(len(actions)), actions]


def log_prob_grad_to_logits(
    logits: np.ndarray, actions: np.ndarray, d_log_probs: np.ndarray
) -> np.ndarray:
    """Chain d(loss)/d(log pi(a|s)) back to the logits: (onehot - p) rows."""
    p = softmax(logits)
    grad = -p * d_log_probs[:, None]
    grad[np.arange(len(actions)), actions] += d_log_probs
    return grad

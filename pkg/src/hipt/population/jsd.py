"""Jensen-Shannon divergence diversity bonus.

For member policies pi_1..pi_N evaluated on a batch of states, the bonus at
each state is H(mean policy) - mean H(pi_n), averaged over the batch. It is
0 iff all members agree and is bounded by both ln N and ln |A|.
"""

from __future__ import annotations

import numpy as np

from ..nets.net import softmax


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(p), 0.0)
    return -terms.sum(axis=-1)


def jsd_term(member_dists: np.ndarray) -> float:
    """member_dists: (N, B, A) action distributions; returns mean JSD over B."""
    d = np.asarray(member_dists, dtype=np.float64)
    if d.ndim != 3 or d.shape[0] < 2:
        raise ValueError("need (N >= 2, B, A) distributions")
    if np.any(d < -1e-12) or np.any(np.abs(d.sum(axis=-1) - 1.0) > 1e-6):
        raise ValueError("rows must be probability distributions")
    mixture = d.mean(axis=0)
    return float((_entropy_rows(mixture) - _entropy_rows(d).mean(axis=0)).mean())


def jsd_objective_and_grad(
    learner_logits: np.ndarray, peer_probs: np.ndarray
) -> tuple[float, np.ndarray]:
    """JSD of {softmax(learner_logits)} u peers, with gradient wrt the
    learner's logits only (peers are frozen snapshots).

    learner_logits: (B, A); peer_probs: (K, B, A) with K = N - 1.
    """
    p = softmax(learner_logits)
    N = peer_probs.shape[0] + 1
    B = learner_logits.shape[0]
    mixture = (p + peer_probs.sum(axis=0)) / N
    all_probs = np.concatenate([p[None], peer_probs], axis=0)
    value = float((_entropy_rows(mixture) - _entropy_rows(all_probs).mean(axis=0)).mean())

    # dJSD/dp_a = (log p_a - log mix_a) / N; chain through the softmax rows.
    g = (np.log(p) - np.log(mixture)) / N
    inner = (g * p).sum(axis=1, keepdims=True)
    d_logits = p * (g - inner) / B
    return value, d_logits

"""Generalized advantage estimation."""

from __future__ import annotations

import numpy as np


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    gamma_disc: float,
    lam: float,
    bootstrap_value: float = 0.0,
    dones: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Backward GAE recursion over one trajectory.

    `bootstrap_value` is V(s_T) for a non-terminal tail; `dones[t]` marks
    transitions into terminal states (the recursion and the bootstrap are
    cut there). Returns (advantages, return_targets) with
    return_targets = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    T = len(rewards)
    if T == 0:
        raise ValueError("empty trajectory")
    if dones is None:
        dones = np.zeros(T, dtype=bool)
        dones[-1] = True
    adv = np.zeros(T)
    gae = 0.0
    for t in range(T - 1, -1, -1):
        next_value = 0.0 if dones[t] else (values[t + 1] if t + 1 < T else bootstrap_value)
        delta = rewards[t] + gamma_disc * next_value - values[t]
        gae = delta + gamma_disc * lam * gae * (0.0 if dones[t] else 1.0)
        adv[t] = gae
    return adv, adv + values


def discounted_advantages_bruteforce(
    rewards: np.ndarray, values: np.ndarray, gamma_disc: float
) -> np.ndarray:
    """Independent oracle for the lambda = 1 case on a terminal episode:
    advantage_t = discounted reward-to-go minus V(s_t), by direct summation."""
    T = len(rewards)
    adv = np.zeros(T)
    for t in range(T):
        ret = 0.0
        for k in range(t, T):
            ret += gamma_disc ** (k - t) * rewards[k]
        adv[t] = ret - values[t]
    return adv

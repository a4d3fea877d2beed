"""Adam optimizer with bias correction and linear schedules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DivergenceError(RuntimeError):
    """Raised on non-finite losses or gradients; last-good params are kept."""


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @staticmethod
    def zeros(n: int) -> "AdamState":
        return AdamState(np.zeros(n), np.zeros(n), 0)


def adam_update(
    vector: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """In-place descent step on `vector`. Raises DivergenceError on
    non-finite gradient entries without touching params or moments."""
    if vector.shape != grad.shape or state.m.shape != grad.shape:
        raise ValueError("params, gradient and moments must be congruent")
    if not np.all(np.isfinite(grad)):
        raise DivergenceError("non-finite gradient")
    state.step += 1
    state.m *= beta1
    state.m += (1.0 - beta1) * grad
    state.v *= beta2
    state.v += (1.0 - beta2) * grad * grad
    m_hat = state.m / (1.0 - beta1**state.step)
    v_hat = state.v / (1.0 - beta2**state.step)
    vector -= lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass(frozen=True)
class LinearSchedule:
    """start -> end over `horizon` units, clamped at end thereafter."""

    start: float
    end: float
    horizon: int

    def value(self, t: float) -> float:
        if self.horizon <= 0:
            return self.end
        frac = min(max(t / self.horizon, 0.0), 1.0)
        return self.start + (self.end - self.start) * frac


def lr_decay_schedule(lr_start: float, decay: float, horizon: int) -> LinearSchedule:
    """End learning rate is lr_start / decay (decay >= 1)."""
    return LinearSchedule(lr_start, lr_start / decay, horizon)

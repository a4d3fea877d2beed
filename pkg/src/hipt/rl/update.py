"""Minibatched multi-epoch PPO parameter update for flat (single-level)
agents. The bi-level update reuses the same loss pieces in the agent
trainer; this path serves population self-play, behavior-response baselines
and unit-scale sanity environments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..nets import AdamState, DivergenceError, adam_update, backward_step, forward
from ..nets.spec import ParamStore, zero_gradient
from .losses import (
    action_log_probs,
    entropy_and_grad_from_logits,
    log_prob_grad_to_logits,
    ppo_clip_objective,
    value_loss,
)
from .types import PPOConfig, TrajectoryBuffer

# aux hook: (minibatch transition indices, low logits) -> (objective value, d_logits)
AuxLogitTerm = Callable[[np.ndarray, np.ndarray], tuple[float, np.ndarray]]


@dataclass
class UpdateDiagnostics:
    policy_objective: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    aux_objective: float = 0.0
    total_loss: float = 0.0
    clip_fraction: float = 0.0
    approx_kl: float = 0.0
    grad_norm: float = 0.0
    minibatches: int = 0

    def to_dict(self) -> dict:
        return {
            "policy_objective": self.policy_objective,
            "value_loss": self.value_loss,
            "entropy": self.entropy,
            "aux_objective": self.aux_objective,
            "total_loss": self.total_loss,
            "clip_fraction": self.clip_fraction,
            "approx_kl": self.approx_kl,
            "grad_norm": self.grad_norm,
        }

    def _accumulate(self, other: "UpdateDiagnostics") -> None:
        for name in vars(other):
            if name != "minibatches":
                setattr(self, name, getattr(self, name) + getattr(other, name))
        self.minibatches += 1

    def _finalize(self) -> "UpdateDiagnostics":
        k = max(self.minibatches, 1)
        for name in vars(self):
            if name != "minibatches":
                setattr(self, name, getattr(self, name) / k)
        return self


def clip_grad_norm(grad: np.ndarray, max_norm: float | None) -> float:
    norm = float(np.linalg.norm(grad))
    if max_norm is not None and norm > max_norm and norm > 0.0:
        grad *= max_norm / norm
    return norm


def normalized(advantages: np.ndarray) -> np.ndarray:
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


def ppo_update(
    params: ParamStore,
    buffers: list[TrajectoryBuffer],
    cfg: PPOConfig,
    opt_state: AdamState,
    lr: float,
    entropy_coef: float | None = None,
    rng: np.random.Generator | None = None,
    aux_logit_term: AuxLogitTerm | None = None,
) -> UpdateDiagnostics:
    """Update `params` in place from low-level buffers with advantages set.

    On divergence (non-finite loss or gradient) the pre-update parameters
    are restored before DivergenceError propagates.
    """
    if not buffers:
        raise ValueError("no buffers")
    for b in buffers:
        if b.advantages is None or b.returns is None:
            raise ValueError("buffers need advantages/returns before ppo_update")
    spec = params.spec
    rng = rng if rng is not None else np.random.default_rng(0)
    c_ent = cfg.entropy_coef if entropy_coef is None else entropy_coef

    obs = np.concatenate([b.obs for b in buffers])
    actions = np.concatenate([b.actions for b in buffers])
    old_lp = np.concatenate([b.log_probs for b in buffers])
    adv = np.concatenate([b.advantages for b in buffers])
    ret = np.concatenate([b.returns for b in buffers])
    priors = np.concatenate(
        [
            b.priors if b.priors is not None else np.zeros(len(b), dtype=np.int64)
            for b in buffers
        ]
    )
    n_total = len(actions)

    snapshot = params.vector.copy()
    diag = UpdateDiagnostics()
    try:
        if spec.recurrent_dim is None:
            _update_feedforward(
                params, spec, cfg, opt_state, lr, c_ent, rng, aux_logit_term,
                obs, actions, old_lp, adv, ret, priors, n_total, diag,
            )
        else:
            _update_recurrent(
                params, spec, cfg, opt_state, lr, c_ent, rng, aux_logit_term,
                buffers, diag,
            )
    except DivergenceError:
        params.vector[:] = snapshot
        raise
    return diag._finalize()


def _minibatch_loss_and_cotangents(
    cfg: PPOConfig,
    c_ent: float,
    low_logits: np.ndarray,
    values: np.ndarray,
    actions: np.ndarray,
    old_lp: np.ndarray,
    adv: np.ndarray,
    ret: np.ndarray,
    aux_logit_term: AuxLogitTerm | None,
    mb_indices: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, UpdateDiagnostics]:
    """Shared loss assembly: returns (loss, d_low_logits, d_value_low, diag)."""
    if cfg.normalize_advantages:
        adv = normalized(adv)
    new_lp = action_log_probs(low_logits, actions)
    clip = ppo_clip_objective(new_lp, old_lp, adv, cfg.clip_eps)
    vloss, d_values_raw = value_loss(values, ret)
    ent, d_ent_logits = entropy_and_grad_from_logits(low_logits)

    aux_value = 0.0
    d_logits = log_prob_grad_to_logits(low_logits, actions, -clip.grad_new_log_probs)
    d_logits -= c_ent * d_ent_logits
    if aux_logit_term is not None:
        aux_value, d_aux = aux_logit_term(mb_indices, low_logits)
        d_logits -= d_aux
    loss = -clip.value + cfg.value_coef * vloss - c_ent * ent - aux_value
    if not np.isfinite(loss):
        raise DivergenceError(f"non-finite loss {loss}")

    d_values = cfg.value_coef * d_values_raw
    mb_diag = UpdateDiagnostics(
        policy_objective=clip.value,
        value_loss=vloss,
        entropy=ent,
        aux_objective=aux_value,
        total_loss=loss,
        clip_fraction=clip.clip_fraction,
        approx_kl=clip.approx_kl,
    )
    return loss, d_logits, d_values, mb_diag


def _update_feedforward(
    params, spec, cfg, opt_state, lr, c_ent, rng, aux_logit_term,
    obs, actions, old_lp, adv, ret, priors, n_total, diag,
):
    mb_size = min(cfg.minibatch_transitions, n_total)
    for _ in range(cfg.epochs):
        order = rng.permutation(n_total)
        for start in range(0, n_total, mb_size):
            idx = order[start : start + mb_size]
            out, _, cache = forward(params, spec, obs[idx], None, priors[idx], need_cache=True)
            loss, d_logits, d_values, mb_diag = _minibatch_loss_and_cotangents(
                cfg, c_ent, out["low_logits"], out["value_low"],
                actions[idx], old_lp[idx], adv[idx], ret[idx],
                aux_logit_term, idx,
            )
            grad = ParamStore(spec, zero_gradient(spec))
            backward_step(
                params, spec, cache,
                {"d_low_logits": d_logits, "d_value_low": d_values},
                grad,
            )
            mb_diag.grad_norm = clip_grad_norm(grad.vector, cfg.max_grad_norm)
            adam_update(params.vector, grad.vector, opt_state, lr)
            diag._accumulate(mb_diag)


def _update_recurrent(
    params, spec, cfg, opt_state, lr, c_ent, rng, aux_logit_term,
    buffers, diag,
):
    lengths = {len(b) for b in buffers}
    if len(lengths) != 1:
        raise ValueError("recurrent updates need equal-length episodes")
    T = lengths.pop()
    eps_per_mb = max(1, cfg.minibatch_transitions // T)
    n_eps = len(buffers)
    offsets = np.cumsum([0] + [len(b) for b in buffers])[:-1]
    for _ in range(cfg.epochs):
        order = rng.permutation(n_eps)
        for start in range(0, n_eps, eps_per_mb):
            picked = order[start : start + eps_per_mb]
            chosen = [buffers[j] for j in picked]
            M = len(chosen)
            obs_seq = np.stack([b.obs for b in chosen], axis=1)  # (T, M, d)
            priors_seq = np.stack(
                [
                    b.priors if b.priors is not None else np.zeros(T, dtype=np.int64)
                    for b in chosen
                ],
                axis=1,
            )
            h = None
            caches = []
            logits_steps, value_steps = [], []
            for t in range(T):
                out, h, cache = forward(
                    params, spec, obs_seq[t], h, priors_seq[t], need_cache=True
                )
                caches.append(cache)
                logits_steps.append(out["low_logits"])
                value_steps.append(out["value_low"])
            low_logits = np.concatenate(logits_steps)  # (T*M, A) in time-major order
            values = np.concatenate(value_steps)
            actions = np.stack([b.actions for b in chosen], axis=1).ravel()
            old_lp = np.stack([b.log_probs for b in chosen], axis=1).ravel()
            adv = np.stack([b.advantages for b in chosen], axis=1).ravel()
            ret = np.stack([b.returns for b in chosen], axis=1).ravel()

            global_idx = np.stack(
                [offsets[j] + np.arange(T) for j in picked], axis=1
            ).ravel()
            loss, d_logits, d_values, mb_diag = _minibatch_loss_and_cotangents(
                cfg, c_ent, low_logits, values, actions, old_lp, adv, ret,
                aux_logit_term, global_idx,
            )
            grad = ParamStore(spec, zero_gradient(spec))
            d_logits = d_logits.reshape(T, M, -1)
            d_values = d_values.reshape(T, M)
            dh = None
            for t in range(T - 1, -1, -1):
                dh = backward_step(
                    params, spec, caches[t],
                    {"d_low_logits": d_logits[t], "d_value_low": d_values[t]},
                    grad, dh,
                )
            mb_diag.grad_norm = clip_grad_norm(grad.vector, cfg.max_grad_norm)
            adam_update(params.vector, grad.vector, opt_state, lr)
            diag._accumulate(mb_diag)

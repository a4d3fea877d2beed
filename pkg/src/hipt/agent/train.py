"""Bi-level training loop: rollouts against the partner population, GAE per
level, and one summed PPO update over both heads per minibatch.

Both levels share the trunk, so each minibatch runs a single forward over
its low-level transitions (every forward also yields the manager head) plus
one over the decision states, assembles clipped-surrogate / value / entropy
cotangents for both levels, and takes one Adam step on the summed gradient.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..env.engine import ShapingConfig
from ..env.layout import Layout
from ..nets import (
    AdamState,
    DivergenceError,
    NetworkSpec,
    ParamStore,
    backward_step,
    forward,
    init_params,
    lr_decay_schedule,
    zero_gradient,
)
from ..nets.adam import LinearSchedule, adam_update
from ..population.types import PartnerPopulation
from ..rl import MetricsLogger, PPOConfig
from ..rl.gae import compute_gae
from ..rl.losses import (
    action_log_probs,
    entropy_and_grad_from_logits,
    log_prob_grad_to_logits,
    ppo_clip_objective,
    value_loss,
)
from ..rl.update import UpdateDiagnostics, clip_grad_norm, normalized
from .core import HiPTAgent, InfluenceSchedule
from .rollout import TrajectoryPair, collect_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HiPTConfig:
    num_priors: int = 4
    p_min: int = 20
    p_max: int = 40
    alpha: float = 1.0
    kappa_start: float = 1000.0
    kappa_end: float = 1.0
    total_env_steps: int = 5_000_000
    episodes_per_batch: int = 16
    horizon: int = 400
    lr_start: float = 1e-3
    lr_decay: float = 3.0
    shaping: ShapingConfig | None = ShapingConfig()
    shaping_anneal_fraction: float = 0.5
    include_shaped_in_high: bool = True
    randomize_seat: bool = True
    batch_envs: int = 16
    eval_interval_env_steps: int = 250_000
    eval_episodes: int = 3
    target_eval_return: float | None = None


@dataclass
class TrainResult:
    agent: HiPTAgent
    env_steps: int
    history: list[dict] = field(default_factory=list)
    best_eval_return: float = float("-inf")


def train_hipt(
    population: PartnerPopulation,
    layout: Layout,
    cfg: HiPTConfig,
    ppo: PPOConfig,
    seed: int = 0,
    metrics: MetricsLogger | None = None,
    net_spec: NetworkSpec | None = None,
    eval_fn=None,
) -> TrainResult:
    """Train a bi-level agent against the population.

    `eval_fn(agent) -> float`, when given, is called every
    eval_interval_env_steps; training stops early once it reaches
    cfg.target_eval_return.
    """
    if population.size == 0:
        raise ValueError("empty partner population")
    metrics = metrics or MetricsLogger(None)
    if net_spec is None:
        net_spec = NetworkSpec(
            input_dim=population.spec.input_dim,
            trunk=population.spec.trunk,
            activation=population.spec.activation,
            recurrent_dim=population.spec.recurrent_dim,
            num_priors=cfg.num_priors,
            num_actions=population.spec.num_actions,
        )
    if net_spec.num_priors != cfg.num_priors:
        raise ValueError("net_spec.num_priors must match cfg.num_priors")
    params = init_params(net_spec, seed)
    agent = HiPTAgent(params=params, p_min=cfg.p_min, p_max=cfg.p_max)
    opt = AdamState.zeros(params.size)
    schedule = InfluenceSchedule(
        cfg.kappa_start, cfg.kappa_end, cfg.alpha, cfg.total_env_steps
    )
    steps_per_batch = cfg.episodes_per_batch * cfg.horizon
    n_updates = max(1, cfg.total_env_steps // steps_per_batch)
    lr_sched = lr_decay_schedule(cfg.lr_start, cfg.lr_decay, n_updates)
    ent_sched = LinearSchedule(ppo.entropy_coef, ppo.entropy_coef_end, n_updates)
    update_rng = np.random.default_rng(seed + 31337)

    result = TrainResult(agent=agent, env_steps=0)
    next_eval = cfg.eval_interval_env_steps
    for update_idx in range(n_updates):
        kappa = schedule.kappa(result.env_steps)
        shaping = None
        if cfg.shaping is not None and cfg.shaping.enabled:
            anneal_updates = max(1, int(n_updates * cfg.shaping_anneal_fraction))
            shaping = cfg.shaping.with_scale(max(0.0, 1.0 - update_idx / anneal_updates))
        batch = collect_batch(
            agent, population, layout, cfg.episodes_per_batch, cfg.horizon,
            seed=seed + 809 * update_idx, shaping=shaping, alpha=cfg.alpha,
            kappa_inf=kappa, include_shaped_in_high=cfg.include_shaped_in_high,
            batch_envs=cfg.batch_envs, randomize_seat=cfg.randomize_seat,
        )
        result.env_steps += batch.env_steps
        for pair in batch.pairs:
            _apply_gae(pair, ppo)
        low_diag, high_diag = bilevel_update(
            params, batch.pairs, ppo, opt,
            lr=lr_sched.value(update_idx),
            entropy_coef=ent_sched.value(update_idx),
            rng=update_rng,
        )
        mean_return = float(batch.episode_returns.mean())
        for level, diag in (("low", low_diag), ("high", high_diag)):
            metrics.log(
                kind="hipt_update", update_idx=update_idx, level=level,
                env_steps=result.env_steps, mean_return=mean_return,
                kappa_inf=kappa, **diag.to_dict(),
            )
        result.history.append(
            {"update_idx": update_idx, "env_steps": result.env_steps,
             "mean_return": mean_return, "kappa_inf": kappa}
        )
        if eval_fn is not None and result.env_steps >= next_eval:
            next_eval += cfg.eval_interval_env_steps
            score = float(eval_fn(agent))
            result.best_eval_return = max(result.best_eval_return, score)
            metrics.log(kind="hipt_eval", env_steps=result.env_steps, eval_return=score)
            log.info("eval at %d env steps: %.1f", result.env_steps, score)
            if cfg.target_eval_return is not None and score >= cfg.target_eval_return:
                log.info("early stop: eval return %.1f >= target", score)
                break
    return result


def _apply_gae(pair: TrajectoryPair, ppo: PPOConfig) -> None:
    pair.low.advantages, pair.low.returns = compute_gae(
        pair.low.rewards, pair.low.values, ppo.gamma_disc, ppo.gae_lambda
    )
    pair.high.advantages, pair.high.returns = compute_gae(
        pair.high.rewards, pair.high.values, ppo.gamma_disc, ppo.gae_lambda
    )


def bilevel_update(
    params: ParamStore,
    pairs: list[TrajectoryPair],
    ppo: PPOConfig,
    opt: AdamState,
    lr: float,
    entropy_coef: float,
    rng: np.random.Generator,
) -> tuple[UpdateDiagnostics, UpdateDiagnostics]:
    """Minibatched multi-epoch update; minibatches are whole episodes so the
    two levels stay aligned. Restores pre-update params on divergence."""
    spec = params.spec
    if spec.recurrent_dim is not None:
        raise NotImplementedError(
            "bi-level training currently targets feedforward trunks; "
            "set recurrent_dim=None in the training spec"
        )
    snapshot = params.vector.copy()
    low_diag, high_diag = UpdateDiagnostics(), UpdateDiagnostics()
    T = len(pairs[0].low)
    eps_per_mb = max(1, ppo.minibatch_transitions // T)
    try:
        for _ in range(ppo.epochs):
            order = rng.permutation(len(pairs))
            for start in range(0, len(pairs), eps_per_mb):
                chosen = [pairs[j] for j in order[start : start + eps_per_mb]]
                _bilevel_minibatch(
                    params, spec, chosen, ppo, opt, lr, entropy_coef,
                    low_diag, high_diag,
                )
    except DivergenceError:
        params.vector[:] = snapshot
        raise
    return low_diag._finalize(), high_diag._finalize()


def _bilevel_minibatch(
    params, spec, chosen, ppo, opt, lr, entropy_coef, low_diag, high_diag
):
    obs_l = np.concatenate([p.low.obs for p in chosen])
    act_l = np.concatenate([p.low.actions for p in chosen])
    old_lp_l = np.concatenate([p.low.log_probs for p in chosen])
    adv_l = np.concatenate([p.low.advantages for p in chosen])
    ret_l = np.concatenate([p.low.returns for p in chosen])
    priors = np.concatenate([p.low.priors for p in chosen])

    obs_h = np.concatenate([p.high.obs for p in chosen])
    act_h = np.concatenate([p.high.actions for p in chosen])
    old_lp_h = np.concatenate([p.high.log_probs for p in chosen])
    adv_h = np.concatenate([p.high.advantages for p in chosen])
    ret_h = np.concatenate([p.high.returns for p in chosen])

    if ppo.normalize_advantages:
        adv_l = normalized(adv_l)
        adv_h = normalized(adv_h)

    out_l, _, cache_l = forward(params, spec, obs_l, None, priors, need_cache=True)
    new_lp_l = action_log_probs(out_l["low_logits"], act_l)
    clip_l = ppo_clip_objective(new_lp_l, old_lp_l, adv_l, ppo.clip_eps)
    vloss_l, d_v_l = value_loss(out_l["value_low"], ret_l)
    ent_l, d_ent_l = entropy_and_grad_from_logits(out_l["low_logits"])

    out_h, _, cache_h = forward(params, spec, obs_h, None, None, need_cache=True)
    new_lp_h = action_log_probs(out_h["high_logits"], act_h)
    clip_h = ppo_clip_objective(new_lp_h, old_lp_h, adv_h, ppo.clip_eps)
    vloss_h, d_v_h = value_loss(out_h["value_high"], ret_h)
    ent_h, d_ent_h = entropy_and_grad_from_logits(out_h["high_logits"])

    loss = (
        -clip_l.value + ppo.value_coef * vloss_l - entropy_coef * ent_l
        - clip_h.value + ppo.value_coef * vloss_h - entropy_coef * ent_h
    )
    if not np.isfinite(loss):
        raise DivergenceError(f"non-finite bi-level loss {loss}")

    d_logits_l = log_prob_grad_to_logits(out_l["low_logits"], act_l, -clip_l.grad_new_log_probs)
    d_logits_l -= entropy_coef * d_ent_l
    d_logits_h = log_prob_grad_to_logits(out_h["high_logits"], act_h, -clip_h.grad_new_log_probs)
    d_logits_h -= entropy_coef * d_ent_h

    grad = ParamStore(spec, zero_gradient(spec))
    backward_step(
        params, spec, cache_l,
        {"d_low_logits": d_logits_l, "d_value_low": ppo.value_coef * d_v_l},
        grad,
    )
    backward_step(
        params, spec, cache_h,
        {"d_high_logits": d_logits_h, "d_value_high": ppo.value_coef * d_v_h},
        grad,
    )
    grad_norm = clip_grad_norm(grad.vector, ppo.max_grad_norm)
    adam_update(params.vector, grad.vector, opt, lr)

    low_diag._accumulate(UpdateDiagnostics(
        policy_objective=clip_l.value, value_loss=vloss_l, entropy=ent_l,
        total_loss=loss, clip_fraction=clip_l.clip_fraction,
        approx_kl=clip_l.approx_kl, grad_norm=grad_norm,
    ))
    high_diag._accumulate(UpdateDiagnostics(
        policy_objective=clip_h.value, value_loss=vloss_h, entropy=ent_h,
        total_loss=loss, clip_fraction=clip_h.clip_fraction,
        approx_kl=clip_h.approx_kl, grad_norm=grad_norm,
    ))

"""Self-play training of the diverse partner population.

Members are independently seeded PPO agents trained in self-play, round
robin so the diversity bonus always reads reasonably fresh peers. Within a
round every member maximizes its PPO objective plus jsd_coefficient * JSD
against frozen peer snapshots from the round start; peers get no gradient.
Skill tiers come from periodic checkpoints: full is the final agent, mid is
the checkpoint nearest half the final self-play return, random is the
untrained initialization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..env.engine import ShapingConfig
from ..env.layout import Layout
from ..nets import (
    AdamState,
    DivergenceError,
    NetworkSpec,
    ParamStore,
    forward,
    init_params,
    init_recurrent_state,
    lr_decay_schedule,
    softmax,
)
from ..nets.adam import LinearSchedule
from ..rl import MetricsLogger, PPOConfig, ppo_update
from ..rollouts import collect_selfplay, selfplay_return
from .jsd import jsd_objective_and_grad
from .types import (
    CheckpointRecord,
    PartnerPopulation,
    PopulationMember,
    select_mid_checkpoint,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PopulationConfig:
    n_members: int = 4
    steps_per_member: int = 600_000
    episodes_per_batch: int = 16
    horizon: int = 400
    lr_start: float = 1e-3
    lr_decay: float = 3.0
    jsd_coefficient: float = 0.1
    jsd_anneal: bool = True
    shaping: ShapingConfig | None = ShapingConfig()
    shaping_anneal_fraction: float = 0.5
    checkpoint_every_rounds: int = 4
    eval_episodes: int = 5
    final_eval_episodes: int = 10
    batch_envs: int = 16
    max_retries: int = 2
    target_j_sp: float | None = None  # early stop once every member clears it

    def __post_init__(self):
        if self.n_members < 2:
            raise ValueError("population needs n_members >= 2")


@dataclass
class _MemberState:
    seed: int
    params: ParamStore
    initial: ParamStore
    opt: AdamState
    records: list[CheckpointRecord]
    env_steps: int = 0
    diverged: bool = False


def _policy_probs(params: ParamStore, obs: np.ndarray, horizon: int) -> np.ndarray:
    """Action probabilities of a frozen peer on a flat batch of states.

    For recurrent peers the batch must be time-major episode blocks of
    length `horizon`; the hidden state is replayed per episode.
    """
    spec = params.spec
    z = np.zeros(obs.shape[0], dtype=np.int64)
    if spec.recurrent_dim is None:
        out, _, _ = forward(params, spec, obs, None, z)
        return softmax(out["low_logits"])
    n_eps = obs.shape[0] // horizon
    probs = np.zeros((obs.shape[0], spec.num_actions))
    seq = obs.reshape(n_eps, horizon, -1)
    h = init_recurrent_state(spec, n_eps)
    for t in range(horizon):
        out, h, _ = forward(params, spec, seq[:, t], h, z[:n_eps])
        probs.reshape(n_eps, horizon, -1)[:, t] = softmax(out["low_logits"])
    return probs


def train_population(
    layout: Layout,
    cfg: PopulationConfig,
    ppo: PPOConfig,
    net_spec: NetworkSpec,
    seed: int = 0,
    metrics: MetricsLogger | None = None,
) -> PartnerPopulation:
    metrics = metrics or MetricsLogger(None)
    steps_per_round = cfg.episodes_per_batch * cfg.horizon
    rounds = max(1, cfg.steps_per_member // steps_per_round)
    lr_sched = lr_decay_schedule(cfg.lr_start, cfg.lr_decay, rounds)
    ent_sched = LinearSchedule(ppo.entropy_coef, ppo.entropy_coef_end, rounds)
    jsd_sched = LinearSchedule(
        cfg.jsd_coefficient, 0.0 if cfg.jsd_anneal else cfg.jsd_coefficient, rounds
    )
    member_seeds = [seed * 1000 + i for i in range(cfg.n_members)]
    states = [_fresh_member(net_spec, s) for s in member_seeds]
    retries = [0] * cfg.n_members
    update_rng = np.random.default_rng(seed + 777)

    r = 0
    while r < rounds:
        snapshots = [st.params.copy() for st in states]
        for i, st in enumerate(states):
            try:
                _train_member_round(
                    layout, cfg, ppo, st, snapshots, i, r, rounds,
                    lr_sched, ent_sched, jsd_sched, update_rng, metrics,
                )
            except DivergenceError:
                retries[i] += 1
                if retries[i] > cfg.max_retries:
                    raise
                new_seed = member_seeds[i] + 7919 * retries[i]
                log.warning(
                    "member %d diverged at round %d; reseeding with %d", i, r, new_seed
                )
                member_seeds[i] = new_seed
                states[i] = _fresh_member(net_spec, new_seed)
        if cfg.checkpoint_every_rounds and (r + 1) % cfg.checkpoint_every_rounds == 0:
            for i, st in enumerate(states):
                j = selfplay_return(
                    st.params, layout, cfg.eval_episodes, cfg.horizon,
                    seed=seed + 31 * i + r, batch_envs=cfg.batch_envs,
                )
                st.records.append(CheckpointRecord(st.env_steps, st.params.copy(), j))
                metrics.log(kind="population_checkpoint", member=i, round=r,
                            env_steps=st.env_steps, j_sp=j)
        if cfg.target_j_sp is not None and states[0].records:
            latest = [st.records[-1].j_sp for st in states if st.records]
            if len(latest) == cfg.n_members and min(latest) >= cfg.target_j_sp:
                log.info("population early stop at round %d (min J_SP %.1f)", r, min(latest))
                break
        r += 1

    members = []
    for i, st in enumerate(states):
        j_full = selfplay_return(
            st.params, layout, cfg.final_eval_episodes, cfg.horizon,
            seed=seed + 5000 + i, batch_envs=cfg.batch_envs,
        )
        if st.records:
            mid_rec, in_band = select_mid_checkpoint(st.records, j_full)
        else:
            mid_rec, in_band = CheckpointRecord(0, st.params.copy(), j_full), False
        if not in_band:
            log.warning(
                "member %d mid checkpoint J_SP %.1f outside [35%%, 65%%] of full %.1f",
                i, mid_rec.j_sp, j_full,
            )
        members.append(
            PopulationMember(
                seed=member_seeds[i],
                tiers={"full": st.params, "mid": mid_rec.params, "random": st.initial},
                j_sp_full=j_full,
                j_sp_mid=mid_rec.j_sp,
                mid_in_band=in_band,
            )
        )
    return PartnerPopulation(layout_name=layout.name, spec=net_spec, members=members)


def _fresh_member(net_spec: NetworkSpec, member_seed: int) -> _MemberState:
    params = init_params(net_spec, member_seed)
    return _MemberState(
        seed=member_seed,
        params=params,
        initial=params.copy(),
        opt=AdamState.zeros(params.size),
        records=[],
    )


def _train_member_round(
    layout, cfg, ppo, st, snapshots, member_idx, r, rounds,
    lr_sched, ent_sched, jsd_sched, update_rng, metrics,
):
    shaping = None
    if cfg.shaping is not None and cfg.shaping.enabled:
        anneal_rounds = max(1, int(rounds * cfg.shaping_anneal_fraction))
        scale = max(0.0, 1.0 - r / anneal_rounds)
        shaping = cfg.shaping.with_scale(scale)
    batch = collect_selfplay(
        st.params, layout, cfg.episodes_per_batch, cfg.horizon, ppo,
        seed=st.seed + 100_003 * r, shaping=shaping, batch_envs=cfg.batch_envs,
    )
    st.env_steps += batch.env_steps

    aux = None
    jsd_coef = jsd_sched.value(r)
    if jsd_coef > 0.0 and len(snapshots) > 1:
        obs_all = np.concatenate([b.obs for b in batch.buffers])
        peer_probs = np.stack(
            [
                _policy_probs(snapshots[j], obs_all, cfg.horizon)
                for j in range(len(snapshots))
                if j != member_idx
            ]
        )

        def aux(idx, logits, _peers=peer_probs, _c=jsd_coef):
            value, d_logits = jsd_objective_and_grad(logits, _peers[:, idx])
            return _c * value, _c * d_logits

    diag = ppo_update(
        st.params, batch.buffers, ppo, st.opt,
        lr=lr_sched.value(r),
        entropy_coef=ent_sched.value(r),
        rng=update_rng,
        aux_logit_term=aux,
    )
    metrics.log(
        kind="population_update", member=member_idx, round=r, level="low",
        env_steps=st.env_steps, mean_return=float(batch.episode_returns.mean()),
        jsd_coefficient=jsd_coef, **diag.to_dict(),
    )

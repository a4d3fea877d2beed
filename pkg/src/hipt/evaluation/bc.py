"""Behavior cloning from trajectory logs.

Logs are replayed through the engine to regenerate observations, giving
(observation, action) pairs per requested seat. Train and held-out splits
are disjoint by episode id, and a model can be barred from a set of episode
ids entirely — the mechanism that keeps the cloning partner's data disjoint
from the evaluation proxy's.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from ..env.engine import reset, step
from ..env.features import encode_observation, observation_dim
from ..env.layout import Layout
from ..env.trajlog import LoggedEpisode
from ..nets import AdamState, NetworkSpec, ParamStore, forward, init_params
from ..nets.adam import adam_update
from ..nets.net import log_softmax
from ..nets.spec import zero_gradient
from ..nets.net import backward_step
from ..rl.losses import log_prob_grad_to_logits

log = logging.getLogger(__name__)


class DisjointSplitError(ValueError):
    pass


@dataclass
class BCDataset:
    observations: np.ndarray
    actions: np.ndarray
    episode_ids: list[str]
    digest: str

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class BCModel:
    params: ParamStore
    dataset_digest: str
    holdout_accuracy: float
    epoch_losses: list[float] = field(default_factory=list)

    def action_probs_batch(self, obs: np.ndarray) -> np.ndarray:
        z = np.zeros(obs.shape[0], dtype=np.int64)
        out, _, _ = forward(self.params, self.params.spec, obs, None, z)
        return np.exp(log_softmax(out["low_logits"]))


def dataset_from_episodes(
    episodes: list[LoggedEpisode],
    layout: Layout,
    seats: tuple[int, ...] = (0, 1),
) -> BCDataset:
    """Replay logged actions to rebuild per-seat observations."""
    if not episodes:
        raise ValueError("empty dataset")
    ids = [ep.episode_id for ep in episodes]
    if len(set(ids)) != len(ids):
        raise DisjointSplitError("duplicate episode ids in dataset")
    dim = observation_dim(layout)
    obs_rows, act_rows = [], []
    h = hashlib.sha256()
    for ep in episodes:
        h.update(ep.episode_id.encode())
        state = reset(layout)
        for joint in ep.joint_actions():
            for seat in seats:
                obs_rows.append(encode_observation(state, layout, seat))
                act_rows.append(joint[seat])
            state = step(state, joint, layout).next_state
            h.update(bytes(joint))
    return BCDataset(
        observations=np.array(obs_rows),
        actions=np.array(act_rows, dtype=np.int64),
        episode_ids=ids,
        digest=h.hexdigest(),
    )


def split_episodes(
    episodes: list[LoggedEpisode], holdout_fraction: float, seed: int = 0
) -> tuple[list[LoggedEpisode], list[LoggedEpisode]]:
    """Disjoint-by-episode train/held-out split."""
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(episodes))
    n_hold = max(1, int(round(len(episodes) * holdout_fraction)))
    if n_hold >= len(episodes):
        raise ValueError("not enough episodes to split")
    hold_idx = set(order[:n_hold].tolist())
    train = [ep for i, ep in enumerate(episodes) if i not in hold_idx]
    hold = [ep for i, ep in enumerate(episodes) if i in hold_idx]
    return train, hold


def assert_disjoint(ids_a: set[str], ids_b: set[str]) -> None:
    overlap = ids_a & ids_b
    if overlap:
        raise DisjointSplitError(f"episode ids shared between datasets: {sorted(overlap)[:5]}")


def train_bc(
    train_episodes: list[LoggedEpisode],
    holdout_episodes: list[LoggedEpisode],
    layout: Layout,
    trunk: tuple[int, ...] = (64, 64),
    activation: str = "tanh",
    epochs: int = 20,
    lr: float = 1e-3,
    batch_size: int = 256,
    seed: int = 0,
    seats: tuple[int, ...] = (0, 1),
    forbid_episode_ids: set[str] | None = None,
) -> BCModel:
    """Supervised cross-entropy training on (observation, action) pairs.

    Purely imitative: the trainer never sees rewards. Reports held-out
    top-1 accuracy; tracks per-epoch training loss.
    """
    train_ids = {ep.episode_id for ep in train_episodes}
    hold_ids = {ep.episode_id for ep in holdout_episodes}
    assert_disjoint(train_ids, hold_ids)
    if forbid_episode_ids:
        assert_disjoint(train_ids | hold_ids, set(forbid_episode_ids))

    data = dataset_from_episodes(train_episodes, layout, seats)
    hold = dataset_from_episodes(holdout_episodes, layout, seats)
    if len(np.unique(data.actions)) < 2:
        log.warning("degenerate behavior-cloning dataset: a single action class")

    spec = NetworkSpec(
        input_dim=observation_dim(layout), trunk=trunk, activation=activation,
        recurrent_dim=None, num_priors=1, num_actions=6,
    )
    params = init_params(spec, seed)
    opt = AdamState.zeros(params.size)
    rng = np.random.default_rng(seed + 1)
    n = len(data)
    zeros_z = np.zeros(min(batch_size, n), dtype=np.int64)

    epoch_losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        total, count = 0.0, 0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            out, _, cache = forward(
                params, spec, data.observations[idx], None,
                np.zeros(len(idx), dtype=np.int64), need_cache=True,
            )
            logits = out["low_logits"]
            logp = log_softmax(logits)
            rows = np.arange(len(idx))
            loss = -float(logp[rows, data.actions[idx]].mean())
            d_logits = log_prob_grad_to_logits(
                logits, data.actions[idx], -np.full(len(idx), 1.0 / len(idx))
            )
            grad = ParamStore(spec, zero_gradient(spec))
            backward_step(params, spec, cache, {"d_low_logits": d_logits}, grad)
            adam_update(params.vector, grad.vector, opt, lr)
            total += loss * len(idx)
            count += len(idx)
        epoch_losses.append(total / count)

    model = BCModel(
        params=params,
        dataset_digest=data.digest,
        holdout_accuracy=0.0,
        epoch_losses=epoch_losses,
    )
    preds = model.action_probs_batch(hold.observations).argmax(axis=1)
    model.holdout_accuracy = float((preds == hold.actions).mean())
    return model

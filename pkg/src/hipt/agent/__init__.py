from .checkpoint import load_agent, save_agent
from .core import (
    HiPTAgent,
    InfluenceSchedule,
    anneal,
    fresh_recurrent_state,
    high_level_reward,
    influence_from_dists,
    influence_reward,
    influence_rewards_batch,
    marginal_from_dists,
    marginal_low_policy,
)
from .rollout import (
    HiptBatch,
    TrajectoryPair,
    collect_batch,
    draw_uniform_partner,
    rollout_episode,
)
from .train import HiPTConfig, TrainResult, bilevel_update, train_hipt

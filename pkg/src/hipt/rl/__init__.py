from .gae import compute_gae, discounted_advantages_bruteforce
from .losses import (
    ClipObjective,
    action_log_probs,
    entropy_and_grad_from_logits,
    entropy_bonus,
    log_prob_grad_to_logits,
    ppo_clip_objective,
    value_loss,
)
from .metrics import MetricsLogger
from .types import PPOConfig, TrajectoryBuffer, Transition
from .update import UpdateDiagnostics, clip_grad_norm, normalized, ppo_update

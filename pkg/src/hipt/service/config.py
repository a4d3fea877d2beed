"""Run configuration: defaults, per-layout hyperparameters, file/flag merge.

Precedence: package defaults < config file < command-line flags. The
resolved config is serialized verbatim beside every run's outputs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

# Per-layout training hyperparameters: initial learning rate, the ratio the
# rate linearly decays to (lr_end = lr / lr_decay), sub-policy count, and
# whether shaped rewards apply (off for forced_coordination, whose split
# kitchen already pins each seat's duties).
LAYOUT_HYPERPARAMS: dict[str, dict] = {
    "cramped_room": {"lr": 1e-3, "lr_decay": 3.0, "num_priors": 4, "shaping": True},
    "asymmetric_advantages": {"lr": 1e-3, "lr_decay": 3.0, "num_priors": 4, "shaping": True},
    "coordination_ring": {"lr": 6e-4, "lr_decay": 1.5, "num_priors": 4, "shaping": True},
    "forced_coordination": {"lr": 8e-4, "lr_decay": 2.0, "num_priors": 5, "shaping": False},
    "counter_circuit": {"lr": 8e-4, "lr_decay": 3.0, "num_priors": 6, "shaping": True},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    layout: str = "cramped_room"
    seed: int = 0

    # network
    trunk: tuple[int, ...] = (64, 64)
    activation: str = "tanh"
    recurrent_dim: int | None = None

    # PPO objective coefficients
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    clip_eps: float = 0.05
    gamma_disc: float = 0.99
    gae_lambda: float = 0.95
    minibatch_transitions: int = 512
    epochs: int = 4

    # learning-rate schedule; None pulls the per-layout default
    lr: float | None = None
    lr_decay: float | None = None

    # population training
    members: int = 4
    steps_per_member: int = 800_000
    jsd_coefficient: float = 0.1
    target_j_sp: float | None = None

    # bi-level training
    num_priors: int | None = None  # None pulls the per-layout default
    p_min: int = 20
    p_max: int = 40
    kappa_start: float = 1000.0
    kappa_end: float = 1.0
    alpha: float = 1.0
    total_env_steps: int = 5_000_000
    episodes_per_batch: int = 16
    horizon: int = 400
    shaping: bool | None = None  # None pulls the per-layout default
    target_eval_return: float | None = None

    # evaluation / crossplay / bc
    episodes: int = 5
    tier: str = "full"
    bc_epochs: int = 20
    holdout_fraction: float = 0.2

    # serve
    port: int = 8000
    tick_ms: int = 150
    rounds: int = 1
    human_seat: int = 0

    # paths
    population_dir: str | None = None
    agent: str | None = None
    logs: list[str] = field(default_factory=list)
    run_root: str = "runs"

    def resolved(self) -> "RunConfig":
        """Fill layout-dependent defaults; validates the layout name."""
        if self.layout not in LAYOUT_HYPERPARAMS:
            raise ConfigError(
                f"unknown layout {self.layout!r}; known: {', '.join(LAYOUT_HYPERPARAMS)}"
            )
        hp = LAYOUT_HYPERPARAMS[self.layout]
        out = RunConfig(**{**asdict(self)})
        out.trunk = tuple(out.trunk)
        if out.lr is None:
            out.lr = hp["lr"]
        if out.lr_decay is None:
            out.lr_decay = hp["lr_decay"]
        if out.num_priors is None:
            out.num_priors = hp["num_priors"]
        if out.shaping is None:
            out.shaping = hp["shaping"]
        return out

    def to_json(self) -> str:
        d = asdict(self)
        d["trunk"] = list(self.trunk)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_dict(d: dict, command: str = "") -> "RunConfig":
        known = {f.name for f in fields(RunConfig)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = RunConfig(**d)
        if command:
            cfg.command = command
        cfg.trunk = tuple(cfg.trunk)
        return cfg

    @staticmethod
    def load(path: str | Path, command: str = "") -> "RunConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        return RunConfig.from_dict(json.loads(p.read_text(encoding="utf-8")), command)

    def merged_with_flags(self, flags: dict) -> "RunConfig":
        """Apply non-None flag values over this config."""
        d = asdict(self)
        for key, value in flags.items():
            if value is not None and key in d:
                d[key] = value
        return RunConfig.from_dict(d, self.command)

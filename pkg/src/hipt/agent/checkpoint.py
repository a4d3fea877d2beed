"""Agent checkpoints: model file plus a JSON sidecar with rollout bounds
and training-schedule state."""

from __future__ import annotations

import json
from pathlib import Path

from ..nets import load_model, save_model
from .core import HiPTAgent, InfluenceSchedule


def save_agent(
    stem: str | Path,
    agent: HiPTAgent,
    env_steps: int = 0,
    schedule: InfluenceSchedule | None = None,
) -> tuple[Path, Path]:
    stem = Path(stem)
    model_path = stem.with_suffix(".model")
    sidecar_path = stem.with_suffix(".json")
    save_model(model_path, agent.params)
    sidecar = {
        "num_priors": agent.num_priors,
        "p_min": agent.p_min,
        "p_max": agent.p_max,
        "env_steps": env_steps,
        "schedule": None
        if schedule is None
        else {
            "kappa_start": schedule.kappa_start,
            "kappa_end": schedule.kappa_end,
            "alpha": schedule.alpha,
            "horizon_env_steps": schedule.horizon_env_steps,
        },
    }
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return model_path, sidecar_path


def load_agent(stem: str | Path) -> tuple[HiPTAgent, dict]:
    stem = Path(stem)
    if stem.suffix in (".model", ".json"):
        stem = stem.with_suffix("")
    params = load_model(stem.with_suffix(".model"))
    meta = json.loads(stem.with_suffix(".json").read_text())
    agent = HiPTAgent(params=params, p_min=meta["p_min"], p_max=meta["p_max"])
    if agent.num_priors != meta["num_priors"]:
        raise ValueError("sidecar num_priors disagrees with model spec")
    return agent, meta

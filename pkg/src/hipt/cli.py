"""Command-line entry point.

Commands: train-population, train-hipt, eval, crossplay, bc-train, serve,
replay. Every training/eval command resolves its config (defaults < config
file < flags), creates a timestamped run directory, persists the effective
config beside the outputs, and finishes by writing an integrity manifest.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .agent import HiPTConfig, load_agent, save_agent, train_hipt
from .env import ShapingConfig, bundled_layouts, load_layout
from .env.features import observation_dim
from .evaluation import (
    EvalSuite,
    emit_report,
    evaluate_vs_population,
    split_episodes,
    train_bc,
)
from .env.trajlog import read_episodes, replay_file
from .nets import NetworkSpec, save_model
from .population import (
    PopulationConfig,
    crossplay_matrix,
    load_population,
    save_population,
    train_population,
    write_matrix_csv,
    write_matrix_pgm,
)
from .rl import MetricsLogger, PPOConfig
from .service.config import ConfigError, RunConfig
from .service.runs import create_run_dir, persist_config, write_manifest

log = logging.getLogger(__name__)

COMMANDS = ("train-population", "train-hipt", "eval", "crossplay", "bc-train", "serve", "replay")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hipt",
        description="Hierarchical population training for the two-player kitchen gridworld",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--layout", help="layout name")
        p.add_argument("--seed", type=int)
        p.add_argument("--run-root", help="directory for run outputs")
        p.add_argument("--print-config", action="store_true",
                       help="print the resolved config and exit")

    p = sub.add_parser("train-population", help="train the diverse self-play partner pool")
    common(p)
    p.add_argument("--members", type=int)
    p.add_argument("--steps-per-member", type=int)
    p.add_argument("--jsd-coefficient", type=float)
    p.add_argument("--target-j-sp", type=float)

    p = sub.add_parser("train-hipt", help="train the bi-level agent against a population")
    common(p)
    p.add_argument("--population", dest="population_dir", help="population archive dir")
    p.add_argument("--num-priors", type=int, help="sub-policy count (default per layout)")
    p.add_argument("--total-env-steps", type=int)
    p.add_argument("--kappa-start", type=float)
    p.add_argument("--kappa-end", type=float)
    p.add_argument("--target-eval-return", type=float)

    p = sub.add_parser("eval", help="evaluate a checkpoint against a population")
    common(p)
    p.add_argument("--agent", help="agent checkpoint stem or .model path")
    p.add_argument("--population", dest="population_dir")
    p.add_argument("--episodes", type=int)
    p.add_argument("--method-name", default=None)

    p = sub.add_parser("crossplay", help="pairwise return matrix of a population tier")
    common(p)
    p.add_argument("--population", dest="population_dir")
    p.add_argument("--tier", choices=("full", "mid", "random"))
    p.add_argument("--episodes", type=int)

    p = sub.add_parser("bc-train", help="behavior-clone logged trajectories")
    common(p)
    p.add_argument("--logs", nargs="+", help="trajectory JSONL files")
    p.add_argument("--bc-epochs", type=int)
    p.add_argument("--holdout-fraction", type=float)

    p = sub.add_parser("serve", help="run the live human-play server")
    common(p)
    p.add_argument("--agents", nargs="+", help="agent checkpoints to compare")
    p.add_argument("--port", type=int)
    p.add_argument("--tick-ms", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--human-seat", type=int, choices=(0, 1))
    p.add_argument("--data-dir", default=None)
    p.add_argument("--static-dir", default=None)

    p = sub.add_parser("replay", help="re-simulate a trajectory log and verify digests")
    p.add_argument("trajectory", help="trajectory JSONL file")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    flag_map = {
        "layout": "layout", "seed": "seed", "run_root": "run_root",
        "members": "members", "steps_per_member": "steps_per_member",
        "jsd_coefficient": "jsd_coefficient", "target_j_sp": "target_j_sp",
        "population_dir": "population_dir", "num_priors": "num_priors",
        "total_env_steps": "total_env_steps", "kappa_start": "kappa_start",
        "kappa_end": "kappa_end", "target_eval_return": "target_eval_return",
        "agent": "agent", "episodes": "episodes", "tier": "tier",
        "logs": "logs", "bc_epochs": "bc_epochs", "holdout_fraction": "holdout_fraction",
        "port": "port", "tick_ms": "tick_ms", "horizon": "horizon",
        "rounds": "rounds", "human_seat": "human_seat",
    }
    if getattr(args, "config", None):
        cfg = RunConfig.load(args.config, args.command)
    else:
        cfg = RunConfig(command=args.command)
    flags = {
        dest: getattr(args, attr)
        for attr, dest in flag_map.items()
        if hasattr(args, attr) and getattr(args, attr) is not None
    }
    return cfg.merged_with_flags(flags).resolved()


def _net_spec(cfg: RunConfig, layout) -> NetworkSpec:
    return NetworkSpec(
        input_dim=observation_dim(layout),
        trunk=tuple(cfg.trunk),
        activation=cfg.activation,
        recurrent_dim=cfg.recurrent_dim,
        num_priors=1,
        num_actions=6,
    )


def _ppo(cfg: RunConfig) -> PPOConfig:
    return PPOConfig(
        gamma_disc=cfg.gamma_disc,
        gae_lambda=cfg.gae_lambda,
        clip_eps=cfg.clip_eps,
        value_coef=cfg.value_coef,
        entropy_coef=cfg.entropy_coef,
        minibatch_transitions=cfg.minibatch_transitions,
        epochs=cfg.epochs,
    )


def _shaping(cfg: RunConfig) -> ShapingConfig | None:
    return ShapingConfig() if cfg.shaping else ShapingConfig.disabled()


def cmd_train_population(cfg: RunConfig) -> int:
    layout = load_layout(cfg.layout)
    run_dir = create_run_dir(cfg.run_root, cfg.command, cfg.layout)
    persist_config(run_dir, cfg)
    pcfg = PopulationConfig(
        n_members=cfg.members,
        steps_per_member=cfg.steps_per_member,
        episodes_per_batch=cfg.episodes_per_batch,
        horizon=cfg.horizon,
        lr_start=cfg.lr,
        lr_decay=cfg.lr_decay,
        jsd_coefficient=cfg.jsd_coefficient,
        shaping=_shaping(cfg),
        target_j_sp=cfg.target_j_sp,
    )
    with MetricsLogger(run_dir / "metrics.jsonl") as metrics:
        pop = train_population(layout, pcfg, _ppo(cfg), _net_spec(cfg, layout),
                               seed=cfg.seed, metrics=metrics)
    save_population(run_dir / "population", pop)
    write_manifest(run_dir)
    print(f"population saved under {run_dir}")
    for i, m in enumerate(pop.members):
        print(f"  member {i}: J_SP full {m.j_sp_full:.1f}, mid {m.j_sp_mid:.1f}"
              f"{'' if m.mid_in_band else ' (outside band)'}")
    return 0


def cmd_train_hipt(cfg: RunConfig) -> int:
    if not cfg.population_dir:
        print("train-hipt requires --population", file=sys.stderr)
        return 1
    layout = load_layout(cfg.layout)
    population = load_population(cfg.population_dir)
    run_dir = create_run_dir(cfg.run_root, cfg.command, cfg.layout)
    persist_config(run_dir, cfg)
    hcfg = HiPTConfig(
        num_priors=cfg.num_priors,
        p_min=cfg.p_min,
        p_max=cfg.p_max,
        alpha=cfg.alpha,
        kappa_start=cfg.kappa_start,
        kappa_end=cfg.kappa_end,
        total_env_steps=cfg.total_env_steps,
        episodes_per_batch=cfg.episodes_per_batch,
        horizon=cfg.horizon,
        lr_start=cfg.lr,
        lr_decay=cfg.lr_decay,
        shaping=_shaping(cfg),
        target_eval_return=cfg.target_eval_return,
    )
    with MetricsLogger(run_dir / "metrics.jsonl") as metrics:
        result = train_hipt(population, layout, hcfg, _ppo(cfg), seed=cfg.seed,
                            metrics=metrics)
    save_agent(run_dir / "agent", result.agent, result.env_steps)
    write_manifest(run_dir)
    print(f"agent saved under {run_dir} after {result.env_steps} env steps")
    return 0


def _agent_policy_factory(path: str, cfg: RunConfig):
    from .service.server import load_agent_policy_factory

    return load_agent_policy_factory(path)


def cmd_eval(cfg: RunConfig) -> int:
    if not cfg.agent or not cfg.population_dir:
        print("eval requires --agent and --population", file=sys.stderr)
        return 1
    layout = load_layout(cfg.layout)
    population = load_population(cfg.population_dir)
    agent_id, factory = _agent_policy_factory(cfg.agent, cfg)
    run_dir = create_run_dir(cfg.run_root, cfg.command, cfg.layout)
    persist_config(run_dir, cfg)
    suite = EvalSuite(population=population, episodes=cfg.episodes)
    report = evaluate_vs_population(
        factory, suite, layout, method=Path(agent_id).name, seed=cfg.seed,
        horizon=cfg.horizon,
    )
    csv_blob, text_blob = emit_report(
        report.rows, run_dir / "report.csv", run_dir / "report.txt"
    )
    write_manifest(run_dir)
    print(text_blob, end="")
    print(f"report saved under {run_dir}")
    return 0


def cmd_crossplay(cfg: RunConfig) -> int:
    if not cfg.population_dir:
        print("crossplay requires --population", file=sys.stderr)
        return 1
    layout = load_layout(cfg.layout)
    population = load_population(cfg.population_dir)
    run_dir = create_run_dir(cfg.run_root, cfg.command, cfg.layout)
    persist_config(run_dir, cfg)
    agents = [m.tiers[cfg.tier] for m in population.members]
    labels = [f"m{i}_{cfg.tier}" for i in range(len(agents))]
    matrix = crossplay_matrix(
        agents, layout, episodes_per_pair=cfg.episodes, horizon=cfg.horizon,
        seed=cfg.seed, labels=labels,
    )
    write_matrix_csv(matrix, run_dir / "crossplay.csv")
    write_matrix_pgm(matrix, run_dir / "crossplay.pgm")
    write_manifest(run_dir)
    print(f"crossplay matrix saved under {run_dir}")
    print(np.array2string(matrix.means, precision=1))
    return 0


def cmd_bc_train(cfg: RunConfig) -> int:
    if not cfg.logs:
        print("bc-train requires --logs", file=sys.stderr)
        return 1
    layout = load_layout(cfg.layout)
    episodes = []
    for path in cfg.logs:
        episodes.extend(read_episodes(path))
    train_eps, hold_eps = split_episodes(episodes, cfg.holdout_fraction, seed=cfg.seed)
    run_dir = create_run_dir(cfg.run_root, cfg.command, cfg.layout)
    persist_config(run_dir, cfg)
    model = train_bc(
        train_eps, hold_eps, layout, trunk=tuple(cfg.trunk),
        activation=cfg.activation, epochs=cfg.bc_epochs, seed=cfg.seed,
    )
    save_model(run_dir / "bc.model", model.params)
    stats = {
        "holdout_accuracy": model.holdout_accuracy,
        "dataset_digest": model.dataset_digest,
        "epoch_losses": model.epoch_losses,
        "train_episodes": len(train_eps),
        "holdout_episodes": len(hold_eps),
    }
    (run_dir / "bc_stats.json").write_text(json.dumps(stats, indent=2) + "\n")
    write_manifest(run_dir)
    print(f"held-out accuracy {model.holdout_accuracy:.3f}; model under {run_dir}")
    return 0


def cmd_serve(cfg: RunConfig, args: argparse.Namespace) -> int:
    import uvicorn

    from .service.server import ServeConfig, create_app

    agents = getattr(args, "agents", None)
    if not agents:
        print("serve requires --agents", file=sys.stderr)
        return 1
    data_dir = getattr(args, "data_dir", None) or str(Path(cfg.run_root) / "play_data")
    static_dir = getattr(args, "static_dir", None)
    if static_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    scfg = ServeConfig(
        agents=list(agents),
        layout_name=cfg.layout,
        tick_ms=cfg.tick_ms,
        horizon=cfg.horizon,
        rounds=cfg.rounds,
        human_seat=cfg.human_seat,
        data_dir=data_dir,
        static_dir=static_dir,
        seed=cfg.seed,
    )
    app = create_app(scfg)
    print(f"serving {cfg.layout} on port {cfg.port} (data under {data_dir})")
    uvicorn.run(app, host="0.0.0.0", port=cfg.port, log_level="warning")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    path = Path(args.trajectory)
    if not path.exists():
        print(f"trajectory file not found: {path}", file=sys.stderr)
        return 1
    layouts = bundled_layouts()
    results = replay_file(path, layouts)
    for episode_id, sparse_return in results:
        print(f"{episode_id}: digests OK, return {sparse_return:.0f}")
    print(f"replayed {len(results)} episode(s), all digests match")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            return cmd_replay(args)
        except (KeyError, ValueError, RuntimeError) as exc:
            print(f"replay failed: {exc}", file=sys.stderr)
            return 1
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "print_config", False):
        print(cfg.to_json(), end="")
        return 0
    try:
        if args.command == "train-population":
            return cmd_train_population(cfg)
        if args.command == "train-hipt":
            return cmd_train_hipt(cfg)
        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "crossplay":
            return cmd_crossplay(cfg)
        if args.command == "bc-train":
            return cmd_bc_train(cfg)
        if args.command == "serve":
            return cmd_serve(cfg, args)
    except (FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())

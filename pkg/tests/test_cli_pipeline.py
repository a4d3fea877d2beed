"""End-to-end CLI runs with miniature budgets: population -> crossplay ->
bi-level training -> eval -> bc, all through the real command surface."""

import json
from pathlib import Path

import pytest

from hipt.cli import main
from hipt.service.runs import verify_manifest


@pytest.fixture(scope="module")
def cli_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_runs")
    cfg = {
        "layout": "cramped_room",
        "members": 2,
        "steps_per_member": 4800,
        "episodes_per_batch": 2,
        "horizon": 60,
        "trunk": [16, 16],
        "minibatch_transitions": 120,
        "total_env_steps": 2400,
        "episodes": 1,
        "run_root": str(root),
        "seed": 3,
    }
    cfg_path = root / "tiny.json"
    cfg_path.write_text(json.dumps(cfg))
    return root, str(cfg_path)


def run_dirs(root: Path, command: str) -> list[Path]:
    return sorted(p for p in root.iterdir() if p.is_dir() and command in p.name)


def test_cli_full_pipeline(cli_runs, capsys):
    root, cfg_path = cli_runs

    assert main(["train-population", "--config", cfg_path]) == 0
    pop_dir = run_dirs(root, "train-population")[0] / "population"
    assert (pop_dir / "population.json").exists()
    run_dir = run_dirs(root, "train-population")[0]
    verify_manifest(run_dir)
    assert json.loads((run_dir / "config.json").read_text())["members"] == 2
    assert (run_dir / "metrics.jsonl").stat().st_size > 0

    assert main(["crossplay", "--config", cfg_path, "--population", str(pop_dir)]) == 0
    cp_dir = run_dirs(root, "crossplay")[0]
    assert (cp_dir / "crossplay.csv").exists()
    pgm = (cp_dir / "crossplay.pgm").read_text()
    assert pgm.startswith("P2\n")

    assert main([
        "train-hipt", "--config", cfg_path, "--population", str(pop_dir),
        "--num-priors", "2",
    ]) == 0
    hipt_dir = run_dirs(root, "train-hipt")[0]
    assert (hipt_dir / "agent.model").exists()
    sidecar = json.loads((hipt_dir / "agent.json").read_text())
    assert sidecar["num_priors"] == 2
    assert sidecar["p_min"] == 20 and sidecar["p_max"] == 40
    verify_manifest(hipt_dir)

    assert main([
        "eval", "--config", cfg_path, "--agent", str(hipt_dir / "agent"),
        "--population", str(pop_dir),
    ]) == 0
    eval_dir = run_dirs(root, "eval")[0]
    report = (eval_dir / "report.csv").read_text()
    assert report.splitlines()[0] == "layout,method,partner_type,mean,std,n"
    assert len(report.splitlines()) == 5  # 3 tiers + all + header

    capsys.readouterr()


def test_cli_bc_train(cli_runs, tmp_path, capsys):
    root, cfg_path = cli_runs
    from hipt.env import load_layout, run_episode
    from hipt.env.scripted import TablePolicy, UniformRandomPolicy
    from hipt.env.trajlog import write_episode

    layout = load_layout("cramped_room")
    log_path = tmp_path / "logs.jsonl"
    with open(log_path, "w") as fh:
        for k in range(8):
            res = run_episode(TablePolicy(layout), UniformRandomPolicy(), layout,
                              horizon=40, seed=800 + k, collect_outcomes=True)
            write_episode(fh, f"cli{k}", layout, res)

    assert main([
        "bc-train", "--config", cfg_path, "--logs", str(log_path),
        "--bc-epochs", "6",
    ]) == 0
    bc_dir = run_dirs(root, "bc-train")[0]
    stats = json.loads((bc_dir / "bc_stats.json").read_text())
    assert 0.0 <= stats["holdout_accuracy"] <= 1.0
    assert (bc_dir / "bc.model").exists()
    capsys.readouterr()

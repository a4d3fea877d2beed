"""Skill-tiered crossplay evaluation against a held-out population.

Every pairing is scored with shaping disabled over both seat assignments;
report rows aggregate per partner tier and across all tiers the way the
headline collaboration tables do.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..env.episode import Policy, run_episode
from ..env.layout import Layout
from ..population.types import TIER_NAMES, PartnerPopulation
from ..policies import NetPolicy


@dataclass(frozen=True)
class EvalSuite:
    population: PartnerPopulation  # held out: seeds disjoint from training
    tiers: tuple[str, ...] = TIER_NAMES
    episodes: int = 5
    seats: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        bad = set(self.tiers) - set(TIER_NAMES)
        if bad:
            raise ValueError(f"unknown tiers {bad}")


@dataclass
class EvalRow:
    layout: str
    method: str
    partner_type: str
    mean: float
    std: float
    n: int


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def aggregate(self, layout: str, method: str) -> EvalRow | None:
        for row in self.rows:
            if row.layout == layout and row.method == method and row.partner_type == "all":
                return row
        return None


def evaluate_pair(
    agent_policy_factory,
    partner_policy_factory,
    layout: Layout,
    episodes: int,
    seed: int = 0,
    horizon: int = 400,
) -> tuple[float, float, np.ndarray]:
    """Mean/std of sparse returns over `episodes` per seat assignment (so
    2 x episodes runs), shaping disabled. Factories build fresh policies so
    recurrent state never leaks between runs."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    returns = []
    for seat_pair in (0, 1):
        for k in range(episodes):
            a, b = agent_policy_factory(), partner_policy_factory()
            pair = (a, b) if seat_pair == 0 else (b, a)
            res = run_episode(
                pair[0], pair[1], layout,
                horizon=horizon, shaping=None, seed=seed + 101 * seat_pair + k,
            )
            returns.append(res.sparse_return)
    arr = np.array(returns)
    return float(arr.mean()), float(arr.std()), arr


def evaluate_vs_population(
    agent_policy_factory,
    suite: EvalSuite,
    layout: Layout,
    method: str = "agent",
    seed: int = 0,
    horizon: int = 400,
) -> EvalReport:
    """All members x requested tiers x both seats; rows per tier plus the
    across-everything aggregate row (partner_type = "all")."""
    if suite.population.size == 0:
        raise ValueError("empty evaluation population")
    per_tier: dict[str, list[np.ndarray]] = {t: [] for t in suite.tiers}
    for mi, member in enumerate(suite.population.members):
        for tier in suite.tiers:
            params = member.tiers[tier]
            _, _, arr = evaluate_pair(
                agent_policy_factory,
                lambda p=params: NetPolicy(p),
                layout,
                episodes=suite.episodes,
                seed=seed + 7919 * mi + 131 * TIER_NAMES.index(tier),
                horizon=horizon,
            )
            per_tier[tier].append(arr)

    report = EvalReport()
    all_returns = []
    for tier in suite.tiers:
        arr = np.concatenate(per_tier[tier])
        all_returns.append(arr)
        report.rows.append(
            EvalRow(layout.name, method, tier, float(arr.mean()), float(arr.std()), len(arr))
        )
    everything = np.concatenate(all_returns)
    report.rows.append(
        EvalRow(
            layout.name, method, "all",
            float(everything.mean()), float(everything.std()), len(everything),
        )
    )
    return report

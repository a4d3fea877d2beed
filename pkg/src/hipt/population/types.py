"""Partner population containers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nets import NetworkSpec, ParamStore

TIER_NAMES = ("full", "mid", "random")

# Mid-tier acceptance band around half the fully trained self-play return.
MID_BAND = (0.35, 0.65)


@dataclass
class CheckpointRecord:
    step: int
    params: ParamStore
    j_sp: float  # mean self-play return, shaping disabled


@dataclass
class PopulationMember:
    seed: int
    tiers: dict[str, ParamStore]  # full / mid / random
    j_sp_full: float
    j_sp_mid: float
    mid_in_band: bool = True

    def tier(self, name: str) -> ParamStore:
        return self.tiers[name]


@dataclass
class PartnerPopulation:
    layout_name: str
    spec: NetworkSpec
    members: list[PopulationMember] = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) not in (0,) and len(self.members) < 2:
            raise ValueError("a partner population needs at least 2 members")

    @property
    def size(self) -> int:
        return len(self.members)

    def entries(self) -> list[tuple[int, str, ParamStore]]:
        """All size x 3 partner entries in a fixed order for uniform draws."""
        out = []
        for i, m in enumerate(self.members):
            for tier in TIER_NAMES:
                out.append((i, tier, m.tiers[tier]))
        return out

    def seeds(self) -> list[int]:
        return [m.seed for m in self.members]


def select_mid_checkpoint(
    records: list[CheckpointRecord], j_sp_full: float
) -> tuple[CheckpointRecord, bool]:
    """Checkpoint whose measured return is nearest to half the final one.

    Returns (record, in_band) where in_band reports whether it landed within
    the acceptance band; callers log a warning when it did not.
    """
    if not records:
        raise ValueError("no checkpoints recorded")
    target = 0.5 * j_sp_full
    best = min(records, key=lambda r: abs(r.j_sp - target))
    if j_sp_full <= 0.0:
        return best, False
    frac = best.j_sp / j_sp_full
    return best, bool(MID_BAND[0] <= frac <= MID_BAND[1])


@dataclass
class CrossplayMatrix:
    agent_labels: list[str]
    means: np.ndarray  # (M, M)
    stds: np.ndarray  # (M, M)
    episodes_per_cell: int

    def __post_init__(self):
        if self.means.shape[0] != self.means.shape[1]:
            raise ValueError("crossplay matrix must be square")

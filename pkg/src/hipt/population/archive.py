"""Population archive: manifest + one model file per member tier.

The manifest carries seeds, the self-play return table and a sha256 per
file; loads refuse any checksum mismatch.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..nets import NetworkSpec, load_model, save_model
from .types import TIER_NAMES, PartnerPopulation, PopulationMember

MANIFEST_NAME = "population.json"


class ArchiveError(RuntimeError):
    pass


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def save_population(directory: str | Path, pop: PartnerPopulation) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    members = []
    checksums = {}
    for i, m in enumerate(pop.members):
        files = {}
        for tier in TIER_NAMES:
            fname = f"member{i:02d}_{tier}.model"
            save_model(directory / fname, m.tiers[tier])
            files[tier] = fname
            checksums[fname] = _file_sha256(directory / fname)
        members.append(
            {
                "seed": m.seed,
                "j_sp_full": m.j_sp_full,
                "j_sp_mid": m.j_sp_mid,
                "mid_in_band": m.mid_in_band,
                "files": files,
            }
        )
    manifest = {
        "format": 1,
        "layout": pop.layout_name,
        "spec": pop.spec.to_dict(),
        "members": members,
        "checksums": checksums,
    }
    (directory / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_population(directory: str | Path) -> PartnerPopulation:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise ArchiveError(f"no {MANIFEST_NAME} in {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    for fname, expected in manifest["checksums"].items():
        actual = _file_sha256(directory / fname)
        if actual != expected:
            raise ArchiveError(f"{fname}: checksum mismatch, refusing to load")
    members = []
    for entry in manifest["members"]:
        tiers = {
            tier: load_model(directory / entry["files"][tier]) for tier in TIER_NAMES
        }
        members.append(
            PopulationMember(
                seed=entry["seed"],
                tiers=tiers,
                j_sp_full=entry["j_sp_full"],
                j_sp_mid=entry["j_sp_mid"],
                mid_in_band=entry.get("mid_in_band", True),
            )
        )
    return PartnerPopulation(
        layout_name=manifest["layout"],
        spec=NetworkSpec.from_dict(manifest["spec"]),
        members=members,
    )

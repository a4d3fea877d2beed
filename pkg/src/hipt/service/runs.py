"""Run directories: timestamped layout, persisted config, integrity manifest."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from .config import RunConfig

MANIFEST_NAME = "manifest.json"


class ManifestError(RuntimeError):
    pass


def create_run_dir(root: str | Path, command: str, tag: str | None = None) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    name = f"{stamp}-{command}" + (f"-{tag}" if tag else "")
    path = Path(root) / name
    suffix = 0
    while path.exists():
        suffix += 1
        path = Path(root) / f"{name}.{suffix}"
    path.mkdir(parents=True)
    return path


def persist_config(run_dir: str | Path, cfg: RunConfig) -> Path:
    path = Path(run_dir) / "config.json"
    path.write_text(cfg.to_json(), encoding="utf-8")
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(run_dir: str | Path) -> Path:
    """Checksum every file under the run dir (manifest excluded)."""
    run_dir = Path(run_dir)
    files = {}
    for p in sorted(run_dir.rglob("*")):
        if p.is_file() and p.name != MANIFEST_NAME:
            files[str(p.relative_to(run_dir))] = _sha256(p)
    manifest = {"format": 1, "files": files}
    out = run_dir / MANIFEST_NAME
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def verify_manifest(run_dir: str | Path) -> list[str]:
    """Returns the verified file list; raises ManifestError on any mismatch,
    missing file, or file present but unlisted."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise ManifestError(f"missing {MANIFEST_NAME} under {run_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    listed = manifest["files"]
    present = {
        str(p.relative_to(run_dir))
        for p in run_dir.rglob("*")
        if p.is_file() and p.name != MANIFEST_NAME
    }
    missing = set(listed) - present
    extras = present - set(listed)
    if missing:
        raise ManifestError(f"files listed but absent: {sorted(missing)}")
    if extras:
        raise ManifestError(f"files present but unlisted: {sorted(extras)}")
    for rel, expected in listed.items():
        actual = _sha256(run_dir / rel)
        if actual != expected:
            raise ManifestError(f"{rel}: checksum mismatch")
    return sorted(listed)

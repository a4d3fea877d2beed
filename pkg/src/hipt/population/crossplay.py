"""Pairwise crossplay returns, play-style classification, heatmap output."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..env.episode import run_episode
from ..env.layout import Layout
from ..nets import ParamStore
from ..policies import NetPolicy
from .types import CrossplayMatrix


def pair_mean_return(
    params_a: ParamStore,
    params_b: ParamStore,
    layout: Layout,
    episodes: int,
    horizon: int,
    seed: int,
) -> np.ndarray:
    """Sparse returns of `episodes` runs with a in seat 0 and b in seat 1."""
    returns = np.zeros(episodes)
    for k in range(episodes):
        res = run_episode(
            NetPolicy(params_a), NetPolicy(params_b), layout,
            horizon=horizon, shaping=None, seed=seed + k,
        )
        returns[k] = res.sparse_return
    return returns


def crossplay_matrix(
    agents: list[ParamStore],
    layout: Layout,
    episodes_per_pair: int = 5,
    horizon: int = 400,
    seed: int = 0,
    labels: list[str] | None = None,
) -> CrossplayMatrix:
    """Mean return per ordered-pair cell, averaged over both seat
    assignments; the diagonal is plain self-play. Deterministic given seed."""
    if episodes_per_pair < 1:
        raise ValueError("need at least one episode per pair")
    M = len(agents)
    means = np.zeros((M, M))
    stds = np.zeros((M, M))
    for i in range(M):
        for j in range(i, M):
            fwd = pair_mean_return(
                agents[i], agents[j], layout, episodes_per_pair, horizon,
                seed=seed + 997 * (i * M + j),
            )
            if i == j:
                pooled = fwd
            else:
                rev = pair_mean_return(
                    agents[j], agents[i], layout, episodes_per_pair, horizon,
                    seed=seed + 997 * (j * M + i),
                )
                pooled = np.concatenate([fwd, rev])
            means[i, j] = means[j, i] = pooled.mean()
            stds[i, j] = stds[j, i] = pooled.std()
    return CrossplayMatrix(
        agent_labels=labels or [f"agent{i}" for i in range(M)],
        means=means,
        stds=stds,
        episodes_per_cell=episodes_per_pair,
    )


def classify_play_styles(matrix: CrossplayMatrix, tolerance: float = 0.2) -> list[list[int]]:
    """Partition agents into best-response classes.

    Agents i and j share a class when their crossplay return matches both
    self-play returns, and the self-play returns match each other, all
    within tolerance * min(J_SP_i, J_SP_j). Classes are connected components
    of that agreement graph, reported as sorted index lists.
    """
    M = matrix.means.shape[0]
    if M == 0:
        raise ValueError("empty crossplay matrix")
    j_sp = np.diag(matrix.means)
    adj: list[set[int]] = [set() for _ in range(M)]
    for i in range(M):
        for j in range(i + 1, M):
            slack = tolerance * min(j_sp[i], j_sp[j])
            cross = matrix.means[i, j]
            if (
                abs(cross - j_sp[i]) <= slack
                and abs(cross - j_sp[j]) <= slack
                and abs(j_sp[i] - j_sp[j]) <= slack
            ):
                adj[i].add(j)
                adj[j].add(i)
    seen: set[int] = set()
    classes: list[list[int]] = []
    for start in range(M):
        if start in seen:
            continue
        stack, component = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            component.append(node)
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        classes.append(sorted(component))
    return classes


def write_matrix_csv(matrix: CrossplayMatrix, path: str | Path) -> None:
    lines = ["agent," + ",".join(matrix.agent_labels)]
    for label, row in zip(matrix.agent_labels, matrix.means):
        lines.append(label + "," + ",".join(f"{v:.6g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_matrix_pgm(matrix: CrossplayMatrix, path: str | Path, cell_px: int = 24) -> None:
    """Grayscale heatmap, lighter = higher pairwise return."""
    m = matrix.means
    top = m.max()
    norm = m / top if top > 0 else np.zeros_like(m)
    pixels = (norm * 255).astype(int)
    M = m.shape[0]
    rows = []
    for i in range(M):
        line = " ".join(
            " ".join([str(pixels[i, j])] * cell_px) for j in range(M)
        )
        rows.extend([line] * cell_px)
    header = f"P2\n{M * cell_px} {M * cell_px}\n255\n"
    Path(path).write_text(header + "\n".join(rows) + "\n", encoding="utf-8")

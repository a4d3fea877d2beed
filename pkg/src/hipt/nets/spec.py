"""Network shape descriptor and flat parameter layout.

One network serves every agent kind: a fully connected trunk, an optional
gated recurrent cell, and four linear heads — prior logits and a prior
value over the |Z| sub-policy priors, plus action logits and a value that
additionally see a one-hot prior appended to their input. A flat agent is
the |Z| = 1 special case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int
    trunk: tuple[int, ...] = (64, 64)
    activation: str = "tanh"
    recurrent_dim: int | None = None
    num_priors: int = 1
    num_actions: int = 6

    def __post_init__(self):
        if self.input_dim < 1 or any(w < 1 for w in self.trunk):
            raise ValueError("all widths must be >= 1")
        if self.recurrent_dim is not None and self.recurrent_dim < 1:
            raise ValueError("recurrent_dim must be >= 1 or None")
        if self.num_priors < 1 or self.num_actions < 2:
            raise ValueError("need num_priors >= 1 and num_actions >= 2")
        if self.activation not in ("tanh", "relu"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def trunk_out_dim(self) -> int:
        return self.trunk[-1] if self.trunk else self.input_dim

    @property
    def feature_dim(self) -> int:
        return self.recurrent_dim if self.recurrent_dim is not None else self.trunk_out_dim

    @property
    def low_in_dim(self) -> int:
        return self.feature_dim + self.num_priors

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "trunk": list(self.trunk),
            "activation": self.activation,
            "recurrent_dim": self.recurrent_dim,
            "num_priors": self.num_priors,
            "num_actions": self.num_actions,
        }

    @staticmethod
    def from_dict(d: dict) -> "NetworkSpec":
        return NetworkSpec(
            input_dim=int(d["input_dim"]),
            trunk=tuple(d["trunk"]),
            activation=d["activation"],
            recurrent_dim=d["recurrent_dim"],
            num_priors=int(d["num_priors"]),
            num_actions=int(d["num_actions"]),
        )


# Heads whose initial weights are shrunk so starting policies are near-uniform.
POLICY_HEADS = ("head_high_W", "head_low_W")


def param_table(spec: NetworkSpec) -> list[tuple[str, tuple[int, ...]]]:
    """Named tensors in layout order; slices tile the flat vector exactly."""
    table: list[tuple[str, tuple[int, ...]]] = []
    prev = spec.input_dim
    for i, width in enumerate(spec.trunk):
        table.append((f"trunk_W{i}", (prev, width)))
        table.append((f"trunk_b{i}", (width,)))
        prev = width
    if spec.recurrent_dim is not None:
        hid = spec.recurrent_dim
        for gate in ("u", "c"):
            table.append((f"rec_W{gate}", (prev, hid)))
            table.append((f"rec_U{gate}", (hid, hid)))
            table.append((f"rec_b{gate}", (hid,)))
    feat = spec.feature_dim
    low_in = spec.low_in_dim
    table.append(("head_high_W", (feat, spec.num_priors)))
    table.append(("head_high_b", (spec.num_priors,)))
    table.append(("head_vhigh_W", (feat, 1)))
    table.append(("head_vhigh_b", (1,)))
    table.append(("head_low_W", (low_in, spec.num_actions)))
    table.append(("head_low_b", (spec.num_actions,)))
    table.append(("head_vlow_W", (low_in, 1)))
    table.append(("head_vlow_b", (1,)))
    return table


def param_count(spec: NetworkSpec) -> int:
    return sum(int(np.prod(shape)) for _, shape in param_table(spec))


@dataclass
class ParamStore:
    """Flat float64 parameter vector plus named views into it.

    Views alias the vector: in-place updates to `vector` are the single
    mutation path, and they happen only in the single-writer update phase.
    """

    spec: NetworkSpec
    vector: np.ndarray
    views: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.views:
            self._rebuild_views()

    def _rebuild_views(self):
        self.views = {}
        offset = 0
        for name, shape in param_table(self.spec):
            size = int(np.prod(shape))
            self.views[name] = self.vector[offset : offset + size].reshape(shape)
            offset += size
        if offset != self.vector.size:
            raise ValueError(f"vector length {self.vector.size} != layout size {offset}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.views[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        view = self.views[name]
        if value is not view:  # in-place `store[k] += v` already mutated the view
            view[:] = value

    @property
    def size(self) -> int:
        return self.vector.size

    def copy(self) -> "ParamStore":
        return ParamStore(self.spec, self.vector.copy())

    def replace_vector(self, vector: np.ndarray) -> None:
        if vector.shape != self.vector.shape:
            raise ValueError("replacement vector has wrong length")
        self.vector[:] = vector


def init_params(spec: NetworkSpec, seed: int) -> ParamStore:
    """Fan-in-scaled uniform weights, zero biases, 0.01-scaled policy heads."""
    rng = np.random.default_rng(seed)
    chunks = []
    for name, shape in param_table(spec):
        if len(shape) == 1:  # biases
            chunks.append(np.zeros(shape))
            continue
        bound = 1.0 / np.sqrt(shape[0])
        w = rng.uniform(-bound, bound, size=shape)
        if name in POLICY_HEADS:
            w *= 0.01
        chunks.append(w)
    vector = np.concatenate([c.ravel() for c in chunks])
    return ParamStore(spec, vector)


def zero_gradient(spec: NetworkSpec) -> np.ndarray:
    return np.zeros(param_count(spec))

"""Batched forward and exact reverse-mode backward passes.

Only the fixed network family in `NetworkSpec` is supported — a trunk of
dense layers, an optional update-gate recurrent cell

    u = sigmoid(x Wu + h Uu + bu)
    c = tanh(x Wc + h Uc + bc)
    h' = (1 - u) * h + u * c

and four linear heads. Forward caches every intermediate needed for an
exact gradient; `backward_step` consumes head cotangents (plus the next
step's dh for BPTT) and accumulates into a flat gradient vector congruent
with the parameter vector.

All math is float64. Softmax and log-softmax are shifted by the row max for
stability; probabilities sum to 1 within 1e-12.
"""

from __future__ import annotations

import numpy as np

from .spec import NetworkSpec, ParamStore


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def one_hot(indices: np.ndarray, depth: int) -> np.ndarray:
    indices = np.asarray(indices)
    out = np.zeros((indices.size, depth))
    out[np.arange(indices.size), indices.ravel()] = 1.0
    return out


def init_recurrent_state(spec: NetworkSpec, batch: int) -> np.ndarray | None:
    if spec.recurrent_dim is None:
        return None
    return np.zeros((batch, spec.recurrent_dim))


def forward(
    params: ParamStore,
    spec: NetworkSpec,
    x: np.ndarray,
    h: np.ndarray | None = None,
    z: np.ndarray | None = None,
    need_cache: bool = False,
):
    """One step over a batch.

    x: (B, input_dim); h: (B, hid) or None; z: (B,) prior indices or None.
    Returns (outputs, h_new, cache). Outputs always include high_logits and
    value_high; low_logits and value_low are present iff z is given.
    """
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ValueError(f"input shape {x.shape} != (B, {spec.input_dim})")
    B = x.shape[0]
    acts: list[np.ndarray] = []
    a = x
    for i in range(len(spec.trunk)):
        pre = a @ params[f"trunk_W{i}"] + params[f"trunk_b{i}"]
        a = np.tanh(pre) if spec.activation == "tanh" else np.maximum(pre, 0.0)
        acts.append(a)

    cache: dict | None = {"x": x, "acts": acts} if need_cache else None

    if spec.recurrent_dim is not None:
        if h is None:
            h = np.zeros((B, spec.recurrent_dim))
        u = _sigmoid(a @ params["rec_Wu"] + h @ params["rec_Uu"] + params["rec_bu"])
        c = np.tanh(a @ params["rec_Wc"] + h @ params["rec_Uc"] + params["rec_bc"])
        h_new = (1.0 - u) * h + u * c
        feat = h_new
        if need_cache:
            cache.update(h_prev=h, u=u, c=c)
    else:
        h_new = None
        feat = a

    outputs = {
        "high_logits": feat @ params["head_high_W"] + params["head_high_b"],
        "value_high": (feat @ params["head_vhigh_W"])[:, 0] + params["head_vhigh_b"][0],
    }
    low_in = None
    if z is not None:
        z_onehot = one_hot(np.asarray(z), spec.num_priors)
        low_in = np.concatenate([feat, z_onehot], axis=1)
        outputs["low_logits"] = low_in @ params["head_low_W"] + params["head_low_b"]
        outputs["value_low"] = (low_in @ params["head_vlow_W"])[:, 0] + params["head_vlow_b"][0]
    if need_cache:
        cache.update(feat=feat, low_in=low_in)
    return outputs, h_new, cache


def low_logits_all_priors(params: ParamStore, spec: NetworkSpec, feat: np.ndarray) -> np.ndarray:
    """Action logits for every prior at once: (B, Z, A).

    Exploits the one-hot structure: appending prior z to the head input just
    adds row feature_dim + z of the weight matrix.
    """
    W = params["head_low_W"]
    base = feat @ W[: spec.feature_dim] + params["head_low_b"]
    return base[:, None, :] + W[spec.feature_dim :][None, :, :]


def backward_step(
    params: ParamStore,
    spec: NetworkSpec,
    cache: dict,
    cotangents: dict,
    grad: ParamStore,
    d_h_new: np.ndarray | None = None,
) -> np.ndarray | None:
    """Accumulate one step's parameter gradient; returns dL/dh_prev.

    `cotangents` may contain d_high_logits (B,Z), d_value_high (B,),
    d_low_logits (B,A), d_value_low (B,). `grad` is a ParamStore over the
    flat gradient vector, accumulated in place.
    """
    gview = grad
    feat = cache["feat"]
    B = feat.shape[0]
    d_feat = np.zeros_like(feat)

    g = cotangents.get("d_high_logits")
    if g is not None:
        gview["head_high_W"] += feat.T @ g
        gview["head_high_b"] += g.sum(axis=0)
        d_feat += g @ params["head_high_W"].T
    g = cotangents.get("d_value_high")
    if g is not None:
        gview["head_vhigh_W"][:, 0] += feat.T @ g
        gview["head_vhigh_b"][0] += g.sum()
        d_feat += g[:, None] * params["head_vhigh_W"][:, 0]

    low_in = cache.get("low_in")
    if low_in is not None:
        d_low_in = np.zeros_like(low_in)
        g = cotangents.get("d_low_logits")
        if g is not None:
            gview["head_low_W"] += low_in.T @ g
            gview["head_low_b"] += g.sum(axis=0)
            d_low_in += g @ params["head_low_W"].T
        g = cotangents.get("d_value_low")
        if g is not None:
            gview["head_vlow_W"][:, 0] += low_in.T @ g
            gview["head_vlow_b"][0] += g.sum()
            d_low_in += g[:, None] * params["head_vlow_W"][:, 0]
        d_feat += d_low_in[:, : spec.feature_dim]
    elif "d_low_logits" in cotangents or "d_value_low" in cotangents:
        raise ValueError("low-head cotangents supplied but forward ran without z")

    if d_h_new is not None:
        d_feat = d_feat + d_h_new

    if spec.recurrent_dim is not None:
        h_prev, u, c = cache["h_prev"], cache["u"], cache["c"]
        trunk_out = cache["acts"][-1] if spec.trunk else cache["x"]
        dh = d_feat
        da_u = dh * (c - h_prev) * u * (1.0 - u)
        da_c = dh * u * (1.0 - c * c)
        gview["rec_Wu"] += trunk_out.T @ da_u
        gview["rec_Uu"] += h_prev.T @ da_u
        gview["rec_bu"] += da_u.sum(axis=0)
        gview["rec_Wc"] += trunk_out.T @ da_c
        gview["rec_Uc"] += h_prev.T @ da_c
        gview["rec_bc"] += da_c.sum(axis=0)
        d_trunk = da_u @ params["rec_Wu"].T + da_c @ params["rec_Wc"].T
        d_h_prev = dh * (1.0 - u) + da_u @ params["rec_Uu"].T + da_c @ params["rec_Uc"].T
    else:
        d_trunk = d_feat
        d_h_prev = None

    da = d_trunk
    for i in reversed(range(len(spec.trunk))):
        a = cache["acts"][i]
        if spec.activation == "tanh":
            dpre = da * (1.0 - a * a)
        else:
            dpre = da * (a > 0.0)
        inp = cache["acts"][i - 1] if i > 0 else cache["x"]
        gview[f"trunk_W{i}"] += inp.T @ dpre
        gview[f"trunk_b{i}"] += dpre.sum(axis=0)
        da = dpre @ params[f"trunk_W{i}"].T
    return d_h_prev

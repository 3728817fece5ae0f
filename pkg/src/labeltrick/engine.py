"""A small message-passing engine in numpy with hand-written backprop.

Node inputs are label embeddings (optionally concatenated with node
features), followed by GCN or GIN layers, a readout over the target nodes or
the whole (sub)graph, and a two-layer MLP head producing one logit.
"""

from __future__ import annotations

import copy
import json
import os
import struct
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .graph import Graph, Subgraph
from .labeling import UNREACHABLE, NodeLabels

DEBUG = bool(os.environ.get("LABELTRICK_DEBUG"))

READOUTS = ("center-hadamard", "center-concat", "sum", "sortpool")
LAYER_KINDS = ("gcn", "gin")


class NumericError(FloatingPointError):
    pass


class TrainingError(RuntimeError):
    pass


def _finite(name: str, a: np.ndarray):
    if DEBUG and not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite values after {name}")


def _act(name: str, z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) if name == "relu" else z


def _act_grad(name: str, z: np.ndarray, dout: np.ndarray) -> np.ndarray:
    return dout * (z > 0) if name == "relu" else dout


# -------------------------------------------------------------------------- specs


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_dim: int
    out_dim: int
    gin_eps: float = 0.0
    activation: str = "relu"

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError("layer dims must be >= 1")
        if self.activation not in ("relu", "identity"):
            raise ValueError(f"unknown activation {self.activation!r}")

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        if self.kind == "gcn":
            return {"W": (self.in_dim, self.out_dim), "b": (self.out_dim,)}
        return {"W1": (self.in_dim, self.out_dim), "b1": (self.out_dim,),
                "W2": (self.out_dim, self.out_dim), "b2": (self.out_dim,)}


@dataclass(frozen=True)
class ModelSpec:
    num_labels: int
    embed_dim: int = 16
    feature_dim: int = 0
    layer_kind: str = "gcn"
    hidden_dim: int = 32
    num_layers: int = 3
    readout: str = "center-hadamard"
    sortpool_k: int = 10
    head_hidden: int = 32
    gin_eps: float = 0.0
    vector_labels: bool = False

    def __post_init__(self):
        if self.readout not in READOUTS:
            raise ValueError(f"unknown readout {self.readout!r}")
        if self.num_layers < 1 or self.sortpool_k < 1 or self.num_labels < 1:
            raise ValueError("num_layers, sortpool_k and num_labels must be >= 1")

    @property
    def input_dim(self) -> int:
        return self.embed_dim + self.feature_dim

    def layers(self) -> list[LayerSpec]:
        dims = [self.input_dim] + [self.hidden_dim] * self.num_layers
        return [LayerSpec(self.layer_kind, dims[i], dims[i + 1], self.gin_eps,
                          "relu" if i < self.num_layers - 1 else "identity")
                for i in range(self.num_layers)]

    @property
    def readout_dim(self) -> int:
        return {"center-hadamard": self.hidden_dim, "center-concat": 2 * self.hidden_dim,
                "sum": self.hidden_dim, "sortpool": self.sortpool_k * self.hidden_dim}[self.readout]

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {"embedding": (self.num_labels, self.embed_dim)}
        for i, layer in enumerate(self.layers()):
            shapes.update({f"layer{i}.{k}": s for k, s in layer.param_shapes().items()})
        shapes.update({"head.W1": (self.readout_dim, self.head_hidden), "head.b1": (self.head_hidden,),
                       "head.W2": (self.head_hidden,), "head.b2": (1,)})
        return shapes


@dataclass
class Model:
    spec: ModelSpec
    params: dict[str, np.ndarray]

    @classmethod
    def init(cls, spec: ModelSpec, rng: np.random.Generator) -> "Model":
        """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.

        Embedding rows count as fan_in 1 (one active one-hot entry).
        """
        params = {}
        for name, shape in spec.param_shapes().items():
            if name.endswith(("b", "b1", "b2")) and name != "embedding":
                params[name] = np.zeros(shape)
            else:
                fan_in = 1 if name == "embedding" else shape[0]
                bound = 1.0 / np.sqrt(fan_in)
                params[name] = rng.uniform(-bound, bound, size=shape)
        return cls(spec, params)

    def copy(self) -> "Model":
        return Model(self.spec, {k: v.copy() for k, v in self.params.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def layer_params(self, i: int) -> dict[str, np.ndarray]:
        prefix = f"layer{i}."
        return {k[len(prefix):]: v for k, v in self.params.items() if k.startswith(prefix)}


# -------------------------------------------------------------------- operators


def gcn_operator(g: Graph) -> np.ndarray:
    """D^-1/2 (A + I) D^-1/2 with degrees counted including the self-loop."""
    a = g.dense_adjacency() + np.eye(g.num_nodes)
    inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


class GraphOps:
    """Dense propagation matrices for one graph, built on demand."""

    def __init__(self, g: Graph):
        self.graph = g

    @cached_property
    def gcn(self) -> np.ndarray:
        return gcn_operator(self.graph)

    @cached_property
    def adjacency(self) -> np.ndarray:
        return self.graph.dense_adjacency()

    def for_kind(self, kind: str) -> np.ndarray:
        return self.gcn if kind == "gcn" else self.adjacency


@dataclass(eq=False)
class LinkExample:
    """A labeled (sub)graph with its two target nodes in local ids."""

    graph: Graph
    targets: tuple[int, ...]
    labels: NodeLabels
    parent_link: tuple[int, int] | None = None

    @classmethod
    def from_subgraph(cls, sg: Subgraph, labels: NodeLabels) -> "LinkExample":
        link = tuple(sg.parent_ids[t] for t in sg.targets)
        return cls(sg.graph, sg.targets, labels, link)

    @cached_property
    def ops(self) -> GraphOps:
        return GraphOps(self.graph)

    @cached_property
    def tie_keys(self) -> list[tuple]:
        """Secondary sortpool keys: (label, degree, local id)."""
        keys = self.labels.keys()
        return [(keys[i], self.graph.degree(i), i) for i in range(self.graph.num_nodes)]


# ------------------------------------------------------------------------ input


def _label_rows(spec: ModelSpec, labels: NodeLabels) -> np.ndarray:
    codes = labels.values
    rows = spec.num_labels
    if labels.vector:
        limit = rows - 1  # last row reserved for unreachable
        idx = np.where(codes == UNREACHABLE, rows - 1, codes)
        bad = (codes != UNREACHABLE) & ((codes < 0) | (codes >= limit))
    else:
        idx = codes
        bad = (codes < 0) | (codes >= rows)
    if np.any(bad):
        raise IndexError(f"label code {int(codes[bad][0])} outside embedding table of {rows} rows")
    return idx


def build_input(sg: Subgraph | LinkExample | Graph, labels: NodeLabels, model: Model) -> np.ndarray:
    """Row i = embedding(label_i) ++ feature row i; vector labels sum their embeddings."""
    graph = sg if isinstance(sg, Graph) else sg.graph
    idx = _label_rows(model.spec, labels)
    table = model.params["embedding"]
    emb = table[idx].sum(axis=1) if labels.vector else table[idx]
    if model.spec.feature_dim:
        if graph.features is None or graph.features.shape[1] != model.spec.feature_dim:
            raise ValueError("model expects node features of dim %d" % model.spec.feature_dim)
        emb = np.concatenate([emb, graph.features], axis=1)
    _finite("input", emb)
    return emb


def _input_backward(model: Model, labels: NodeLabels, dX: np.ndarray, grads: dict):
    idx = _label_rows(model.spec, labels)
    d_emb = dX[:, :model.spec.embed_dim]
    if labels.vector:
        for c in range(idx.shape[1]):
            np.add.at(grads["embedding"], idx[:, c], d_emb)
    else:
        np.add.at(grads["embedding"], idx, d_emb)


# ----------------------------------------------------------------------- layers


def _layer_forward(spec: LayerSpec, p: dict, prop: np.ndarray, H: np.ndarray):
    if H.shape[1] != spec.in_dim:
        raise ValueError(f"layer expects {spec.in_dim} input channels, got {H.shape[1]}")
    if spec.kind == "gcn":
        m = prop @ H
        z = m @ p["W"] + p["b"]
        out = _act(spec.activation, z)
        cache = (m, z)
    else:
        m = (1.0 + spec.gin_eps) * H + prop @ H
        z1 = m @ p["W1"] + p["b1"]
        a1 = np.maximum(z1, 0.0)
        z2 = a1 @ p["W2"] + p["b2"]
        out = _act(spec.activation, z2)
        cache = (m, z1, a1, z2)
    _finite(f"{spec.kind} layer", out)
    return out, cache


def _layer_backward(spec: LayerSpec, p: dict, prop: np.ndarray, cache, dout: np.ndarray,
                    grads: dict, prefix: str) -> np.ndarray:
    if spec.kind == "gcn":
        m, z = cache
        dz = _act_grad(spec.activation, z, dout)
        grads[prefix + "W"] += m.T @ dz
        grads[prefix + "b"] += dz.sum(axis=0)
        dm = dz @ p["W"].T
        return prop.T @ dm
    m, z1, a1, z2 = cache
    dz2 = _act_grad(spec.activation, z2, dout)
    grads[prefix + "W2"] += a1.T @ dz2
    grads[prefix + "b2"] += dz2.sum(axis=0)
    dz1 = (dz2 @ p["W2"].T) * (z1 > 0)
    grads[prefix + "W1"] += m.T @ dz1
    grads[prefix + "b1"] += dz1.sum(axis=0)
    dm = dz1 @ p["W1"].T
    return (1.0 + spec.gin_eps) * dm + prop.T @ dm


def layer_forward(spec: LayerSpec, sg: Subgraph | Graph, H: np.ndarray,
                  params: dict[str, np.ndarray]) -> np.ndarray:
    """One message-passing layer over ``sg`` with explicit parameters."""
    graph = sg if isinstance(sg, Graph) else sg.graph
    if H.shape[0] != graph.num_nodes:
        raise ValueError("H must have one row per node")
    prop = gcn_operator(graph) if spec.kind == "gcn" else graph.dense_adjacency()
    return _layer_forward(spec, params, prop, H)[0]


def encode(model: Model, ops: GraphOps, X: np.ndarray):
    caches = []
    H = X
    for i, layer in enumerate(model.spec.layers()):
        H, cache = _layer_forward(layer, model.layer_params(i), ops.for_kind(layer.kind), H)
        caches.append(cache)
    return H, caches


def encode_backward(model: Model, ops: GraphOps, caches, dH: np.ndarray, grads: dict) -> np.ndarray:
    layers = model.spec.layers()
    for i in reversed(range(len(layers))):
        layer = layers[i]
        dH = _layer_backward(layer, model.layer_params(i), ops.for_kind(layer.kind),
                             caches[i], dH, grads, f"layer{i}.")
    return dH


# ---------------------------------------------------------------------- readout


def sortpool_order(H: np.ndarray, tie_keys: Sequence[tuple]) -> list[int]:
    """Rows by descending last channel; ties broken by (label, degree, local id)."""
    last = H[:, -1]
    return sorted(range(H.shape[0]), key=lambda i: (-last[i],) + tuple(tie_keys[i]))


def _readout(spec: ModelSpec, H: np.ndarray, targets: Sequence[int], tie_keys=None):
    kind = spec.readout
    if kind == "center-hadamard":
        x, y = targets
        return H[x] * H[y], None
    if kind == "center-concat":
        x, y = targets
        return np.concatenate([H[x], H[y]]), None
    if kind == "sum":
        return H.sum(axis=0), None
    if H.shape[0] == 0:
        raise ValueError("sortpool readout on an empty subgraph")
    if tie_keys is None:
        tie_keys = [(i,) for i in range(H.shape[0])]
    order = sortpool_order(H, tie_keys)[:spec.sortpool_k]
    out = np.zeros((spec.sortpool_k, H.shape[1]))
    out[:len(order)] = H[order]
    return out.ravel(), order


def _readout_backward(spec: ModelSpec, H: np.ndarray, targets, cache, dr: np.ndarray) -> np.ndarray:
    dH = np.zeros_like(H)
    kind = spec.readout
    if kind == "center-hadamard":
        x, y = targets
        dH[x] += dr * H[y]
        dH[y] += dr * H[x]
    elif kind == "center-concat":
        x, y = targets
        d = H.shape[1]
        dH[x] += dr[:d]
        dH[y] += dr[d:]
    elif kind == "sum":
        dH += dr[None, :]
    else:
        order = cache
        dH[order] += dr.reshape(spec.sortpool_k, H.shape[1])[:len(order)]
    return dH


def _head(model: Model, r: np.ndarray):
    p = model.params
    z1 = r @ p["head.W1"] + p["head.b1"]
    a1 = np.maximum(z1, 0.0)
    logit = float(a1 @ p["head.W2"] + p["head.b2"][0])
    return logit, (r, z1, a1)


def _head_backward(model: Model, cache, dlogit: float, grads: dict) -> np.ndarray:
    r, z1, a1 = cache
    p = model.params
    grads["head.W2"] += dlogit * a1
    grads["head.b2"] += dlogit
    dz1 = dlogit * p["head.W2"] * (z1 > 0)
    grads["head.W1"] += np.outer(r, dz1)
    grads["head.b1"] += dz1
    return p["head.W1"] @ dz1


def readout_and_score(model: Model, sg: Subgraph | LinkExample, H_final: np.ndarray) -> float:
    tie_keys = sg.tie_keys if isinstance(sg, LinkExample) else None
    r, _ = _readout(model.spec, H_final, sg.targets, tie_keys)
    logit, _ = _head(model, r)
    if not np.isfinite(logit):
        raise NumericError("non-finite logit")
    return logit


# ------------------------------------------------------------- SEAL-style scoring


def _forward(model: Model, ex: LinkExample):
    X = build_input(ex, ex.labels, model)
    H, enc_cache = encode(model, ex.ops, X)
    r, ro_cache = _readout(model.spec, H, ex.targets, ex.tie_keys)
    logit, head_cache = _head(model, r)
    return logit, (H, enc_cache, ro_cache, head_cache)


def _backward(model: Model, ex: LinkExample, cache, dlogit: float, grads: dict):
    H, enc_cache, ro_cache, head_cache = cache
    dr = _head_backward(model, head_cache, dlogit, grads)
    dH = _readout_backward(model.spec, H, ex.targets, ro_cache, dr)
    dX = encode_backward(model, ex.ops, enc_cache, dH, grads)
    _input_backward(model, ex.labels, dX, grads)


def score(model: Model, ex: LinkExample) -> float:
    return _forward(model, ex)[0]


def score_many(model: Model, examples: Sequence[LinkExample]) -> np.ndarray:
    return np.array([score(model, ex) for ex in examples], dtype=np.float64)


def bce_with_logits(logit: float, target: float) -> float:
    return max(logit, 0.0) - logit * target + np.log1p(np.exp(-abs(logit)))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def loss_and_gradients(model: Model, batch: Sequence[tuple[LinkExample, float]]):
    """Summed binary cross-entropy over the batch and its exact gradients."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    grads = model.zeros_like()
    total = 0.0
    for idx, (ex, target) in enumerate(batch):
        logit, cache = _forward(model, ex)
        loss = bce_with_logits(logit, target)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite loss at batch index {idx}")
        total += loss
        _backward(model, ex, cache, _sigmoid(logit) - target, grads)
    return total, grads


def batch_loss(model: Model, batch: Sequence[tuple[LinkExample, float]]) -> float:
    return sum(bce_with_logits(score(model, ex), t) for ex, t in batch)


# -------------------------------------------------------------- GAE-style scoring


@dataclass(eq=False)
class GaeGraph:
    """Whole-graph encoder input: every node carries label 0 (no labeling trick)."""

    graph: Graph

    @cached_property
    def ops(self) -> GraphOps:
        return GraphOps(self.graph)

    @cached_property
    def labels(self) -> NodeLabels:
        from .labeling import LabelingScheme

        return NodeLabels(LabelingScheme("all-one"), np.zeros(self.graph.num_nodes, dtype=np.int64))


def gae_embed(model: Model, gg: GaeGraph):
    X = build_input(gg.graph, gg.labels, model)
    return encode(model, gg.ops, X)


def gae_scores(model: Model, gg: GaeGraph, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    H, _ = gae_embed(model, gg)
    out = np.empty(len(pairs))
    for k, pair in enumerate(pairs):
        r, _ = _readout(model.spec, H, pair)
        out[k] = _head(model, r)[0]
    return out


def gae_loss_and_gradients(model: Model, gg: GaeGraph, pairs: Sequence[tuple[int, int]],
                           targets: Sequence[float]):
    if model.spec.readout not in ("center-hadamard", "center-concat"):
        raise ValueError("GAE scoring reads out the two target nodes only")
    grads = model.zeros_like()
    X = build_input(gg.graph, gg.labels, model)
    H, caches = encode(model, gg.ops, X)
    dH = np.zeros_like(H)
    total = 0.0
    for idx, (pair, t) in enumerate(zip(pairs, targets)):
        r, ro_cache = _readout(model.spec, H, pair)
        logit, head_cache = _head(model, r)
        loss = bce_with_logits(logit, t)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite loss at batch index {idx}")
        total += loss
        dr = _head_backward(model, head_cache, _sigmoid(logit) - t, grads)
        dH += _readout_backward(model.spec, H, pair, ro_cache, dr)
    dX = encode_backward(model, gg.ops, caches, dH, grads)
    _input_backward(model, gg.labels, dX, grads)
    return total, grads


# ------------------------------------------------------------- gradient checking


@dataclass
class GradCheck:
    checked: int = 0
    passed: int = 0
    worst: list[dict] = field(default_factory=list)

    @property
    def fraction(self) -> float:
        return self.passed / self.checked if self.checked else 1.0


def gradient_check(model: Model, loss_fn: Callable[[Model], float], analytic: dict[str, np.ndarray],
                   rng: np.random.Generator, per_param: int = 10, step: float = 1e-5,
                   rtol: float = 1e-4, atol: float = 1e-8) -> GradCheck:
    """Compare analytic gradients against central differences.

    ``per_param`` coordinates are drawn from every parameter block. A
    coordinate passes when |a - n| <= rtol * max(|a|, |n|), or when both
    are below ``atol`` (finite-difference noise floor).
    """
    result = GradCheck()
    probe = model.copy()
    for name, value in probe.params.items():
        flat = value.reshape(-1)
        picks = rng.choice(flat.size, size=min(per_param, flat.size), replace=False)
        for i in picks:
            orig = flat[i]
            flat[i] = orig + step
            up = loss_fn(probe)
            flat[i] = orig - step
            down = loss_fn(probe)
            flat[i] = orig
            numeric = (up - down) / (2 * step)
            a = analytic[name].reshape(-1)[i]
            err = abs(a - numeric)
            ok = err <= rtol * max(abs(a), abs(numeric)) or err <= atol
            result.checked += 1
            result.passed += ok
            if not ok:
                result.worst.append({"param": name, "index": int(i), "analytic": float(a),
                                     "numeric": float(numeric)})
    return result


def perturb_biases(model: Model, rng: np.random.Generator, scale: float = 0.1) -> Model:
    """Copy with random biases so no pre-activation sits exactly on a ReLU kink.

    Zero-initialised biases put many pre-activations at exactly 0, where the
    loss is not differentiable and finite differences disagree by design.
    """
    out = model.copy()
    for k, v in out.params.items():
        if k != "embedding" and k.rsplit(".", 1)[-1] in ("b", "b1", "b2"):
            out.params[k] = rng.uniform(-scale, scale, size=v.shape)
    return out


def check_seal_gradients(model: Model, batch: Sequence[tuple[LinkExample, float]],
                         rng: np.random.Generator, per_param: int = 10) -> GradCheck:
    _, grads = loss_and_gradients(model, batch)
    return gradient_check(model, lambda m: batch_loss(m, batch), grads, rng, per_param)


def check_gae_gradients(model: Model, gg: "GaeGraph", pairs, targets, rng: np.random.Generator,
                        per_param: int = 10) -> GradCheck:
    _, grads = gae_loss_and_gradients(model, gg, pairs, targets)

    def loss(m):
        return float(sum(bce_with_logits(s, t) for s, t in zip(gae_scores(m, gg, pairs), targets)))

    return gradient_check(model, loss, grads, rng, per_param)


# --------------------------------------------------------------------- training


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    lr: float = 0.01
    batch_size: int = 32
    optimizer: str = "momentum"
    momentum: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8


class _Optimizer:
    def __init__(self, cfg: TrainConfig, params: dict[str, np.ndarray]):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        cfg = self.cfg
        self.t += 1
        for k, g in grads.items():
            if cfg.optimizer == "adam":
                self.m[k] = cfg.momentum * self.m[k] + (1 - cfg.momentum) * g
                self.v[k] = cfg.beta2 * self.v[k] + (1 - cfg.beta2) * g * g
                m_hat = self.m[k] / (1 - cfg.momentum ** self.t)
                v_hat = self.v[k] / (1 - cfg.beta2 ** self.t)
                params[k] -= cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
            else:
                self.m[k] = cfg.momentum * self.m[k] + g
                params[k] -= cfg.lr * self.m[k]


@dataclass
class TrainResult:
    model: Model
    losses: list[float]
    valid_scores: list[float]
    best_epoch: int


def fit(model: Model, n_items: int, loss_and_grad: Callable[[Model, np.ndarray], tuple],
        cfg: TrainConfig, rng: np.random.Generator,
        validate: Callable[[Model], float] | None = None) -> TrainResult:
    """Mini-batch training over item indices; keeps the best-validation weights.

    Gradients are averaged over each batch. Without ``validate`` the final
    weights are returned.
    """
    if n_items == 0:
        raise ValueError("empty training set")
    if cfg.optimizer not in ("momentum", "adam"):
        raise ValueError(f"unknown optimizer {cfg.optimizer!r}")
    opt = _Optimizer(cfg, model.params)
    losses, valid_scores = [], []
    best, best_score, best_epoch = model.copy(), -np.inf, 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n_items)
        epoch_loss = 0.0
        for start in range(0, n_items, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            try:
                loss, grads = loss_and_grad(model, idx)
            except NumericError as exc:
                raise TrainingError(f"diverged in epoch {epoch}: {exc}") from exc
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss in epoch {epoch}")
            for g in grads.values():
                g /= len(idx)
            opt.step(model.params, grads)
            epoch_loss += loss
        for k, v in model.params.items():
            if not np.all(np.isfinite(v)):
                raise TrainingError(f"non-finite parameter {k} in epoch {epoch}")
        losses.append(epoch_loss / n_items)
        if validate is not None:
            s = validate(model)
            valid_scores.append(s)
            if s > best_score:
                best, best_score, best_epoch = model.copy(), s, epoch
    if validate is None:
        best, best_epoch = model.copy(), cfg.epochs
    return TrainResult(best, losses, valid_scores, best_epoch)


def train(spec: ModelSpec, cfg: TrainConfig, dataset: Sequence[tuple[LinkExample, float]],
          seed: int, validate: Callable[[Model], float] | None = None) -> TrainResult:
    """Train a subgraph (labeling-trick) model; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    model = Model.init(spec, rng)

    def step(m, idx):
        return loss_and_gradients(m, [dataset[i] for i in idx])

    return fit(model, len(dataset), step, cfg, rng, validate)


def train_gae(spec: ModelSpec, cfg: TrainConfig, gg: GaeGraph, pairs: Sequence[tuple[int, int]],
              targets: Sequence[float], seed: int,
              validate: Callable[[Model], float] | None = None) -> TrainResult:
    rng = np.random.default_rng(seed)
    model = Model.init(spec, rng)

    def step(m, idx):
        return gae_loss_and_gradients(m, gg, [pairs[i] for i in idx], [targets[i] for i in idx])

    return fit(model, len(pairs), step, cfg, rng, validate)


# ------------------------------------------------------------------- checkpoints

MAGIC = b"LLAB"
FORMAT_VERSION = 1


def save_model(model: Model, path, meta: dict | None = None):
    """Binary checkpoint: magic, version, JSON header (spec, block shapes,
    free-form meta), then row-major float64 little-endian blocks in
    declaration order."""
    blocks = [(k, v) for k, v in model.params.items()]
    header = {"spec": asdict(model.spec), "blocks": [[k, list(v.shape)] for k, v in blocks],
              "meta": meta or {}}
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(raw)))
        fh.write(raw)
        for _, v in blocks:
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_model(path) -> tuple[Model, dict]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError("not a labeltrick checkpoint (bad magic)")
    version, n = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    header = json.loads(data[12:12 + n])
    spec = ModelSpec(**header["spec"])
    offset = 12 + n
    params = {}
    for name, shape in header["blocks"]:
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape)
        params[name] = arr.astype(np.float64)
        offset += 8 * count
    if offset != len(data):
        raise ValueError("trailing bytes in checkpoint")
    if list(params) != list(spec.param_shapes()):
        raise ValueError("checkpoint blocks do not match the model spec")
    return Model(spec, params), header["meta"]


def clone(model: Model) -> Model:
    return copy.deepcopy(model)

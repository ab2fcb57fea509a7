"""Graph classifiers over union graphs: GIN, GCN and the two baselines.

Every variant maps a batch of graphs to one logit per graph.  Batches are
block-diagonal: node rows of all graphs are stacked, adjacency is a sparse
matrix without cross-graph entries, and readout is a sparse mean-pooling
matrix.  Batch normalization statistics are taken over all nodes of the
batch.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from ..graph import EdgeKind, NodeKind, SYSTEM_KINDS
from ..sample import Sample
from . import layers as L

VARIANTS = ("gin", "gcn", "mlp_baseline", "link_predictor")
ALIASES = {"mlp": "mlp_baseline", "linkpred": "link_predictor"}

_EDGE_CODE = {EdgeKind.INCIDENCE: 0, EdgeKind.TREE: 1, EdgeKind.UNION: 2}


@dataclass(frozen=True)
class Architecture:
    variant: str = "gin"
    input_width: int = 64
    hidden: int = 128
    layers: int = 3
    dropout: float = 0.1
    gin_eps: float = 0.0
    combine: str = "concat"  # link predictor: "concat" or "multiply"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.combine not in ("concat", "multiply"):
            raise ValueError(f"unknown combine mode {self.combine!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GraphData:
    """Array view of one sample, built once and reused across epochs."""

    x: np.ndarray
    edges: np.ndarray  # (E, 2)
    kinds: np.ndarray  # (E,) edge kind codes
    system: np.ndarray  # (n,) bool, True for state/transition nodes
    label: int

    @classmethod
    def from_sample(cls, s: Sample, dtype=np.float64) -> "GraphData":
        edges = np.array([(u, v) for u, v, _ in s.graph.edges], dtype=np.int64).reshape(-1, 2)
        kinds = np.array([_EDGE_CODE[k] for _, _, k in s.graph.edges], dtype=np.int8)
        system = np.array([n.kind in SYSTEM_KINDS for n in s.graph.nodes], dtype=bool)
        return cls(np.array(s.features, dtype=dtype), edges, kinds, system, int(s.label))

    def permuted(self, perm: np.ndarray) -> "GraphData":
        """Same graph with node ``i`` moved to position ``perm[i]``."""
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return GraphData(self.x[inv], perm[self.edges], self.kinds.copy(), self.system[inv], self.label)


@dataclass
class Batch:
    x: np.ndarray
    y: np.ndarray
    n_graphs: int
    adj: sp.csr_matrix | None = None
    pool: sp.csr_matrix | None = None
    parts: dict = field(default_factory=dict)  # link predictor: per-partition sub-batches


def _sub_batch(graphs: list[GraphData], select, edge_code: int, dtype):
    xs, edges, index = [], [], []
    offset = 0
    for gi, g in enumerate(graphs):
        keep = select(g)
        ids = np.flatnonzero(keep)
        remap = -np.ones(len(keep), dtype=np.int64)
        remap[ids] = np.arange(len(ids)) + offset
        e = g.edges[g.kinds == edge_code]
        e = remap[e]
        edges.append(e[(e >= 0).all(axis=1)])
        xs.append(g.x[ids])
        index.append(np.full(len(ids), gi))
        offset += len(ids)
    x = np.vstack(xs).astype(dtype)
    e = np.vstack(edges) if edges else np.zeros((0, 2), np.int64)
    gidx = np.concatenate(index)
    adj = L.gcn_normalize(L.symmetric_adjacency(len(x), e, dtype))
    return x, adj, L.mean_pool_matrix(gidx, len(graphs), dtype)


def make_batch(graphs: list[GraphData], arch: Architecture, dtype=np.float64) -> Batch:
    y = np.array([g.label for g in graphs], dtype=dtype)
    if arch.variant == "link_predictor":
        parts = {
            "sys": _sub_batch(graphs, lambda g: g.system, _EDGE_CODE[EdgeKind.INCIDENCE], dtype),
            "tree": _sub_batch(graphs, lambda g: ~g.system, _EDGE_CODE[EdgeKind.TREE], dtype),
        }
        return Batch(np.zeros((0, arch.input_width), dtype), y, len(graphs), parts=parts)

    sizes = [len(g.x) for g in graphs]
    offsets = np.cumsum([0] + sizes[:-1])
    x = np.vstack([g.x for g in graphs]).astype(dtype)
    gidx = np.repeat(np.arange(len(graphs)), sizes)
    pool = L.mean_pool_matrix(gidx, len(graphs), dtype)
    adj = None
    if arch.variant in ("gin", "gcn"):
        e = np.vstack([g.edges + o for g, o in zip(graphs, offsets)])
        adj = L.symmetric_adjacency(len(x), e, dtype)
        if arch.variant == "gcn":
            adj = L.gcn_normalize(adj)
    return Batch(x, y, len(graphs), adj, pool)


class Model:
    """Parameters (trainable arrays) plus batch-norm running statistics."""

    def __init__(self, arch: Architecture, params: dict, state: dict):
        self.arch = arch
        self.params = params
        self.state = state

    @classmethod
    def init(cls, arch: Architecture, seed: int = 0, dtype=np.float64) -> "Model":
        rng = np.random.default_rng(seed)
        params: dict[str, np.ndarray] = {}
        state: dict[str, np.ndarray] = {}
        h = arch.hidden

        def stack(prefix: str, gin: bool) -> None:
            width = arch.input_width
            for layer in range(arch.layers):
                p = f"{prefix}{layer}"
                if gin:
                    params[p + ".w1"], params[p + ".b1"] = L.init_linear(rng, width, h, dtype)
                    params[p + ".w2"], params[p + ".b2"] = L.init_linear(rng, h, h, dtype)
                else:
                    params[p + ".w"], params[p + ".b"] = L.init_linear(rng, width, h, dtype)
                params[p + ".gamma"] = np.ones(h, dtype)
                params[p + ".beta"] = np.zeros(h, dtype)
                state[p + ".mean"] = np.zeros(h, dtype)
                state[p + ".var"] = np.ones(h, dtype)
                width = h

        if arch.variant == "gin":
            stack("gnn", gin=True)
            head_in = h
        elif arch.variant == "gcn":
            stack("gnn", gin=False)
            head_in = h
        elif arch.variant == "link_predictor":
            stack("sys", gin=False)
            stack("tree", gin=False)
            head_in = 2 * h if arch.combine == "concat" else h
        else:
            head_in = arch.input_width
        params["head.w1"], params["head.b1"] = L.init_linear(rng, head_in, h, dtype)
        params["head.w2"], params["head.b2"] = L.init_linear(rng, h, 1, dtype)
        return cls(arch, params, state)

    def copy(self) -> "Model":
        return Model(self.arch, copy.deepcopy(self.params), copy.deepcopy(self.state))

    def astype(self, dtype) -> "Model":
        return Model(
            self.arch,
            {k: v.astype(dtype) for k, v in self.params.items()},
            {k: v.astype(dtype) for k, v in self.state.items()},
        )

    @property
    def dtype(self):
        return self.params["head.w1"].dtype

    # ------------------------------------------------------------------
    # forward
    # ------------------------------------------------------------------

    def forward(self, batch: Batch, train: bool = False, rng: np.random.Generator | None = None):
        """Logits (one per graph) and the cache needed by :meth:`backward`."""
        cache: dict = {"relu_inputs": []}
        v = self.arch.variant
        if v in ("gin", "gcn"):
            h = self._stack_forward("gnn", batch.x, batch.adj, v == "gin", train, cache)
            g = batch.pool @ h
            cache["readout"] = [("gnn", batch.pool)]
        elif v == "mlp_baseline":
            g = batch.pool @ batch.x
        else:
            embeddings = []
            cache["readout"] = []
            for part in ("sys", "tree"):
                x, adj, pool = batch.parts[part]
                h = self._stack_forward(part, x, adj, False, train, cache)
                embeddings.append(pool @ h)
                cache["readout"].append((part, pool))
            cache["embeddings"] = embeddings
            if self.arch.combine == "concat":
                g = np.concatenate(embeddings, axis=1)
            else:
                g = embeddings[0] * embeddings[1]
        logits = self._head_forward(g, train, rng, cache)
        if not np.all(np.isfinite(logits)):
            raise FloatingPointError("non-finite activation in forward pass")
        return logits, cache

    def _stack_forward(self, prefix, x, adj, gin: bool, train: bool, cache) -> np.ndarray:
        p, s = self.params, self.state
        h = x
        layers = []
        for layer in range(self.arch.layers):
            k = f"{prefix}{layer}"
            rec = {"h": h}
            if gin:
                z = (1.0 + self.arch.gin_eps) * h + adj @ h
                a1 = L.linear(z, p[k + ".w1"], p[k + ".b1"])
                r1 = L.relu(a1)
                a = L.linear(r1, p[k + ".w2"], p[k + ".b2"])
                rec.update(z=z, a1=a1, r1=r1)
                cache["relu_inputs"].append(a1)
            else:
                m = h @ p[k + ".w"]
                a = adj @ m + p[k + ".b"]
            if train:
                y, bn = L.batchnorm_train(a, p[k + ".gamma"], p[k + ".beta"])
                L.update_running(s[k + ".mean"], s[k + ".var"], bn[2], bn[3], len(a))
                rec["bn"] = bn
            else:
                y = L.batchnorm_eval(a, p[k + ".gamma"], p[k + ".beta"], s[k + ".mean"], s[k + ".var"])
            rec["y"] = y
            cache["relu_inputs"].append(y)
            h = L.relu(y)
            layers.append(rec)
        cache[prefix] = (layers, adj)
        return h

    def _head_forward(self, g, train, rng, cache):
        p = self.params
        rate = self.arch.dropout if train else 0.0
        m1 = L.dropout_mask(rng, g.shape, rate, g.dtype)
        g_in = g * m1 if m1 is not None else g
        a1 = L.linear(g_in, p["head.w1"], p["head.b1"])
        r1 = L.relu(a1)
        m2 = L.dropout_mask(rng, r1.shape, rate, r1.dtype)
        r_in = r1 * m2 if m2 is not None else r1
        z = L.linear(r_in, p["head.w2"], p["head.b2"])[:, 0]
        cache["head"] = (g_in, m1, a1, r_in, m2)
        cache["relu_inputs"].append(a1)
        return z

    # ------------------------------------------------------------------
    # backward
    # ------------------------------------------------------------------

    def backward(self, cache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        p = self.params
        grads: dict[str, np.ndarray] = {}
        g_in, m1, a1, r_in, m2 = cache["head"]
        dz = dlogits[:, None]
        dr, grads["head.w2"], grads["head.b2"] = L.linear_backward(r_in, p["head.w2"], dz)
        if m2 is not None:
            dr = dr * m2
        da1 = L.relu_backward(a1, dr)
        dg, grads["head.w1"], grads["head.b1"] = L.linear_backward(g_in, p["head.w1"], da1)
        if m1 is not None:
            dg = dg * m1

        v = self.arch.variant
        if v == "mlp_baseline":
            return grads
        if v == "link_predictor":
            e_sys, e_tree = cache["embeddings"]
            h = self.arch.hidden
            if self.arch.combine == "concat":
                d_parts = {"sys": dg[:, :h], "tree": dg[:, h:]}
            else:
                d_parts = {"sys": dg * e_tree, "tree": dg * e_sys}
        else:
            d_parts = {"gnn": dg}
        for prefix, pool in cache["readout"]:
            dh = pool.T @ d_parts[prefix]
            self._stack_backward(prefix, cache, dh, v == "gin", grads)
        return grads

    def _stack_backward(self, prefix, cache, dh, gin: bool, grads) -> None:
        p = self.params
        layers, adj = cache[prefix]
        for layer in reversed(range(self.arch.layers)):
            k = f"{prefix}{layer}"
            rec = layers[layer]
            dy = L.relu_backward(rec["y"], dh)
            da, grads[k + ".gamma"], grads[k + ".beta"] = L.batchnorm_backward(rec["bn"], p[k + ".gamma"], dy)
            if gin:
                dr1, grads[k + ".w2"], grads[k + ".b2"] = L.linear_backward(rec["r1"], p[k + ".w2"], da)
                da1 = L.relu_backward(rec["a1"], dr1)
                dzz, grads[k + ".w1"], grads[k + ".b1"] = L.linear_backward(rec["z"], p[k + ".w1"], da1)
                dh = (1.0 + self.arch.gin_eps) * dzz + adj.T @ dzz
            else:
                grads[k + ".b"] = da.sum(axis=0)
                dm = adj.T @ da
                grads[k + ".w"] = rec["h"].T @ dm
                dh = dm @ p[k + ".w"].T

    # ------------------------------------------------------------------
    # inference helpers
    # ------------------------------------------------------------------

    def predict_proba(self, graphs: list[GraphData], batch_size: int = 256) -> np.ndarray:
        out = []
        for i in range(0, len(graphs), batch_size):
            batch = make_batch(graphs[i : i + batch_size], self.arch, self.dtype)
            logits, _ = self.forward(batch, train=False)
            out.append(L.sigmoid(logits))
        return np.concatenate(out) if out else np.zeros(0)


def _single(model: Model, sample: Sample | GraphData, variant: str) -> float:
    if model.arch.variant != variant:
        raise ValueError(f"model is a {model.arch.variant}, not a {variant}")
    g = sample if isinstance(sample, GraphData) else GraphData.from_sample(sample, model.dtype)
    if g.x.shape[1] != model.arch.input_width:
        raise ValueError(f"feature width {g.x.shape[1]} != model input {model.arch.input_width}")
    if variant == "link_predictor" and (g.system.all() or not g.system.any()):
        raise ValueError("link predictor needs both system and specification nodes")
    return float(model.predict_proba([g])[0])


def forward_gin(model: Model, sample) -> float:
    return _single(model, sample, "gin")


def forward_gcn(model: Model, sample) -> float:
    return _single(model, sample, "gcn")


def forward_mlp_baseline(model: Model, sample) -> float:
    return _single(model, sample, "mlp_baseline")


def forward_link_predictor(model: Model, sample) -> float:
    return _single(model, sample, "link_predictor")

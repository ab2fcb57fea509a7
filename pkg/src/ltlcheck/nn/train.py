"""Adam training loop with per-epoch validation and early stopping."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..sample import Sample
from . import layers as L
from .models import ALIASES, Architecture, GraphData, Model, make_batch


class TrainingDiverged(FloatingPointError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 1e-5
    dropout: float = 0.1
    patience: int = 5
    max_epochs: int = 200
    batch_size: int = 8
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden: int = 128
    combine: str = "concat"
    time_budget_s: float | None = None

    def __post_init__(self) -> None:
        for name in ("learning_rate", "patience", "max_epochs", "batch_size", "eps", "hidden"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1 - self.beta1**self.t
        c2 = 1 - self.beta2**self.t
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            params[k] -= (self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(params[k].dtype)


@dataclass
class TrainResult:
    model: Model
    history: list[dict]
    best_epoch: int
    best_val_accuracy: float
    elapsed: float
    stopped_by: str


def as_graphs(ds, dtype=np.float32) -> list[GraphData]:
    return [s if isinstance(s, GraphData) else GraphData.from_sample(s, dtype) for s in ds]


def accuracy(model: Model, graphs: list[GraphData]) -> float:
    if not graphs:
        raise ValueError("empty dataset")
    p = model.predict_proba(graphs)
    y = np.array([g.label for g in graphs])
    return float(np.mean((p >= 0.5).astype(int) == y))


def train(
    variant: str,
    ds_train: list[Sample] | list[GraphData],
    ds_val: list[Sample] | list[GraphData],
    hp: Hyperparams = Hyperparams(),
    dtype=np.float32,
    log=None,
) -> TrainResult:
    variant = ALIASES.get(variant, variant)
    tr = as_graphs(ds_train, dtype)
    va = as_graphs(ds_val, dtype)
    if not tr or not va:
        raise ValueError("training and validation sets must be nonempty")
    width = tr[0].x.shape[1]
    if any(g.x.shape[1] != width for g in tr + va):
        raise ValueError("mixed feature widths")
    arch = Architecture(variant, width, hp.hidden, dropout=hp.dropout, combine=hp.combine)

    seeds = np.random.SeedSequence(hp.seed).spawn(3)
    model = Model.init(arch, int(seeds[0].generate_state(1)[0]), dtype)
    order_rng = np.random.default_rng(seeds[1])
    drop_rng = np.random.default_rng(seeds[2])
    opt = Adam(hp.learning_rate, hp.beta1, hp.beta2, hp.eps)

    best, best_acc, best_epoch, stale = model.copy(), -1.0, 0, 0
    history: list[dict] = []
    start = time.perf_counter()
    stopped_by = "max_epochs"
    for epoch in range(1, hp.max_epochs + 1):
        order = order_rng.permutation(len(tr))
        total, seen = 0.0, 0
        for i in range(0, len(order), hp.batch_size):
            chunk = [tr[j] for j in order[i : i + hp.batch_size]]
            batch = make_batch(chunk, arch, dtype)
            try:
                logits, cache = model.forward(batch, train=True, rng=drop_rng)
            except FloatingPointError as exc:
                raise TrainingDiverged(f"epoch {epoch}: {exc}") from None
            loss, dlogits = L.bce_with_logits(logits.astype(np.float64), batch.y)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"epoch {epoch}: loss became {loss}")
            grads = model.backward(cache, dlogits.astype(dtype))
            opt.step(model.params, grads)
            total += loss * len(chunk)
            seen += len(chunk)
        val_acc = accuracy(model, va)
        rec = {"epoch": epoch, "train_loss": float(f"{total / max(seen, 1):.9g}"), "val_accuracy": val_acc}
        history.append(rec)
        if log:
            log(rec)
        if val_acc > best_acc:
            best, best_acc, best_epoch, stale = model.copy(), val_acc, epoch, 0
        else:
            stale += 1
            if stale >= hp.patience:
                stopped_by = "patience"
                break
        if hp.time_budget_s is not None and time.perf_counter() - start > hp.time_budget_s:
            stopped_by = "time_budget"
            break
    return TrainResult(best, history, best_epoch, best_acc, time.perf_counter() - start, stopped_by)

"""Finite-difference verification of the hand-written backward passes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ALIASES, Architecture, GraphData, Model, make_batch


@dataclass(frozen=True)
class GradCheckReport:
    variant: str
    checked: int
    skipped: int
    max_relative_error: float
    worst_parameter: str

    def passed(self, tolerance: float = 1e-3) -> bool:
        return self.max_relative_error < tolerance


def _objective(model: Model, batch) -> tuple[float, list[np.ndarray]]:
    saved = {k: v.copy() for k, v in model.state.items()}
    logits, cache = model.forward(batch, train=True, rng=None)
    model.state.update(saved)
    return float(logits.sum()), cache


def _signature(cache) -> np.ndarray:
    return np.concatenate([(a > 0).ravel() for a in cache["relu_inputs"]]) if cache["relu_inputs"] else np.zeros(0, bool)


def grad_check(
    variant: str,
    sample,
    model: Model | None = None,
    coordinates: int = 100,
    step: float = 1e-4,
    seed: int = 0,
    floor: float = 1e-7,
) -> GradCheckReport:
    """Compare analytic gradients of the summed logit with central differences.

    Runs in float64 with dropout disabled and batch statistics in training
    mode.  Coordinates whose perturbation flips any rectifier are skipped,
    because the objective is not differentiable there.
    """
    variant = ALIASES.get(variant, variant)
    graphs = sample if isinstance(sample, list) else [sample]
    graphs = [g if isinstance(g, GraphData) else GraphData.from_sample(g) for g in graphs]
    if model is None:
        model = Model.init(Architecture(variant, graphs[0].x.shape[1], hidden=16), seed)
    model = model.astype(np.float64)
    batch = make_batch(graphs, model.arch, np.float64)

    saved = {k: v.copy() for k, v in model.state.items()}
    logits, cache = model.forward(batch, train=True, rng=None)
    model.state.update(saved)
    grads = model.backward(cache, np.ones_like(logits))
    base_sig = _signature(cache)

    rng = np.random.default_rng(seed)
    names = sorted(grads)
    sizes = np.array([model.params[k].size for k in names])
    flat = rng.choice(int(sizes.sum()), size=min(coordinates, int(sizes.sum())), replace=False)
    bounds = np.cumsum(sizes)

    worst, worst_name, checked, skipped = 0.0, "", 0, 0
    for f in np.sort(flat):
        i = int(np.searchsorted(bounds, f, side="right"))
        name = names[i]
        local = int(f - (bounds[i - 1] if i else 0))
        w = model.params[name].reshape(-1)
        orig = w[local]
        w[local] = orig + step
        plus, c_plus = _objective(model, batch)
        w[local] = orig - step
        minus, c_minus = _objective(model, batch)
        w[local] = orig
        if not (np.array_equal(_signature(c_plus), base_sig) and np.array_equal(_signature(c_minus), base_sig)):
            skipped += 1
            continue
        numeric = (plus - minus) / (2 * step)
        analytic = float(grads[name].reshape(-1)[local])
        err = abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)
        checked += 1
        if err > worst:
            worst, worst_name = err, name
    return GradCheckReport(variant, checked, skipped, worst, worst_name)

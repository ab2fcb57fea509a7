"""JSON checkpoints and per-epoch history records."""

from __future__ import annotations

import json

import numpy as np

from ..features import EncodingDictionary
from .models import Architecture, Model


def _encode(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "values": [float(f"{v:.9g}") for v in a.reshape(-1).tolist()]}


def _decode(d: dict, dtype) -> np.ndarray:
    return np.array(d["values"], dtype=dtype).reshape(d["shape"])


def save_checkpoint(path, model: Model, hp: dict | None = None, dictionary: EncodingDictionary | None = None,
                    extra: dict | None = None) -> None:
    rec = {
        "architecture": model.arch.to_dict(),
        "hyperparams": hp or {},
        "dtype": str(model.dtype),
        "params": {k: _encode(v) for k, v in sorted(model.params.items())},
        "state": {k: _encode(v) for k, v in sorted(model.state.items())},
        "dictionary": dictionary.to_dict() if dictionary else None,
        "extra": extra or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path) -> tuple[Model, dict]:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    arch = Architecture(**rec["architecture"])
    dtype = np.dtype(rec.get("dtype", "float32"))
    params = {k: _decode(v, dtype) for k, v in rec["params"].items()}
    state = {k: _decode(v, dtype) for k, v in rec["state"].items()}
    expected = Model.init(arch, 0, dtype)
    for k, v in expected.params.items():
        if k not in params or params[k].shape != v.shape:
            raise ValueError(f"checkpoint parameter {k} missing or misshapen")
    for k, v in params.items():
        if not np.all(np.isfinite(v)):
            raise ValueError(f"checkpoint parameter {k} is not finite")
    meta = {k: rec[k] for k in ("hyperparams", "extra")}
    meta["dictionary"] = EncodingDictionary.from_dict(rec["dictionary"]) if rec.get("dictionary") else None
    return Model(arch, params, state), meta


def write_history(path, history: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in history:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_history(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]

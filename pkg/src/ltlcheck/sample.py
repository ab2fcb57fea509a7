"""Labelled union-graph samples and their line-delimited JSON record format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .automaton import BuchiAutomaton
from .features import EncodingDictionary, encode_features
from .formula import Formula, parse_ltl, to_nnf
from .graph import EdgeKind, Node, NodeKind, UnionGraph, union_graph


class SchemaError(ValueError):
    pass


@dataclass
class Sample:
    graph: UnionGraph
    features: np.ndarray
    label: int
    meta: dict = field(default_factory=dict)

    @property
    def formula(self) -> Formula:
        return parse_ltl(self.meta["formula"])

    @property
    def automaton(self) -> BuchiAutomaton:
        return self.graph.to_automaton()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.label == other.label
            and self.meta == other.meta
            and self.features.shape == other.features.shape
            and bool(np.array_equal(_round9(self.features), _round9(other.features)))
        )


def make_sample(
    b: BuchiAutomaton,
    f: Formula,
    label: int,
    meta: dict | None = None,
    scheme: str = "gaussian",
    directed: bool = False,
    dictionary: EncodingDictionary | None = None,
) -> Sample:
    g = union_graph(b, to_nnf(f))
    x = encode_features(g, scheme, directed, dictionary)
    base = {"formula": str(f), "automaton_hash": b.digest()}
    base.update(meta or {})
    return Sample(g, x, int(label), base)


def _round9(x: np.ndarray) -> np.ndarray:
    return np.array([[float(f"{v:.9g}") for v in row] for row in np.asarray(x)]).reshape(np.shape(x))


def sample_to_record(s: Sample) -> dict:
    return {
        "nodes": [{"id": n.id, "kind": n.kind.value, "payload": n.payload} for n in s.graph.nodes],
        "edges": [[u, v, k.value] for u, v, k in s.graph.edges],
        "features": [[float(f"{v:.9g}") for v in row] for row in s.features.tolist()],
        "label": s.label,
        "meta": s.meta,
    }


def record_to_sample(rec: dict) -> Sample:
    try:
        nodes = [Node(int(n["id"]), NodeKind(n["kind"]), dict(n["payload"])) for n in rec["nodes"]]
        edges = [(int(u), int(v), EdgeKind(k)) for u, v, k in rec["edges"]]
        features = np.array(rec["features"], dtype=float).reshape(len(nodes), -1)
        label = int(rec["label"])
        meta = dict(rec["meta"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed sample record: {exc}") from None
    if label not in (0, 1):
        raise SchemaError(f"label must be 0 or 1, got {label}")
    if features.shape[1] not in (64, 66) and len(nodes):
        raise SchemaError(f"feature width {features.shape[1]} is neither 64 nor 66")
    if [n.id for n in nodes] != list(range(len(nodes))):
        raise SchemaError("node ids must be 0..n-1 in order")
    if any(not (0 <= u < len(nodes) and 0 <= v < len(nodes)) for u, v, _ in edges):
        raise SchemaError("edge endpoint out of range")
    return Sample(UnionGraph(nodes, edges), features, label, meta)


def write_sample(s: Sample) -> str:
    return json.dumps(sample_to_record(s), separators=(",", ":"), sort_keys=False)


def read_sample(line: str) -> Sample:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not JSON: {exc}") from None
    return record_to_sample(rec)


def write_samples(path, samples: Iterable[Sample]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(write_sample(s) + "\n")
            n += 1
    return n


def iter_samples(path) -> Iterator[Sample]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield read_sample(line)


def read_samples(path) -> list[Sample]:
    return list(iter_samples(path))

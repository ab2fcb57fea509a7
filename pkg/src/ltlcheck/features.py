"""Per-node feature vectors for union graphs.

Row layout (64 columns, 66 for the directed variant)::

    [0]        constant flag (true 1 / false N)
    [1:27]     positive atoms a..z
    [27:53]    negated atoms !a..!z
    [53:62]    operators G F R W M X U & |
    [62:64]    state bits (initial, accepting)
    [64:66]    transition source / destination (directed only)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automaton import Cube
from .formula import ATOMS
from .graph import NodeKind, UnionGraph

OPERATOR_ORDER = ("G", "F", "R", "W", "M", "X", "U", "&", "|")
SYMBOLS = tuple(ATOMS) + OPERATOR_ORDER

CONST = 0
POS = 1
NEG = POS + len(ATOMS)
OPS = NEG + len(ATOMS)
STATE_BITS = OPS + len(OPERATOR_ORDER)
DIRECTION = STATE_BITS + 2
WIDTH = DIRECTION
DIRECTED_WIDTH = DIRECTION + 2

SCHEMES = ("gaussian", "one_hot")


@dataclass(frozen=True)
class EncodingDictionary:
    """One scalar per atom/operator, drawn around evenly spaced means."""

    values: tuple[float, ...]
    sigma: float
    seed: int

    def value(self, symbol: str) -> float:
        return self.values[SYMBOLS.index(symbol)]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "sigma": self.sigma, "values": dict(zip(SYMBOLS, self.values))}

    @classmethod
    def from_dict(cls, d: dict) -> "EncodingDictionary":
        return cls(tuple(float(d["values"][s]) for s in SYMBOLS), float(d["sigma"]), int(d["seed"]))


def make_dictionary(seed: int = 0, sigma: float = 0.05) -> EncodingDictionary:
    """Symbol ``i`` (1-based, atoms then operators) gets a draw from N(i, sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    values: list[float] = []
    for i in range(1, len(SYMBOLS) + 1):
        while True:
            x = float(rng.normal(i, sigma))
            if all(abs(x - y) > 1e-6 for y in values):
                break
        values.append(x)
    return EncodingDictionary(tuple(values), sigma, seed)


def feature_width(directed: bool) -> int:
    return DIRECTED_WIDTH if directed else WIDTH


def encode_features(
    c: UnionGraph,
    scheme: str = "gaussian",
    directed: bool = False,
    dictionary: EncodingDictionary | None = None,
) -> np.ndarray:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "gaussian" and dictionary is None:
        raise ValueError("the gaussian scheme needs an encoding dictionary")

    def val(symbol: str) -> float:
        if symbol not in SYMBOLS:
            raise KeyError(f"unknown symbol {symbol!r}")
        return 1.0 if scheme == "one_hot" else dictionary.value(symbol)

    n_states = c.count(NodeKind.STATE)
    x = np.zeros((len(c.nodes), feature_width(directed)))
    for n in c.nodes:
        row = x[n.id]
        p = n.payload
        if n.kind == NodeKind.STATE:
            row[STATE_BITS] = float(p["initial"])
            row[STATE_BITS + 1] = float(p["accepting"])
        elif n.kind == NodeKind.TRANSITION:
            cube = Cube.parse(p["cube"])
            if cube.is_true():
                row[CONST] = 1.0
            for atom, positive in cube.literals:
                row[(POS if positive else NEG) + ATOMS.index(atom)] = val(atom)
            if directed:
                # ids shifted by one so state 0 still leaves a nonzero mark
                row[DIRECTION] = (p["src"] + 1) / n_states
                row[DIRECTION + 1] = (p["dst"] + 1) / n_states
        elif n.kind == NodeKind.LITERAL:
            atom = p["atom"]
            row[(POS if p["positive"] else NEG) + ATOMS.index(atom)] = val(atom)
        elif n.kind == NodeKind.CONSTANT:
            row[CONST] = 1.0 if p["value"] else -1.0
        elif n.kind == NodeKind.OPERATOR:
            op = p["op"]
            if op not in OPERATOR_ORDER:
                raise KeyError(f"unknown operator {op!r}")
            row[OPS + OPERATOR_ORDER.index(op)] = val(op)
    return x

"""Seeded random LTL formula generation."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .formula import (
    ATOMS,
    BINARY_BY_SYMBOL,
    FALSE,
    TRUE,
    UNARY_BY_SYMBOL,
    Atom,
    Formula,
)

# the ten operators of the formula alphabet
OPERATORS = ("!", "&", "|", "G", "F", "X", "U", "R", "W", "M")
UNARY_OPERATORS = tuple(o for o in OPERATORS if o in UNARY_BY_SYMBOL)
CONSTANT_PROBABILITY = 0.02


@dataclass(frozen=True)
class GenConfig:
    tree_size: int = 15
    atom_count: int = 4
    seed: int = 0
    allow_constants: bool = False

    def __post_init__(self) -> None:
        if self.tree_size < 1:
            raise ValueError("tree_size must be >= 1")
        if not 1 <= self.atom_count <= len(ATOMS):
            raise ValueError("atom_count must be within 1..26")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def random_ltl(cfg: GenConfig) -> Formula:
    """Grow a random expression tree with exactly ``cfg.tree_size`` nodes.

    Operators are drawn uniformly; for binary nodes the remaining size budget
    is split uniformly between the two children.  A size-2 subtree is forced
    to be a unary operator over a leaf.
    """
    rng = random.Random(cfg.seed)
    atoms = ATOMS[: cfg.atom_count]

    def leaf() -> Formula:
        if cfg.allow_constants and rng.random() < CONSTANT_PROBABILITY:
            return TRUE if rng.random() < 0.5 else FALSE
        return Atom(rng.choice(atoms))

    def grow(size: int) -> Formula:
        if size == 1:
            return leaf()
        op = rng.choice(UNARY_OPERATORS if size == 2 else OPERATORS)
        if op in UNARY_BY_SYMBOL:
            return UNARY_BY_SYMBOL[op](grow(size - 1))
        left = rng.randint(1, size - 2)
        return BINARY_BY_SYMBOL[op](grow(left), grow(size - 1 - left))

    return grow(cfg.tree_size)

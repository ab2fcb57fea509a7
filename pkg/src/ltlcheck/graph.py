"""System graph, specification tree and their union, plus structural perturbation.

Node ids are list positions.  In a union graph the system nodes (states,
then transitions) come first, followed by the expression-tree nodes in
pre-order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .automaton import BuchiAutomaton, Cube
from .formula import (
    Atom,
    FalseF,
    Formula,
    Not,
    TrueF,
    is_nnf,
)


class NodeKind(str, Enum):
    STATE = "state"
    TRANSITION = "transition"
    OPERATOR = "operator"
    LITERAL = "literal"
    CONSTANT = "constant"


class EdgeKind(str, Enum):
    INCIDENCE = "incidence"
    TREE = "tree"
    UNION = "union"


SYSTEM_KINDS = (NodeKind.STATE, NodeKind.TRANSITION)
TREE_KINDS = (NodeKind.OPERATOR, NodeKind.LITERAL, NodeKind.CONSTANT)


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    payload: dict = field(hash=False, compare=True)


Edge = tuple[int, int, EdgeKind]


@dataclass
class UnionGraph:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def count(self, kind: NodeKind) -> int:
        return sum(1 for n in self.nodes if n.kind == kind)

    def edges_of(self, kind: EdgeKind) -> list[Edge]:
        return [e for e in self.edges if e[2] == kind]

    def system_mask(self) -> np.ndarray:
        return np.array([n.kind in SYSTEM_KINDS for n in self.nodes], dtype=bool)

    def to_automaton(self) -> BuchiAutomaton:
        """Rebuild the automaton recorded in the state/transition payloads."""
        states = [n for n in self.nodes if n.kind == NodeKind.STATE]
        initial = next(n.payload["state"] for n in states if n.payload["initial"])
        accepting = frozenset(n.payload["state"] for n in states if n.payload["accepting"])
        transitions = tuple(
            (n.payload["src"], Cube.parse(n.payload["cube"]), n.payload["dst"])
            for n in self.nodes
            if n.kind == NodeKind.TRANSITION
        )
        return BuchiAutomaton(len(states), initial, accepting, transitions)


def build_system_graph(b: BuchiAutomaton) -> UnionGraph:
    """Bipartite state/transition graph; a self-loop contributes a single edge."""
    g = UnionGraph()
    for q in range(b.state_count):
        payload = {"state": q, "initial": q == b.initial, "accepting": q in b.accepting}
        g.nodes.append(Node(q, NodeKind.STATE, payload))
    for src, cube, dst in b.sorted_transitions():
        t = len(g.nodes)
        g.nodes.append(Node(t, NodeKind.TRANSITION, {"cube": cube.text(), "src": src, "dst": dst}))
        g.edges.append((src, t, EdgeKind.INCIDENCE))
        if dst != src:
            g.edges.append((dst, t, EdgeKind.INCIDENCE))
    return g


def build_spec_tree(f: Formula) -> UnionGraph:
    """Expression tree of an NNF formula with negations folded into literals."""
    if not is_nnf(f):
        raise ValueError("specification tree needs an NNF formula")
    g = UnionGraph()
    stack: list[tuple[Formula, int | None]] = [(f, None)]
    while stack:
        h, parent = stack.pop()
        i = len(g.nodes)
        if isinstance(h, Atom):
            g.nodes.append(Node(i, NodeKind.LITERAL, {"atom": h.name, "positive": True}))
        elif isinstance(h, Not):
            g.nodes.append(Node(i, NodeKind.LITERAL, {"atom": h.child.name, "positive": False}))
        elif isinstance(h, (TrueF, FalseF)):
            g.nodes.append(Node(i, NodeKind.CONSTANT, {"value": isinstance(h, TrueF)}))
        else:
            g.nodes.append(Node(i, NodeKind.OPERATOR, {"op": h.symbol}))
            stack.extend((c, i) for c in reversed(h.children()))
        if parent is not None:
            g.edges.append((parent, i, EdgeKind.TREE))
    return g


def build_union(system: UnionGraph, tree: UnionGraph) -> UnionGraph:
    """Disjoint union plus literal-transition links on shared atom names.

    Links ignore polarity: literal ``!b`` joins every transition whose cube
    mentions ``b`` in either polarity.
    """
    offset = len(system.nodes)
    g = UnionGraph(list(system.nodes), list(system.edges))
    for n in tree.nodes:
        g.nodes.append(Node(n.id + offset, n.kind, n.payload))
    g.edges += [(u + offset, v + offset, k) for u, v, k in tree.edges]

    by_atom: dict[str, list[int]] = {}
    for n in system.nodes:
        if n.kind == NodeKind.TRANSITION:
            for atom in Cube.parse(n.payload["cube"]).atoms:
                by_atom.setdefault(atom, []).append(n.id)
    for n in tree.nodes:
        if n.kind == NodeKind.LITERAL:
            for t in by_atom.get(n.payload["atom"], ()):
                g.edges.append((t, n.id + offset, EdgeKind.UNION))
    return g


def union_graph(b: BuchiAutomaton, f_nnf: Formula) -> UnionGraph:
    return build_union(build_system_graph(b), build_spec_tree(f_nnf))


def perturb_edges(c: UnionGraph, p: float, seed: int) -> UnionGraph:
    """Drop ``ceil(p * #incidence)`` incidence edges chosen uniformly at random."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    incidence = [i for i, e in enumerate(c.edges) if e[2] == EdgeKind.INCIDENCE]
    k = math.ceil(p * len(incidence))
    rng = np.random.default_rng(seed)
    dropped = set(rng.choice(incidence, size=k, replace=False).tolist()) if k else set()
    return UnionGraph(list(c.nodes), [e for i, e in enumerate(c.edges) if i not in dropped])


def dropped_transitions(original: UnionGraph, perturbed: UnionGraph) -> set[int]:
    """Transition node ids that lost at least one incidence edge."""
    kept = set(perturbed.edges)
    return {v for u, v, k in original.edges if k == EdgeKind.INCIDENCE and (u, v, k) not in kept}


def without_transitions(c: UnionGraph, transition_ids: set[int]) -> BuchiAutomaton:
    b = c.to_automaton()
    removed = {
        (n.payload["src"], n.payload["cube"], n.payload["dst"])
        for n in c.nodes
        if n.id in transition_ids
    }
    kept = tuple(t for t in b.transitions if (t[0], t[1].text(), t[2]) not in removed)
    return BuchiAutomaton(b.state_count, b.initial, b.accepting, kept)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

def invariant_violations(c: UnionGraph, perturbed: bool = False) -> list[str]:
    """Structural rules every union graph must satisfy (empty list when sound).

    Perturbed graphs may have transitions with no incidence edge left.
    """
    problems = []
    kind = {n.id: n.kind for n in c.nodes}
    if [n.id for n in c.nodes] != list(range(len(c.nodes))):
        problems.append("node ids are not 0..n-1")
    degree: dict[int, int] = {}
    for u, v, k in c.edges:
        pair = {kind[u], kind[v]}
        if k == EdgeKind.INCIDENCE:
            if pair != {NodeKind.STATE, NodeKind.TRANSITION}:
                problems.append(f"incidence edge {u}-{v} joins {pair}")
            t = u if kind[u] == NodeKind.TRANSITION else v
            degree[t] = degree.get(t, 0) + 1
        elif k == EdgeKind.TREE:
            if not pair <= set(TREE_KINDS):
                problems.append(f"tree edge {u}-{v} leaves the expression tree")
        elif k == EdgeKind.UNION:
            if pair != {NodeKind.LITERAL, NodeKind.TRANSITION}:
                problems.append(f"union edge {u}-{v} joins {pair}")
    for n in c.nodes:
        if n.kind == NodeKind.TRANSITION:
            d = degree.get(n.id, 0)
            if d > 2 or (d < 1 and not perturbed):
                problems.append(f"transition {n.id} has incidence degree {d}")
        if n.kind == NodeKind.OPERATOR and n.payload["op"] == "!":
            problems.append(f"operator node {n.id} is a negation")
    n_tree = sum(1 for n in c.nodes if n.kind in TREE_KINDS)
    n_tree_edges = sum(1 for e in c.edges if e[2] == EdgeKind.TREE)
    if n_tree and n_tree_edges != n_tree - 1:
        problems.append(f"{n_tree} tree nodes but {n_tree_edges} tree edges")
    return problems

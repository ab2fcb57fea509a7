"""LTL to Büchi translation by tableau expansion.

Each automaton state is a set of obligations (core-NNF subformulas that must
hold from the current position).  A state is expanded into covers: a cube of
literals that must hold now, the obligations for the next position, and the
set of Until formulas postponed along the way.  Acceptance is generalized
(one set per Until: the transitions that do not postpone it), then turned
into state-based Büchi acceptance with a level counter.
"""

from __future__ import annotations

from collections import deque

from .automaton import BuchiAutomaton, Cube, trim
from .formula import (
    And,
    Atom,
    FalseF,
    Formula,
    Next,
    Not,
    Or,
    Release,
    TrueF,
    Until,
    is_core,
    subformulas,
)
from .oracle import DEFAULT_STATE_CAP, Deadline, StateCapExceeded

# node kinds in the interned table
_TRUE, _FALSE, _LIT, _AND, _OR, _NEXT, _UNTIL, _RELEASE = range(8)


class _Table:
    """Interns subformulas so that obligation sets are sets of small ints."""

    def __init__(self, f: Formula):
        self.ids: dict[Formula, int] = {}
        self.nodes: list[tuple] = []
        for g in reversed(list(subformulas(f))):
            self.intern(g)
        self.root = self.ids[f]
        self.untils = [i for i, n in enumerate(self.nodes) if n[0] == _UNTIL]

    def intern(self, g: Formula) -> int:
        if g in self.ids:
            return self.ids[g]
        if isinstance(g, TrueF):
            node = (_TRUE,)
        elif isinstance(g, FalseF):
            node = (_FALSE,)
        elif isinstance(g, Atom):
            node = (_LIT, g.name, True)
        elif isinstance(g, Not):
            node = (_LIT, g.child.name, False)
        elif isinstance(g, And):
            node = (_AND, self.intern(g.left), self.intern(g.right))
        elif isinstance(g, Or):
            node = (_OR, self.intern(g.left), self.intern(g.right))
        elif isinstance(g, Next):
            node = (_NEXT, self.intern(g.child))
        elif isinstance(g, Until):
            node = (_UNTIL, self.intern(g.left), self.intern(g.right))
        elif isinstance(g, Release):
            node = (_RELEASE, self.intern(g.left), self.intern(g.right))
        else:
            raise TypeError(f"not a core formula node: {g!r}")
        self.ids[g] = len(self.nodes)
        self.nodes.append(node)
        return self.ids[g]


def _expand(table: _Table, state: frozenset[int]):
    """All covers of ``state`` as (cube literals, next obligations, postponed untils)."""
    nodes = table.nodes
    true_id = next((i for i, n in enumerate(nodes) if n[0] == _TRUE), None)
    results = set()
    # explicit stack of partial branches: (todo, processed, cube, nxt, pending)
    stack = [(list(sorted(state)), frozenset(), {}, frozenset(), frozenset())]
    while stack:
        todo, done, cube, nxt, pending = stack.pop()
        alive = True
        while todo and alive:
            i = todo.pop()
            if i in done:
                continue
            done = done | {i}
            node = nodes[i]
            kind = node[0]
            if kind == _TRUE:
                continue
            if kind == _FALSE:
                alive = False
            elif kind == _LIT:
                _, atom, pol = node
                if cube.get(atom, pol) != pol:
                    alive = False
                else:
                    cube = {**cube, atom: pol}
            elif kind == _AND:
                todo.extend((node[1], node[2]))
            elif kind == _OR:
                stack.append((todo + [node[2]], done, cube, nxt, pending))
                todo.append(node[1])
            elif kind == _NEXT:
                if node[1] != true_id:
                    nxt = nxt | {node[1]}
            elif kind == _UNTIL:
                # postpone: a now, the until again next time
                stack.append((todo + [node[1]], done, cube, nxt | {i}, pending | {i}))
                todo.append(node[2])
            elif kind == _RELEASE:
                stack.append((todo + [node[2]], done, cube, nxt | {i}, pending))
                todo.extend((node[1], node[2]))
        if alive:
            results.add((frozenset(cube.items()), nxt, pending))

    # drop covers dominated by a weaker cube with fewer obligations and postponements
    ordered = sorted(results, key=lambda r: (len(r[0]) + len(r[1]) + len(r[2]), sorted(r[0]), sorted(r[1]), sorted(r[2])))
    kept: list = []
    for lits, nxt, pending in ordered:
        if any(
            k_lits <= lits and k_nxt <= nxt and k_pend <= pending
            for k_lits, k_nxt, k_pend in kept
        ):
            continue
        kept.append((lits, nxt, pending))
    return kept


def translate(
    f: Formula,
    state_cap: int = DEFAULT_STATE_CAP,
    deadline: Deadline | None = None,
) -> BuchiAutomaton:
    """Büchi automaton accepting exactly the words satisfying the core-NNF formula ``f``."""
    if not is_core(f):
        raise ValueError("translate expects a core NNF formula (use to_core(to_nnf(f)))")
    table = _Table(f)
    k = len(table.untils)
    root = frozenset() if table.nodes[table.root][0] == _TRUE else frozenset({table.root})

    covers: dict[frozenset[int], list] = {}
    start = (root, 0)
    ids = {start: 0}
    queue = deque([start])
    edges = []
    while queue:
        node = queue.popleft()
        if deadline is not None:
            deadline.poll()
        state, level = node
        if state not in covers:
            covers[state] = _expand(table, state)
        base = 0 if level == k else level
        for lits, nxt, pending in covers[state]:
            j = base
            while j < k and table.untils[j] not in pending:
                j += 1
            target = (nxt, j)
            if target not in ids:
                if len(ids) >= state_cap:
                    raise StateCapExceeded(f"translation exceeds {state_cap} states")
                ids[target] = len(ids)
                queue.append(target)
            edges.append((ids[node], Cube(lits), ids[target]))
    accepting = frozenset(i for (_, level), i in ids.items() if level == k)
    b = BuchiAutomaton(len(ids), 0, accepting, tuple(edges))
    return _merge_equivalent(trim(b))


def _merge_equivalent(b: BuchiAutomaton) -> BuchiAutomaton:
    """Merge states with identical acceptance and identical outgoing transitions."""
    while True:
        succ = b.successors()
        rep: dict = {}
        mapping = {}
        for q in range(b.state_count):
            sig = (q in b.accepting, frozenset((c, d) for c, d in succ[q]))
            mapping[q] = rep.setdefault(sig, q)
        if len(rep) == b.state_count:
            return b
        transitions = {(mapping[s], c, mapping[d]) for s, c, d in b.transitions if mapping[s] == s}
        accepting = frozenset(mapping[q] for q in b.accepting)
        merged = BuchiAutomaton(b.state_count, mapping[b.initial], accepting, tuple(transitions))
        b = trim(merged)

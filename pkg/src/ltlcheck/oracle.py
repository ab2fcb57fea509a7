"""Classical automata-theoretic model checking: product, emptiness, membership."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable

from .automaton import BuchiAutomaton, Cube
from .formula import Formula, atoms_of, negate, to_core
from .semantics import Lasso, UndeclaredAtomError

DEFAULT_STATE_CAP = 200_000


class ResourceLimit(RuntimeError):
    """The check could not finish within its budget; the verdict is unknown."""


class StateCapExceeded(ResourceLimit):
    pass


class CheckTimeout(ResourceLimit):
    pass


class Deadline:
    def __init__(self, timeout_s: float | None):
        self.expires = None if timeout_s is None else time.monotonic() + timeout_s

    def poll(self) -> None:
        if self.expires is not None and time.monotonic() > self.expires:
            raise CheckTimeout("wall-clock budget exhausted")


# ---------------------------------------------------------------------------
# strongly connected components
# ---------------------------------------------------------------------------

def tarjan(start: Hashable, succ: Callable[[Hashable], Iterable[Hashable]]) -> list[list]:
    """SCCs reachable from ``start``, emitted sinks-first (reverse topological).

    Iterative, so deep graphs do not hit the recursion limit.
    """
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0

    index[start] = low[start] = counter
    counter += 1
    stack.append(start)
    on_stack.add(start)
    work = [(start, iter(succ(start)))]
    while work:
        v, it = work[-1]
        advanced = False
        for w in it:
            if w not in index:
                index[w] = low[w] = counter
                counter += 1
                stack.append(w)
                on_stack.add(w)
                work.append((w, iter(succ(w))))
                advanced = True
                break
            if w in on_stack and index[w] < low[v]:
                low[v] = index[w]
        if advanced:
            continue
        work.pop()
        if work:
            parent = work[-1][0]
            if low[v] < low[parent]:
                low[parent] = low[v]
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)
    return out


def _nontrivial(comp: list, succ: Callable) -> bool:
    if len(comp) > 1:
        return True
    v = comp[0]
    return any(w == v for w in succ(v))


def accepting_cycle_nodes(
    n: int, start: int, succ: Callable[[int], Iterable[int]], accepting: Iterable[int]
) -> set[int]:
    """Nodes reachable from ``start`` that can reach a cycle through an accepting node."""
    acc = set(accepting)
    live: set[int] = set()
    for comp in tarjan(start, succ):
        members = set(comp)
        good = any(v in acc for v in comp) and _nontrivial(comp, succ)
        # successors' components were emitted earlier, so ``live`` already knows them
        if good or any(w in live for v in comp for w in succ(v) if w not in members):
            live |= members
    return live


def _find_accepting_scc(start, succ, is_accepting):
    for comp in tarjan(start, succ):
        if any(is_accepting(v) for v in comp) and _nontrivial(comp, succ):
            return comp
    return None


def _bfs_path(src, dst_pred, edges, allowed=None):
    """Shortest list of (label, node) steps from ``src`` to a node satisfying
    ``dst_pred``, taking at least one step."""
    parent: dict = {}
    queue = deque()
    for label, w in edges(src):
        if allowed is not None and w not in allowed:
            continue
        if w not in parent:
            parent[w] = (None, label)
            queue.append(w)
    while queue:
        v = queue.popleft()
        if dst_pred(v):
            path = []
            while v is not None:
                prev, label = parent[v]
                path.append((label, v))
                v = prev
            return path[::-1]
        for label, w in edges(v):
            if allowed is not None and w not in allowed:
                continue
            if w not in parent:
                parent[w] = (v, label)
                queue.append(w)
    return None


# ---------------------------------------------------------------------------
# emptiness and membership
# ---------------------------------------------------------------------------

def _concretize(cube: Cube) -> frozenset[str]:
    # unconstrained atoms default to false
    return frozenset(a for a, p in cube.literals if p)


def is_empty(b: BuchiAutomaton) -> Lasso | None:
    """``None`` when the language is empty, otherwise an accepted lasso word."""
    succ_lists = b.successors()

    def succ(q):
        return (d for _, d in succ_lists[q])

    def edges(q):
        return sorted(((c, d) for c, d in succ_lists[q]), key=lambda cd: (cd[1], cd[0].text()))

    comp = _find_accepting_scc(b.initial, succ, lambda q: q in b.accepting)
    if comp is None:
        return None
    members = set(comp)
    target = min(q for q in comp if q in b.accepting)
    if b.initial == target:
        stem = []
    else:
        stem = _bfs_path(b.initial, lambda q: q == target, edges)
    cycle = _bfs_path(target, lambda q: q == target, edges, allowed=members)
    assert cycle is not None
    prefix = tuple(_concretize(c) for c, _ in stem)
    loop = tuple(_concretize(c) for c, _ in cycle)
    return Lasso(prefix, loop, b.atom_universe)


def accepts_lasso(b: BuchiAutomaton, w: Lasso) -> bool:
    """Whether ``b`` has a run on ``w`` visiting an accepting state infinitely often."""
    missing = b.atom_universe - w.atoms
    if missing:
        raise UndeclaredAtomError(f"atoms {sorted(missing)} not declared in lasso")
    succ_lists = b.successors()
    n = len(w)
    letters = [w.letter(i) for i in range(n)]
    nxt = [w.successor(i) for i in range(n)]

    def succ(node):
        q, i = divmod(node, n)
        return [d * n + nxt[i] for c, d in succ_lists[q] if c.satisfied_by(letters[i])]

    start = b.initial * n
    return _find_accepting_scc(start, succ, lambda v: v // n in b.accepting) is not None


# ---------------------------------------------------------------------------
# product
# ---------------------------------------------------------------------------

def product(
    b1: BuchiAutomaton,
    b2: BuchiAutomaton,
    state_cap: int = DEFAULT_STATE_CAP,
    deadline: Deadline | None = None,
) -> BuchiAutomaton:
    """Intersection automaton, degeneralized with a two-valued flag.

    Flag 0 waits for an accepting state of ``b1``, flag 1 for one of ``b2``;
    states of ``b1``-acceptance under flag 0 are accepting.
    """
    s1, s2 = b1.successors(), b2.successors()
    f1, f2 = b1.accepting, b2.accepting
    start = (b1.initial, b2.initial, 0)
    ids = {start: 0}
    queue = deque([start])
    transitions = []
    while queue:
        q1, q2, flag = node = queue.popleft()
        if deadline is not None:
            deadline.poll()
        if flag == 0 and q1 in f1:
            nflag = 1
        elif flag == 1 and q2 in f2:
            nflag = 0
        else:
            nflag = flag
        for c1, d1 in s1[q1]:
            for c2, d2 in s2[q2]:
                if not c1.compatible(c2):
                    continue
                target = (d1, d2, nflag)
                if target not in ids:
                    if len(ids) >= state_cap:
                        raise StateCapExceeded(f"product exceeds {state_cap} states")
                    ids[target] = len(ids)
                    queue.append(target)
                transitions.append((ids[node], c1.union(c2), ids[target]))
    accepting = frozenset(i for (q1, _, flag), i in ids.items() if flag == 0 and q1 in f1)
    return BuchiAutomaton(len(ids), 0, accepting, tuple(transitions))


# ---------------------------------------------------------------------------
# model checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    holds: bool
    counterexample: Lasso | None
    explored_states: int
    elapsed: float

    def __post_init__(self) -> None:
        if self.holds != (self.counterexample is None):
            raise ValueError("counterexample must be present exactly when the check fails")


def check(
    b: BuchiAutomaton,
    f: Formula,
    state_cap: int = DEFAULT_STATE_CAP,
    timeout_s: float | None = None,
) -> Verdict:
    """Decide whether every word accepted by ``b`` satisfies ``f``.

    Raises ``ResourceLimit`` (verdict "unknown") when the state cap or the
    wall-clock budget is hit.
    """
    from .translate import translate

    t0 = time.perf_counter()
    deadline = Deadline(timeout_s)
    neg = translate(to_core(negate(f)), state_cap=state_cap, deadline=deadline)
    prod = product(b, neg, state_cap=state_cap, deadline=deadline)
    witness = is_empty(prod)
    if witness is not None:
        declared = witness.atoms | b.atom_universe | atoms_of(f)
        witness = Lasso(witness.prefix, witness.loop, declared)
    return Verdict(
        holds=witness is None,
        counterexample=witness,
        explored_states=prod.state_count,
        elapsed=time.perf_counter() - t0,
    )

"""Büchi automata with cube-labelled transitions, plus the canonical text format."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable

from .formula import ATOMS


class AutomatonFormatError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Cube:
    """Conjunction of literals; the empty cube is ``1`` (true)."""

    literals: frozenset[tuple[str, bool]] = field(default=frozenset())

    def __post_init__(self) -> None:
        names = [a for a, _ in self.literals]
        if len(names) != len(set(names)):
            raise ValueError(f"contradictory cube: {sorted(self.literals)}")

    @classmethod
    def of(cls, *lits: str) -> "Cube":
        """``Cube.of("a", "!b")``"""
        return cls(frozenset((s.lstrip("!"), not s.startswith("!")) for s in lits))

    @classmethod
    def parse(cls, text: str) -> "Cube":
        text = text.strip()
        if text == "1":
            return TRUE_CUBE
        lits = []
        for part in text.split("&"):
            part = part.strip()
            positive = not part.startswith("!")
            name = part[1:].strip() if not positive else part
            if len(name) != 1 or name not in ATOMS:
                raise AutomatonFormatError(f"bad literal {part!r}")
            lits.append((name, positive))
        try:
            return cls(frozenset(lits))
        except ValueError as exc:
            raise AutomatonFormatError(str(exc)) from None

    @property
    def atoms(self) -> frozenset[str]:
        return frozenset(a for a, _ in self.literals)

    def is_true(self) -> bool:
        return not self.literals

    def compatible(self, other: "Cube") -> bool:
        mine = dict(self.literals)
        return all(mine.get(a, p) == p for a, p in other.literals)

    def union(self, other: "Cube") -> "Cube":
        return Cube(self.literals | other.literals)

    def implies(self, other: "Cube") -> bool:
        return other.literals <= self.literals

    def satisfied_by(self, letter: frozenset[str]) -> bool:
        return all((a in letter) == p for a, p in self.literals)

    def sorted_literals(self) -> list[tuple[str, bool]]:
        return sorted(self.literals)

    def text(self) -> str:
        if not self.literals:
            return "1"
        return " & ".join(a if p else "!" + a for a, p in self.sorted_literals())

    def __str__(self) -> str:
        return self.text()


TRUE_CUBE = Cube()

Transition = tuple[int, Cube, int]


@dataclass(frozen=True)
class BuchiAutomaton:
    """State-based Büchi automaton over states ``0 .. state_count-1``."""

    state_count: int
    initial: int
    accepting: frozenset[int]
    transitions: tuple[Transition, ...]

    def __post_init__(self) -> None:
        n = self.state_count
        if n < 1:
            raise ValueError("automaton needs at least one state")
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        bad = [q for q in self.accepting if not 0 <= q < n]
        if bad:
            raise ValueError(f"accepting states out of range: {bad}")
        for src, _, dst in self.transitions:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"dangling transition {src} -> {dst}")

    @property
    def atom_universe(self) -> frozenset[str]:
        return frozenset().union(*(c.atoms for _, c, _ in self.transitions))

    def successors(self) -> list[list[tuple[Cube, int]]]:
        out: list[list[tuple[Cube, int]]] = [[] for _ in range(self.state_count)]
        for src, cube, dst in self.transitions:
            out[src].append((cube, dst))
        return out

    def sorted_transitions(self) -> list[Transition]:
        return sorted(self.transitions, key=lambda t: (t[0], t[2], t[1].text()))

    def digest(self) -> str:
        return hashlib.sha256(write_automaton(self).encode()).hexdigest()[:16]


def universal_automaton() -> BuchiAutomaton:
    return BuchiAutomaton(1, 0, frozenset({0}), ((0, TRUE_CUBE, 0),))


def trim(b: BuchiAutomaton) -> BuchiAutomaton:
    """Keep only states that are reachable and can still reach an accepting cycle.

    Parallel transitions whose cube implies a sibling's cube are dropped as
    well, so every remaining transition carries some accepted word.  States
    are renumbered in breadth-first order from the initial state.
    """
    from .oracle import accepting_cycle_nodes  # cyclic import: oracle needs Cube

    succ = b.successors()
    live = accepting_cycle_nodes(
        b.state_count, b.initial, lambda q: (d for _, d in succ[q]), b.accepting
    )
    if b.initial not in live:
        return BuchiAutomaton(1, 0, frozenset(), ())

    kept: dict[tuple[int, int], list[Cube]] = {}
    for src, cube, dst in b.transitions:
        if src in live and dst in live:
            kept.setdefault((src, dst), []).append(cube)
    for key, cubes in kept.items():
        cubes = sorted(set(cubes), key=lambda c: (len(c.literals), c.text()))
        minimal: list[Cube] = []
        for c in cubes:
            if not any(c.implies(m) for m in minimal):
                minimal.append(c)
        kept[key] = minimal

    order = {b.initial: 0}
    queue = [b.initial]
    for q in queue:
        for _, d in sorted(succ[q], key=lambda cd: cd[1]):
            if d in live and d not in order and kept.get((q, d)):
                order[d] = len(order)
                queue.append(d)
    transitions = tuple(
        (order[s], c, order[d])
        for (s, d), cubes in kept.items()
        for c in cubes
        if s in order and d in order
    )
    accepting = frozenset(order[q] for q in b.accepting if q in order)
    out = BuchiAutomaton(len(order), 0, accepting, transitions)
    return BuchiAutomaton(out.state_count, 0, accepting, tuple(out.sorted_transitions()))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def write_automaton(b: BuchiAutomaton) -> str:
    lines = [
        f"states {b.state_count}",
        f"initial {b.initial}",
        " ".join(["accepting"] + [str(q) for q in sorted(b.accepting)]),
    ]
    lines += [f"{s} -> {d} : {c.text()}" for s, c, d in b.sorted_transitions()]
    return "\n".join(lines) + "\n"


def _header(line: str, key: str) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise AutomatonFormatError(f"expected '{key}' header, got {line!r}")
    return parts[1:]


def _int(tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise AutomatonFormatError(f"bad state id {tok!r}") from None


def read_automaton(text: str) -> BuchiAutomaton:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) < 3:
        raise AutomatonFormatError("missing header lines")
    n_tok = _header(lines[0], "states")
    init_tok = _header(lines[1], "initial")
    if len(n_tok) != 1 or len(init_tok) != 1:
        raise AutomatonFormatError("malformed header")
    n, init = _int(n_tok[0]), _int(init_tok[0])
    accepting = frozenset(_int(t) for t in _header(lines[2], "accepting"))
    transitions = []
    for ln in lines[3:]:
        try:
            arrow, cube = ln.split(":", 1)
            src, dst = arrow.split("->")
        except ValueError:
            raise AutomatonFormatError(f"malformed transition line {ln!r}") from None
        transitions.append((_int(src.strip()), Cube.parse(cube), _int(dst.strip())))
    try:
        return BuchiAutomaton(n, init, accepting, tuple(transitions))
    except ValueError as exc:
        raise AutomatonFormatError(str(exc)) from None


def from_edges(
    n: int, initial: int, accepting: Iterable[int], edges: Iterable[tuple[int, str, int]]
) -> BuchiAutomaton:
    """Convenience builder: ``edges`` carry cube text such as ``"a & !b"``."""
    return BuchiAutomaton(
        n, initial, frozenset(accepting), tuple((s, Cube.parse(c), d) for s, c, d in edges)
    )

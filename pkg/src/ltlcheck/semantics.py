"""Exact LTL semantics on ultimately periodic words ``prefix . loop^omega``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .formula import (
    And,
    Atom,
    FalseF,
    Finally,
    Formula,
    Globally,
    Next,
    Not,
    Or,
    Release,
    StrongRelease,
    TrueF,
    Until,
    WeakUntil,
    atoms_of,
)


class UndeclaredAtomError(KeyError):
    pass


@dataclass(frozen=True)
class Lasso:
    """A lasso word.  Each letter is the set of atoms that are true there.

    ``atoms`` is the declared atom set; every assignment is total over it
    (atoms not in a letter are false).
    """

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]
    atoms: frozenset[str] = field(default=frozenset())

    def __post_init__(self) -> None:
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")
        used = frozenset().union(*self.prefix, *self.loop)
        if not used <= self.atoms:
            object.__setattr__(self, "atoms", self.atoms | used)

    @classmethod
    def from_dicts(
        cls, prefix: Iterable[Mapping[str, bool]], loop: Iterable[Mapping[str, bool]]
    ) -> "Lasso":
        prefix, loop = list(prefix), list(loop)
        atoms = frozenset(k for d in prefix + loop for k in d)
        for d in prefix + loop:
            if frozenset(d) != atoms:
                raise ValueError("assignments must be total over the same atoms")
        to_letter = lambda d: frozenset(k for k, v in d.items() if v)  # noqa: E731
        return cls(tuple(map(to_letter, prefix)), tuple(map(to_letter, loop)), atoms)

    def __len__(self) -> int:
        return len(self.prefix) + len(self.loop)

    def letter(self, i: int) -> frozenset[str]:
        return self.prefix[i] if i < len(self.prefix) else self.loop[i - len(self.prefix)]

    def successor(self, i: int) -> int:
        return i + 1 if i + 1 < len(self) else len(self.prefix)

    def assignments(self) -> list[dict[str, bool]]:
        return [{a: a in self.letter(i) for a in sorted(self.atoms)} for i in range(len(self))]

    def to_dict(self) -> dict:
        return {
            "atoms": sorted(self.atoms),
            "prefix": [sorted(x) for x in self.prefix],
            "loop": [sorted(x) for x in self.loop],
        }

    def __str__(self) -> str:
        def fmt(letter: frozenset[str]) -> str:
            lits = [a if a in letter else "!" + a for a in sorted(self.atoms)]
            return "{" + ",".join(lits) + "}"

        pre = " ".join(fmt(x) for x in self.prefix)
        cyc = " ".join(fmt(x) for x in self.loop)
        return f"{pre} ({cyc})^w".strip()


def eval_on_lasso(f: Formula, w: Lasso) -> bool:
    """Truth value of ``f`` at position 0 of ``w``."""
    missing = atoms_of(f) - w.atoms
    if missing:
        raise UndeclaredAtomError(f"atoms {sorted(missing)} not declared in lasso")
    return _table(f, w, {})[0]


def _table(f: Formula, w: Lasso, memo: dict) -> list[bool]:
    # one truth value per suffix class 0 .. |prefix|+|loop|-1
    if f in memo:
        return memo[f]
    n = len(w)
    succ = [w.successor(i) for i in range(n)]
    if isinstance(f, Atom):
        out = [f.name in w.letter(i) for i in range(n)]
    elif isinstance(f, TrueF):
        out = [True] * n
    elif isinstance(f, FalseF):
        out = [False] * n
    elif isinstance(f, Not):
        out = [not v for v in _table(f.child, w, memo)]
    elif isinstance(f, And):
        out = [x and y for x, y in zip(_table(f.left, w, memo), _table(f.right, w, memo))]
    elif isinstance(f, Or):
        out = [x or y for x, y in zip(_table(f.left, w, memo), _table(f.right, w, memo))]
    elif isinstance(f, Next):
        c = _table(f.child, w, memo)
        out = [c[succ[i]] for i in range(n)]
    else:
        out = _fixpoint(f, w, memo, succ)
    memo[f] = out
    return out


def _fixpoint(f: Formula, w: Lasso, memo: dict, succ: list[int]) -> list[bool]:
    n = len(w)
    if isinstance(f, (Globally, Finally)):
        a = _table(f.child, w, memo)
        b = None
    else:
        a = _table(f.left, w, memo)
        b = _table(f.right, w, memo)

    if isinstance(f, Until):  # least: b | (a & X self)
        step, init = (lambda i, v: b[i] or (a[i] and v[succ[i]])), False
    elif isinstance(f, StrongRelease):  # least: b & (a | X self)
        step, init = (lambda i, v: b[i] and (a[i] or v[succ[i]])), False
    elif isinstance(f, Finally):
        step, init = (lambda i, v: a[i] or v[succ[i]]), False
    elif isinstance(f, Release):  # greatest: b & (a | X self)
        step, init = (lambda i, v: b[i] and (a[i] or v[succ[i]])), True
    elif isinstance(f, WeakUntil):  # greatest: b | (a & X self)
        step, init = (lambda i, v: b[i] or (a[i] and v[succ[i]])), True
    elif isinstance(f, Globally):
        step, init = (lambda i, v: a[i] and v[succ[i]]), True
    else:
        raise TypeError(f"unsupported formula node {f!r}")

    v = [init] * n
    while True:
        # sweep backwards so values propagate against the successor relation
        changed = False
        for i in reversed(range(n)):
            nv = step(i, v)
            if nv != v[i]:
                v[i] = nv
                changed = True
        if not changed:
            return v


def all_lassos(atoms: Iterable[str], max_prefix: int, max_loop: int) -> Iterator[Lasso]:
    """Every lasso with ``|prefix| <= max_prefix`` and ``1 <= |loop| <= max_loop``."""
    atoms = sorted(set(atoms))
    letters = [
        frozenset(a for a, bit in zip(atoms, bits) if bit)
        for bits in itertools.product((False, True), repeat=len(atoms))
    ]
    declared = frozenset(atoms)
    for lp in range(max_prefix + 1):
        for ll in range(1, max_loop + 1):
            for word in itertools.product(letters, repeat=lp + ll):
                yield Lasso(word[:lp], word[lp:], declared)

"""Exhaustive bounded lasso sweeps, vectorized with numpy.

A sweep covers every lasso ``u . v^omega`` with ``|u| <= max_prefix`` and
``1 <= |v| <= max_loop`` over a fixed atom set.  For one shape
``(|u|, |v|)`` the result is a boolean table indexed ``[v, u]``:

* loop index ``v``: letter at loop position ``j`` is digit ``j`` of ``v``
  in base ``m`` (least significant first);
* prefix index ``u``: letter at prefix position ``i`` is digit ``i`` of
  ``u`` counted from the most significant end;

where ``m = 2 ** len(atoms)`` and atom ``k`` (sorted order) is bit ``k`` of
a letter.  Loop-part truth values are computed once per loop by fixpoint
iteration; the prefix part is a backward pass whose arrays grow by a factor
``m`` per position, so a sweep costs a handful of array operations per
subformula rather than one evaluation per lasso.  This is an independent
route from both :func:`~ltlcheck.semantics.eval_on_lasso` and the automata
pipeline, and is cross-checked against the former on small bounds.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .automaton import BuchiAutomaton, Cube
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
from .semantics import Lasso

Shape = tuple[int, int]


class LassoSweep:
    def __init__(self, atoms, max_prefix: int = 4, max_loop: int = 4):
        self.atoms = sorted(set(atoms))
        self.m = 2 ** len(self.atoms)
        self.max_prefix = max_prefix
        self.max_loop = max_loop
        self._bit = {a: k for k, a in enumerate(self.atoms)}
        letters = np.arange(self.m)
        # letter-level truth of each atom, shape (m,)
        self._letter_atom = {a: ((letters >> k) & 1).astype(bool) for a, k in self._bit.items()}
        self._loop_letters = {
            ll: (np.arange(self.m**ll)[None, :] // (self.m ** np.arange(ll))[:, None]) % self.m
            for ll in range(1, max_loop + 1)
        }

    @property
    def shapes(self) -> list[Shape]:
        return [(lp, ll) for lp in range(self.max_prefix + 1) for ll in range(1, self.max_loop + 1)]

    def __len__(self) -> int:
        return sum(self.m ** (lp + ll) for lp, ll in self.shapes)

    def lasso(self, shape: Shape, v: int, u: int) -> Lasso:
        lp, ll = shape
        letter = lambda x: frozenset(a for a, k in self._bit.items() if (x >> k) & 1)  # noqa: E731
        loop = tuple(letter((v // self.m**j) % self.m) for j in range(ll))
        prefix = tuple(letter((u // self.m ** (lp - 1 - i)) % self.m) for i in range(lp))
        return Lasso(prefix, loop, frozenset(self.atoms))

    def lassos(self) -> Iterator[tuple[Shape, int, int, Lasso]]:
        """Every lasso of the sweep with its table coordinates (slow; for cross-checks)."""
        for shape in self.shapes:
            lp, ll = shape
            for v in range(self.m**ll):
                for u in range(self.m**lp):
                    yield shape, v, u, self.lasso(shape, v, u)

    def first_true(self, tables: dict[Shape, np.ndarray]) -> Lasso | None:
        for shape in self.shapes:
            hits = np.argwhere(tables[shape])
            if len(hits):
                v, u = hits[0]
                return self.lasso(shape, int(v), int(u))
        return None

    # ------------------------------------------------------------------
    # formulas
    # ------------------------------------------------------------------

    def formula_tables(self, f: Formula) -> dict[Shape, np.ndarray]:
        missing = atoms_of(f) - set(self.atoms)
        if missing:
            raise KeyError(f"atoms {sorted(missing)} not in the sweep alphabet")
        order = _postorder(f)
        out = {}
        for ll in range(1, self.max_loop + 1):
            loop = self._formula_loop(order, ll)
            for lp in range(self.max_prefix + 1):
                out[(lp, ll)] = self._formula_prefix(order, loop, lp)
        return out

    def _formula_loop(self, order: list[Formula], ll: int) -> dict[Formula, np.ndarray]:
        letters = self._loop_letters[ll]  # (ll, nv)
        nv = letters.shape[1]
        nxt = [(j + 1) % ll for j in range(ll)]
        val: dict[Formula, np.ndarray] = {}
        for g in order:
            if g in val:
                continue
            if isinstance(g, Atom):
                val[g] = self._letter_atom[g.name][letters]
            elif isinstance(g, TrueF):
                val[g] = np.ones((ll, nv), bool)
            elif isinstance(g, FalseF):
                val[g] = np.zeros((ll, nv), bool)
            elif isinstance(g, Not):
                val[g] = ~val[g.child]
            elif isinstance(g, And):
                val[g] = val[g.left] & val[g.right]
            elif isinstance(g, Or):
                val[g] = val[g.left] | val[g.right]
            elif isinstance(g, Next):
                val[g] = val[g.child][nxt]
            else:
                step, init = _temporal_step(g, val)
                cur = np.full((ll, nv), init)
                while True:
                    before = cur.copy()
                    for j in reversed(range(ll)):
                        cur[j] = step(j, cur[nxt[j]])
                    if np.array_equal(before, cur):
                        break
                val[g] = cur
        return val

    def _formula_prefix(self, order, loop, lp: int) -> np.ndarray:
        cur = {g: v[0][:, None] for g, v in loop.items()}  # (nv, 1) at position lp
        m = self.m
        for _ in range(lp):
            new: dict[Formula, np.ndarray] = {}
            nv, width = next(iter(cur.values())).shape[0], next(iter(cur.values())).shape[1]
            shape = (nv, m, width)
            for g in order:
                if g in new:
                    continue
                if isinstance(g, Atom):
                    new[g] = np.broadcast_to(self._letter_atom[g.name][None, :, None], shape)
                elif isinstance(g, TrueF):
                    new[g] = np.ones((1, 1, 1), bool)
                elif isinstance(g, FalseF):
                    new[g] = np.zeros((1, 1, 1), bool)
                elif isinstance(g, Not):
                    new[g] = ~new[g.child]
                elif isinstance(g, And):
                    new[g] = new[g.left] & new[g.right]
                elif isinstance(g, Or):
                    new[g] = new[g.left] | new[g.right]
                elif isinstance(g, Next):
                    new[g] = cur[g.child][:, None, :]
                else:
                    step, _ = _temporal_step(g, new)
                    new[g] = step(None, cur[g][:, None, :])
            cur = {
                g: np.ascontiguousarray(np.broadcast_to(a, shape)).reshape(nv, m * width)
                for g, a in new.items()
            }
        return np.ascontiguousarray(np.broadcast_to(cur[order[-1]], cur[order[-1]].shape))

    # ------------------------------------------------------------------
    # automata
    # ------------------------------------------------------------------

    def automaton_tables(self, b: BuchiAutomaton) -> dict[Shape, np.ndarray]:
        missing = b.atom_universe - set(self.atoms)
        if missing:
            raise KeyError(f"atoms {sorted(missing)} not in the sweep alphabet")
        out = {}
        for ll in range(1, self.max_loop + 1):
            start = self._automaton_loop(b, ll)  # (n, nv) acceptance from loop position 0
            for lp in range(self.max_prefix + 1):
                out[(lp, ll)] = self._automaton_prefix(b, start, lp)
        return out

    def _cube_letters(self, cube: Cube) -> np.ndarray:
        mask = np.ones(self.m, bool)
        for a, pol in cube.literals:
            mask &= self._letter_atom[a] == pol
        return mask

    def _automaton_loop(self, b: BuchiAutomaton, ll: int) -> np.ndarray:
        letters = self._loop_letters[ll]
        nv = letters.shape[1]
        n = b.state_count
        nxt = [(j + 1) % ll for j in range(ll)]
        guards = [self._cube_letters(c)[letters] for _, c, _ in b.transitions]  # (ll, nv)
        acc = np.zeros((n, 1, 1), bool)
        acc[list(b.accepting)] = True

        def ex(x: np.ndarray) -> np.ndarray:
            out = np.zeros((n, ll, nv), bool)
            for (s, _, d), g in zip(b.transitions, guards):
                out[s] |= g & x[d][nxt]
            return out

        def reach(target: np.ndarray) -> np.ndarray:
            y = target.copy()
            while True:
                y2 = target | ex(y)
                if np.array_equal(y, y2):
                    return y
                y = y2

        z = np.ones((n, ll, nv), bool)
        while True:
            z2 = ex(reach(acc & z))
            if np.array_equal(z, z2):
                return z[:, 0, :]
            z = z2

    def _automaton_prefix(self, b: BuchiAutomaton, start: np.ndarray, lp: int) -> np.ndarray:
        cur = start[:, :, None]  # (n, nv, 1)
        guards = [self._cube_letters(c)[None, :, None] for _, c, _ in b.transitions]
        m = self.m
        for _ in range(lp):
            n, nv, width = cur.shape
            new = np.zeros((n, nv, m, width), bool)
            for (s, _, d), g in zip(b.transitions, guards):
                new[s] |= g & cur[d][:, None, :]
            cur = new.reshape(n, nv, m * width)
        return np.ascontiguousarray(cur[b.initial])


def _postorder(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    seen: set = set()
    stack = [(f, False)]
    while stack:
        g, expanded = stack.pop()
        if expanded:
            if g not in seen:
                seen.add(g)
                out.append(g)
            continue
        stack.append((g, True))
        stack.extend((c, False) for c in reversed(g.children()))
    return out


def _temporal_step(g: Formula, val: dict):
    """(step(j, next_value), initial value) for the fixpoint defining ``g``.

    ``j`` indexes loop positions; ``None`` means the arrays are already the
    ones for the current prefix position.
    """
    pick = (lambda arr, j: arr if j is None else arr[j])
    if isinstance(g, (Globally, Finally)):
        a = val[g.child]
        if isinstance(g, Finally):
            return (lambda j, nx: pick(a, j) | nx), False
        return (lambda j, nx: pick(a, j) & nx), True
    a, b = val[g.left], val[g.right]
    if isinstance(g, Until):
        return (lambda j, nx: pick(b, j) | (pick(a, j) & nx)), False
    if isinstance(g, StrongRelease):
        return (lambda j, nx: pick(b, j) & (pick(a, j) | nx)), False
    if isinstance(g, Release):
        return (lambda j, nx: pick(b, j) & (pick(a, j) | nx)), True
    if isinstance(g, WeakUntil):
        return (lambda j, nx: pick(b, j) | (pick(a, j) & nx)), True
    raise TypeError(f"unsupported formula node {g!r}")

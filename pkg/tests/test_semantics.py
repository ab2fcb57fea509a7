import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlcheck.formula import parse_ltl
from ltlcheck.generate import GenConfig, random_ltl
from ltlcheck.semantics import Lasso, UndeclaredAtomError, all_lassos, eval_on_lasso


def lasso(prefix, loop, atoms="ab"):
    return Lasso(tuple(frozenset(x) for x in prefix), tuple(frozenset(x) for x in loop), frozenset(atoms))


def test_until_hand_unrolled():
    w = Lasso.from_dicts([{"a": True, "b": False}], [{"a": False, "b": True}])
    assert eval_on_lasso(parse_ltl("a U b"), w)


def test_globally_on_constant_word():
    assert eval_on_lasso(parse_ltl("G a"), lasso([], ["a"], "a"))


def test_next_reads_second_letter():
    assert not eval_on_lasso(parse_ltl("X a"), lasso(["a"], [""], "a"))


def test_undeclared_atom():
    with pytest.raises(UndeclaredAtomError):
        eval_on_lasso(parse_ltl("c"), lasso([], ["a"]))


def test_empty_loop_rejected():
    with pytest.raises(ValueError):
        Lasso((), ())


def test_string_form():
    assert str(lasso(["a"], ["b"])) == "{a,!b} ({!a,b})^w"


def test_all_lassos_count():
    # 2 atoms: sum over prefix 0..1 and loop 1..2 of 4^(p+l)
    assert sum(1 for _ in all_lassos("ab", 1, 2)) == 4 + 16 + 16 + 64


@pytest.mark.parametrize(
    "text,expected",
    [
        ("F b", True),
        ("G F a", True),
        ("F G a", False),
        ("a W c", False),
        ("b R a", False),
        ("a M b", False),
        ("X X b", True),
        ("X X X b", False),
    ],
)
def test_hand_checked_values(text, expected):
    # word: {a} {a} ({b} {a})^w
    w = lasso(["a", "a"], ["b", "a"], "abc")
    assert eval_on_lasso(parse_ltl(text), w) is expected


def _naive(f, w, i, depth):
    """Unrolled reference: bounded look-ahead is exact once it covers two loop passes."""
    from ltlcheck import formula as F

    n = len(w)
    horizon = 2 * n + 2

    def at(g, k):
        k = k if k < n else len(w.prefix) + (k - len(w.prefix)) % len(w.loop)
        return go(g, k)

    def go(g, k):
        if isinstance(g, F.Atom):
            return g.name in w.letter(k)
        if g == F.TRUE:
            return True
        if g == F.FALSE:
            return False
        if isinstance(g, F.Not):
            return not go(g.child, k)
        if isinstance(g, F.And):
            return go(g.left, k) and go(g.right, k)
        if isinstance(g, F.Or):
            return go(g.left, k) or go(g.right, k)
        if isinstance(g, F.Next):
            return at(g.child, k + 1)
        steps = [k + j for j in range(horizon)]
        if isinstance(g, F.Finally):
            return any(at(g.child, s) for s in steps)
        if isinstance(g, F.Globally):
            return all(at(g.child, s) for s in steps)
        if isinstance(g, (F.Until, F.StrongRelease)):
            goal, keep = (g.right, g.left) if isinstance(g, F.Until) else (None, None)
            if isinstance(g, F.Until):
                for s in steps:
                    if at(goal, s):
                        return True
                    if not at(keep, s):
                        return False
                return False
            for s in steps:  # a M b: b U (a & b)
                if not at(g.right, s):
                    return False
                if at(g.left, s):
                    return True
            return False
        if isinstance(g, F.Release):
            for s in steps:
                if not at(g.right, s):
                    return False
                if at(g.left, s):
                    return True
            return True
        if isinstance(g, F.WeakUntil):
            for s in steps:
                if at(g.right, s):
                    return True
                if not at(g.left, s):
                    return False
            return True
        raise TypeError(g)

    return go(f, i)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_fixpoint_evaluation_matches_unrolling(size, k, seed):
    f = random_ltl(GenConfig(size, k, seed))
    for w in all_lassos("abc"[:k], 2, 2):
        assert eval_on_lasso(f, w) == _naive(f, w, 0, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_loop_rotation_invariance(size, seed):
    f = random_ltl(GenConfig(size, 2, seed))
    for w in all_lassos("ab", 2, 3):
        first = w.loop[0]
        unrolled = Lasso(w.prefix + (first,), w.loop[1:] + (first,), w.atoms)
        assert eval_on_lasso(f, w) == eval_on_lasso(f, unrolled)

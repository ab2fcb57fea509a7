import pytest

from ltlcheck.automaton import (
    TRUE_CUBE,
    AutomatonFormatError,
    BuchiAutomaton,
    Cube,
    read_automaton,
    trim,
    universal_automaton,
    write_automaton,
)

FIG1A_TEXT = """states 2
initial 0
accepting 1
0 -> 0 : a
0 -> 1 : b
1 -> 1 : 1
"""


def test_cube_basics():
    c = Cube.of("a", "!b")
    assert c.text() == "a & !b"
    assert c.satisfied_by(frozenset({"a"}))
    assert not c.satisfied_by(frozenset({"a", "b"}))
    assert not c.compatible(Cube.of("b"))
    assert c.union(Cube.of("c")) == Cube.of("a", "!b", "c")
    assert Cube.of("a", "!b").implies(Cube.of("a"))
    assert TRUE_CUBE.text() == "1" and TRUE_CUBE.is_true()


def test_contradictory_cube():
    with pytest.raises(ValueError):
        Cube.of("a", "!a")
    with pytest.raises(AutomatonFormatError):
        read_automaton("states 1\ninitial 0\naccepting\n0 -> 0 : a & !a\n")


def test_round_trip_is_bit_exact(fig1a):
    assert write_automaton(fig1a) == FIG1A_TEXT
    assert write_automaton(read_automaton(FIG1A_TEXT)) == FIG1A_TEXT
    assert read_automaton(FIG1A_TEXT) == fig1a


def test_minimal_file_is_universal():
    b = read_automaton("states 1\ninitial 0\naccepting 0\n0 -> 0 : 1\n")
    assert b == universal_automaton()


def test_comments_and_sorting():
    b = read_automaton("# demo\nstates 2\ninitial 0\naccepting 1 # acc\n1 -> 1 : 1\n0 -> 1 : b\n0 -> 0 : a\n")
    assert write_automaton(b) == FIG1A_TEXT


@pytest.mark.parametrize(
    "text",
    [
        "",
        "states x\ninitial 0\naccepting\n",
        "states 1\ninitial 1\naccepting\n",
        "states 1\ninitial 0\naccepting 3\n",
        "states 1\ninitial 0\naccepting\n0 -> 4 : a\n",
        "states 1\ninitial 0\naccepting\n0 => 0 : a\n",
        "states 1\ninitial 0\naccepting\n0 -> 0 : A\n",
    ],
)
def test_malformed_files(text):
    with pytest.raises(AutomatonFormatError):
        read_automaton(text)


def test_invariants_enforced():
    with pytest.raises(ValueError):
        BuchiAutomaton(1, 2, frozenset(), ())
    with pytest.raises(ValueError):
        BuchiAutomaton(1, 0, frozenset({5}), ())


def test_atom_universe(fig1a):
    assert fig1a.atom_universe == frozenset("ab")


def test_trim_drops_dead_states():
    text = "states 3\ninitial 0\naccepting 1\n0 -> 1 : a\n1 -> 1 : 1\n0 -> 2 : b\n2 -> 2 : b\n"
    b = trim(read_automaton(text))
    assert b.state_count == 2
    assert len(b.transitions) == 2


def test_trim_empty_language():
    b = trim(read_automaton("states 2\ninitial 0\naccepting\n0 -> 1 : a\n1 -> 1 : 1\n"))
    assert b.state_count == 1 and not b.transitions


def test_digest_is_stable(fig1a):
    assert fig1a.digest() == read_automaton(FIG1A_TEXT).digest()
    assert len(fig1a.digest()) == 16

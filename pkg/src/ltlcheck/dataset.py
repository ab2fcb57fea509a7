"""Oracle-labelled corpora: classification sets, ranking groups, perturbation sets."""

from __future__ import annotations

import logging
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .automaton import BuchiAutomaton
from .features import EncodingDictionary, make_dictionary
from .formula import Formula, print_ltl, to_core, to_nnf
from .generate import GenConfig, random_ltl
from .graph import dropped_transitions, perturb_edges, without_transitions
from .oracle import (
    DEFAULT_STATE_CAP,
    ResourceLimit,
    _bfs_path,
    _concretize,
    accepting_cycle_nodes,
    accepts_lasso,
    check,
)
from .sample import Sample, make_sample
from .semantics import Lasso
from .translate import translate

log = logging.getLogger(__name__)

RANKING_NEGATIVES = 50


class GenerationBudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Profile:
    name: str
    tree_sizes: tuple[int, int]
    atom_counts: tuple[int, int]
    max_length: int


PROFILES = {
    "short_like": Profile("short_like", (4, 16), (2, 4), 80),
    "diverse_like": Profile("diverse_like", (4, 44), (2, 5), 144),
}


@dataclass
class EncodeOptions:
    scheme: str = "gaussian"
    directed: bool = False
    dictionary: EncodingDictionary = field(default_factory=make_dictionary)
    state_cap: int = DEFAULT_STATE_CAP
    timeout_s: float | None = 120.0


def formula_length(f: Formula) -> int:
    return sum(1 for ch in print_ltl(f) if not ch.isspace())


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def workers() -> int:
    try:
        return max(1, int(os.environ.get("OCTAL_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_map(fn: Callable, items: Sequence) -> list:
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


# ---------------------------------------------------------------------------
# formula / automaton drawing
# ---------------------------------------------------------------------------

def _draw_formula(profile: Profile, rng: random.Random, atom_count: int | None = None) -> Formula:
    while True:
        size = rng.randint(*profile.tree_sizes)
        k = atom_count or rng.randint(*profile.atom_counts)
        f = random_ltl(GenConfig(size, k, rng.getrandbits(32)))
        if formula_length(f) <= profile.max_length:
            return f


def _model_of(f: Formula, opts: EncodeOptions) -> BuchiAutomaton | None:
    """translate(f) when it has a nonempty language and the positive check terminates."""
    try:
        b = translate(to_core(to_nnf(f)), state_cap=opts.state_cap)
        if not b.transitions:
            return None
        if not check(b, f, opts.state_cap, opts.timeout_s).holds:
            raise AssertionError(f"translation of {f} does not satisfy it")
    except ResourceLimit:
        return None
    return b


def _verified_negative(b: BuchiAutomaton, f: Formula, opts: EncodeOptions) -> bool:
    try:
        return not check(b, f, opts.state_cap, opts.timeout_s).holds
    except ResourceLimit:
        return False


# ---------------------------------------------------------------------------
# classification corpus
# ---------------------------------------------------------------------------

@dataclass
class _PairJob:
    profile: Profile
    seed: int
    index: int
    opts: EncodeOptions
    attempts: int = 20


def _make_pair(job: _PairJob) -> list[Sample] | None:
    rng = random.Random(derive_seed(job.seed, job.index))
    for _ in range(job.attempts):
        k = rng.randint(*job.profile.atom_counts)
        f = _draw_formula(job.profile, rng, k)
        b = _model_of(f, job.opts)
        if b is None:
            continue
        for _ in range(job.attempts):
            g = _draw_formula(job.profile, rng, k)
            if _verified_negative(b, g, job.opts):
                meta = {"seed": job.seed, "pair": job.index, "profile": job.profile.name}
                o = job.opts
                return [
                    make_sample(b, f, 1, meta, o.scheme, o.directed, o.dictionary),
                    make_sample(b, g, 0, meta, o.scheme, o.directed, o.dictionary),
                ]
    return None


def generate_corpus(
    profile: str, count: int, seed: int, opts: EncodeOptions | None = None
) -> list[Sample]:
    """``count/2`` positive pairs (B = translate(phi), phi) and as many oracle-verified
    negatives (B, phi') with phi' drawn independently for the same B."""
    if count % 2:
        raise ValueError("count must be even so the classes balance")
    prof = PROFILES[profile]
    opts = opts or EncodeOptions()
    out: list[Sample] = []
    index = 0
    budget = max(10, 4 * count)
    while len(out) < count:
        needed = (count - len(out)) // 2
        jobs = [_PairJob(prof, seed, i, opts) for i in range(index, index + needed)]
        index += needed
        if index > budget:
            raise GenerationBudgetExhausted(f"only {len(out)} of {count} samples after {index} pairs")
        for pair in _ordered_map(_make_pair, jobs):
            if pair is not None:
                out.extend(pair)
    return out


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

def split(
    ds: Sequence[Sample], ratio: float = 0.8, seed: int = 0, group_key: str | None = None
) -> tuple[list[Sample], list[Sample]]:
    """Shuffled split that keeps both classes balanced.

    With ``group_key`` the samples sharing that meta value stay on the same
    side (used for perturbation pairs).
    """
    rng = np.random.default_rng(seed)
    if group_key is not None:
        groups: dict = {}
        for s in ds:
            groups.setdefault(s.meta[group_key], []).append(s)
        keys = sorted(groups)
        order = rng.permutation(len(keys))
        cut = int(round(ratio * len(keys)))
        train = [s for i in order[:cut] for s in groups[keys[i]]]
        val = [s for i in order[cut:] for s in groups[keys[i]]]
        return train, val
    train, val = [], []
    for label in (1, 0):
        members = [s for s in ds if s.label == label]
        order = rng.permutation(len(members))
        cut = int(round(ratio * len(members)))
        train += [members[i] for i in order[:cut]]
        val += [members[i] for i in order[cut:]]
    train = [train[i] for i in rng.permutation(len(train))]
    val = [val[i] for i in rng.permutation(len(val))]
    return train, val


# ---------------------------------------------------------------------------
# one-vs-many ranking groups
# ---------------------------------------------------------------------------

@dataclass
class RankingGroup:
    automaton: BuchiAutomaton
    positive: Formula
    negatives: list[Formula]
    samples: list[Sample]  # candidates in shuffled order
    positive_index: int

    def __post_init__(self) -> None:
        labels = [s.label for s in self.samples]
        if (
            labels.count(1) != 1
            or labels[self.positive_index] != 1
            or len(labels) != 1 + len(self.negatives)
        ):
            raise ValueError("a ranking group has exactly one positive at positive_index")


@dataclass
class _GroupJob:
    profile: Profile
    seed: int
    index: int
    opts: EncodeOptions
    negatives: int = RANKING_NEGATIVES


def _make_group(job: _GroupJob) -> RankingGroup | None:
    rng = random.Random(derive_seed(job.seed, job.index, 51))
    for _ in range(20):
        k = rng.randint(*job.profile.atom_counts)
        f = _draw_formula(job.profile, rng, k)
        b = _model_of(f, job.opts)
        if b is None:
            continue
        negatives: list[Formula] = []
        seen = {str(f)}
        for _ in range(40 * job.negatives):
            g = _draw_formula(job.profile, rng, k)
            if str(g) in seen:
                continue
            if _verified_negative(b, g, job.opts):
                negatives.append(g)
                seen.add(str(g))
                if len(negatives) == job.negatives:
                    break
        if len(negatives) < job.negatives:
            continue
        o = job.opts
        meta = {"seed": job.seed, "group": job.index, "profile": job.profile.name}
        samples = [make_sample(b, f, 1, meta, o.scheme, o.directed, o.dictionary)]
        samples += [make_sample(b, g, 0, meta, o.scheme, o.directed, o.dictionary) for g in negatives]
        # shuffle so that tie-breaking by candidate index carries no label information
        order = list(range(len(samples)))
        rng.shuffle(order)
        samples = [samples[i] for i in order]
        return RankingGroup(b, f, negatives, samples, order.index(0))
    return None


def build_ranking_groups(
    count: int,
    seed: int,
    profile: str = "short_like",
    opts: EncodeOptions | None = None,
    negatives: int = RANKING_NEGATIVES,
) -> list[RankingGroup]:
    prof = PROFILES[profile]
    opts = opts or EncodeOptions()
    out: list[RankingGroup] = []
    index = 0
    while len(out) < count:
        needed = count - len(out)
        if index + needed > 4 * count + 10:
            raise GenerationBudgetExhausted(f"only {len(out)} of {count} ranking groups")
        jobs = [_GroupJob(prof, seed, i, opts, negatives) for i in range(index, index + needed)]
        index += needed
        out.extend(g for g in _ordered_map(_make_group, jobs) if g is not None)
    return out


# ---------------------------------------------------------------------------
# structural perturbation
# ---------------------------------------------------------------------------

def lost_word(original: BuchiAutomaton, reduced: BuchiAutomaton, dropped) -> Lasso | None:
    """A word accepted by ``original`` but not by ``reduced``, searched through the
    accepting runs that use one of the ``dropped`` transitions."""
    succ_lists = original.successors()

    def edges(q):
        return sorted(((c, d) for c, d in succ_lists[q]), key=lambda cd: (cd[1], cd[0].text()))

    def succ(q):
        return (d for _, d in succ_lists[q])

    live = accepting_cycle_nodes(original.state_count, original.initial, succ, original.accepting)
    for src, cube, dst in sorted(dropped, key=lambda t: (t[0], t[2], t[1].text())):
        if src not in live or dst not in live:
            continue
        stem = [] if src == original.initial else _bfs_path(original.initial, lambda q: q == src, edges)
        if stem is None:
            continue
        # from dst, reach an accepting state that lies on a cycle, then close the cycle
        for target in sorted(original.accepting & live):
            cycle = _bfs_path(target, lambda q: q == target, edges)
            if cycle is None:
                continue
            if dst == target:
                mid = []
            else:
                mid = _bfs_path(dst, lambda q: q == target, edges)
                if mid is None:
                    continue
            prefix = [c for c, _ in stem] + [cube] + [c for c, _ in mid]
            w = Lasso(
                tuple(_concretize(c) for c in prefix),
                tuple(_concretize(c) for c, _ in cycle),
                original.atom_universe,
            )
            if accepts_lasso(original, w) and not accepts_lasso(reduced, w):
                return w
    return None


@dataclass
class _PerturbJob:
    sample: Sample
    p: float
    seed: int
    index: int
    attempts: int = 8


def _perturb_one(job: _PerturbJob):
    s = job.sample
    b = s.automaton
    for attempt in range(job.attempts):
        pseed = derive_seed(job.seed, job.index, attempt)
        g = perturb_edges(s.graph, job.p, pseed)
        ids = dropped_transitions(s.graph, g)
        reduced = without_transitions(s.graph, ids)
        dropped = {
            (n.payload["src"], n.payload["cube"], n.payload["dst"]) for n in s.graph.nodes if n.id in ids
        }
        dropped = [t for t in b.transitions if (t[0], t[1].text(), t[2]) in dropped]
        w = lost_word(b, reduced, dropped)
        if w is not None:
            meta = dict(s.meta, pair=job.index, perturbed=job.p, perturb_seed=pseed, witness=str(w))
            return Sample(g, s.features.copy(), 0, meta)
    return None


def build_perturbation_set(
    ds: Sequence[Sample], p: float, seed: int
) -> list[Sample]:
    """Each positive yields itself (label 1) and an edge-dropped copy (label 0).

    The copy's automaton, rebuilt without the transitions that lost an
    incidence edge, is confirmed to have lost an accepted word; positives for
    which no such perturbation is found within a few reseeds are skipped.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if any(s.label != 1 for s in ds):
        raise ValueError("perturbation sets are built from positive samples only")
    jobs = [_PerturbJob(s, p, seed, i) for i, s in enumerate(ds)]
    out: list[Sample] = []
    for job, perturbed in zip(jobs, _ordered_map(_perturb_one, jobs)):
        if perturbed is None:
            log.info("no verified perturbation for positive %d; skipped", job.index)
            continue
        original = Sample(job.sample.graph, job.sample.features, 1, dict(job.sample.meta, pair=job.index))
        out += [original, perturbed]
    return out


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def corpus_stats(ds: Sequence[Sample], bins: int = 10) -> dict:
    """Ranges and histograms of formula length, state and transition counts."""
    from .graph import NodeKind

    cols = {
        "formula_length": [formula_length(s.formula) for s in ds],
        "states": [s.graph.count(NodeKind.STATE) for s in ds],
        "transitions": [s.graph.count(NodeKind.TRANSITION) for s in ds],
    }
    report: dict = {
        "samples": len(ds),
        "positives": sum(s.label == 1 for s in ds),
        "negatives": sum(s.label == 0 for s in ds),
    }
    for name, values in cols.items():
        if values:
            counts, edges = np.histogram(values, bins=bins)
            report[name] = {
                "min": int(min(values)),
                "max": int(max(values)),
                "mean": float(np.mean(values)),
                "histogram": {"counts": counts.tolist(), "edges": edges.tolist()},
                "values": values,
            }
        else:
            report[name] = {"min": 0, "max": 0, "mean": 0.0, "histogram": {"counts": [], "edges": []}, "values": []}
    return report

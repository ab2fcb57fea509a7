"""Command-line entry point.

Exit codes: 0 success or "holds", 1 "fails", 2 unknown / resource limit,
3 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .automaton import AutomatonFormatError, read_automaton
from .dataset import (
    PROFILES,
    EncodeOptions,
    build_perturbation_set,
    build_ranking_groups,
    corpus_stats,
    generate_corpus,
    split,
)
from .features import EncodingDictionary, encode_features, make_dictionary
from .formula import LtlSyntaxError, parse_ltl, to_nnf
from .graph import union_graph
from .oracle import DEFAULT_STATE_CAP, ResourceLimit, check
from .sample import SchemaError, make_sample, read_samples, write_sample, write_samples

EXIT_OK, EXIT_FAILS, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

def _versions() -> dict:
    import matplotlib
    import scipy

    return {
        "ltlcheck": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
    }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, config: dict, outputs: list[Path], extra: dict | None = None) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "versions": _versions(),
        "outputs": {p.name: _sha256(p) for p in outputs if p.suffix != ".png"},
    }
    manifest.update(extra or {})
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def _out_dir(args) -> Path:
    if not args.out:
        raise UsageError("--out is required")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _load_samples(path) -> list:
    p = Path(path)
    if p.is_dir():
        p = p / "samples.jsonl"
    if not p.exists():
        raise UsageError(f"no dataset at {path}")
    return read_samples(p)


def _dictionary_for(path) -> EncodingDictionary | None:
    p = Path(path)
    manifest = (p if p.is_dir() else p.parent) / "manifest.json"
    if manifest.exists():
        d = json.loads(manifest.read_text(encoding="utf-8")).get("dictionary")
        if d:
            return EncodingDictionary.from_dict(d)
    return None


def _encode_options(args) -> EncodeOptions:
    return EncodeOptions(
        scheme=args.scheme,
        directed=args.directed,
        dictionary=make_dictionary(args.dict_seed),
        state_cap=args.state_cap,
        timeout_s=args.timeout_s,
    )


def _stats_rows(stats: dict) -> list[dict]:
    rows = []
    for name in ("formula_length", "states", "transitions"):
        s = stats[name]
        rows.append({"quantity": name, "min": s["min"], "max": s["max"], "mean": f"{s['mean']:.6g}"})
    return rows


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    try:
        b = read_automaton(Path(args.automaton).read_text(encoding="utf-8"))
        f = parse_ltl(args.formula)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        v = check(b, f, state_cap=args.state_cap, timeout_s=args.timeout_s)
    except ResourceLimit as exc:
        print(f"verdict: unknown ({exc})")
        return EXIT_UNKNOWN
    print(f"verdict: {'holds' if v.holds else 'fails'}")
    if v.counterexample is not None:
        print(f"counterexample: {v.counterexample}")
    print(f"explored_states: {v.explored_states}")
    print(f"elapsed_s: {v.elapsed:.6f}")
    return EXIT_OK if v.holds else EXIT_FAILS


def cmd_gen(args) -> int:
    out = _out_dir(args)
    opts = _encode_options(args)
    ds = generate_corpus(args.profile, args.count, args.seed, opts)
    data = out / "samples.jsonl"
    write_samples(data, ds)
    stats = corpus_stats(ds)
    _write_csv(out / "stats.csv", _stats_rows(stats))
    from .plotting import corpus_histograms

    corpus_histograms(stats, out / "stats.png")
    _write_manifest(out, "gen", _config(args), [data, out / "stats.csv"],
                    {"dictionary": opts.dictionary.to_dict(), "counts": {"samples": len(ds)}})
    print(f"wrote {len(ds)} samples to {data}")
    return EXIT_OK


def cmd_encode(args) -> int:
    try:
        b = read_automaton(Path(args.automaton).read_text(encoding="utf-8"))
        f = parse_ltl(args.formula)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        v = check(b, f, state_cap=args.state_cap, timeout_s=args.timeout_s)
    except ResourceLimit as exc:
        print(f"label unknown ({exc}); sample not written")
        return EXIT_UNKNOWN
    opts = _encode_options(args)
    s = make_sample(b, f, int(v.holds), {"dict_seed": args.dict_seed}, opts.scheme, opts.directed, opts.dictionary)
    line = write_sample(s)
    if args.out:
        Path(args.out).write_text(line + "\n", encoding="utf-8")
    else:
        print(line)
    return EXIT_OK


def _hyperparams(args, **over):
    from .nn.train import Hyperparams

    return Hyperparams(
        learning_rate=args.lr,
        dropout=args.dropout,
        patience=args.patience,
        max_epochs=args.max_epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        combine=args.combine,
        **over,
    )


def cmd_train(args) -> int:
    from .nn.checkpoint import save_checkpoint, write_history
    from .nn.metrics import evaluate_classification
    from .nn.train import train
    from .plotting import training_curves

    out = _out_dir(args)
    ds = _load_samples(args.data)
    group = "pair" if all("pair" in s.meta for s in ds) else None
    tr, va = split(ds, args.split, args.seed, group_key=group)
    hp = _hyperparams(args)
    result = train(args.variant, tr, va, hp, log=(lambda r: print(json.dumps(r))) if args.verbose else None)
    ckpt = out / "checkpoint.json"
    save_checkpoint(ckpt, result.model, hp.to_dict(), _dictionary_for(args.data),
                    {"best_epoch": result.best_epoch, "data": str(args.data)})
    write_history(out / "history.jsonl", result.history)
    _write_csv(out / "history.csv", result.history)
    training_curves(result.history, out / "history.png")
    m = evaluate_classification(result.model, va)
    _write_csv(out / "metrics.csv", [m.to_dict()])
    _write_manifest(out, "train", _config(args), [ckpt, out / "history.jsonl", out / "metrics.csv"])
    print(json.dumps({"variant": result.model.arch.variant, "best_epoch": result.best_epoch,
                      "stopped_by": result.stopped_by, **m.to_dict()}))
    return EXIT_OK


def _load_model(path):
    from .nn.checkpoint import load_checkpoint

    if not Path(path).exists():
        raise UsageError(f"no checkpoint at {path}")
    return load_checkpoint(path)


def cmd_eval(args) -> int:
    from .nn.metrics import evaluate_classification

    model, _ = _load_model(args.checkpoint)
    ds = _load_samples(args.data)
    if args.split < 1.0:
        group = "pair" if all("pair" in s.meta for s in ds) else None
        _, ds = split(ds, args.split, args.seed, group_key=group)
    m = evaluate_classification(model, ds)
    if args.out:
        out = _out_dir(args)
        _write_csv(out / "metrics.csv", [m.to_dict()])
        _write_manifest(out, "eval", _config(args), [out / "metrics.csv"])
    print(json.dumps(m.to_dict()))
    return EXIT_OK


def cmd_rank(args) -> int:
    from .nn.metrics import ranking_from_ranks, rank_of_positive
    from .nn.train import as_graphs
    from .plotting import rank_histogram

    model, meta = _load_model(args.checkpoint)
    opts = _encode_options(args)
    if meta["dictionary"] is not None:
        opts.dictionary = meta["dictionary"]
    groups = build_ranking_groups(args.count, args.seed, args.profile, opts, args.negatives)
    rows, ranks = [], []
    for i, g in enumerate(groups):
        scores = model.predict_proba(as_graphs(g.samples, model.dtype))
        r = rank_of_positive(scores, g.positive_index)
        ranks.append(r)
        rows.append({"group": i, "positive": str(g.positive), "rank": r,
                     "positive_score": f"{scores[g.positive_index]:.6g}"})
    m = ranking_from_ranks(ranks, (1, 3, 10))
    if args.out:
        out = _out_dir(args)
        _write_csv(out / "ranks.csv", rows)
        _write_csv(out / "ranking.csv", [m.to_dict()])
        rank_histogram(ranks, out / "ranks.png")
        _write_manifest(out, "rank", _config(args), [out / "ranks.csv", out / "ranking.csv"])
    print(json.dumps(m.to_dict()))
    return EXIT_OK


def cmd_perturb(args) -> int:
    out = _out_dir(args)
    ds = [s for s in _load_samples(args.data) if s.label == 1]
    pert = build_perturbation_set(ds, args.p, args.seed)
    data = out / "samples.jsonl"
    write_samples(data, pert)
    d = _dictionary_for(args.data)
    _write_manifest(out, "perturb", _config(args), [data],
                    {"dictionary": d.to_dict() if d else None,
                     "counts": {"positives_in": len(ds), "samples": len(pert)}})
    print(f"wrote {len(pert)} samples ({len(pert) // 2} pairs) to {data}")
    return EXIT_OK


def bench(samples, model, state_cap: int = DEFAULT_STATE_CAP, timeout_s: float | None = 120.0,
          dictionary: EncodingDictionary | None = None) -> tuple[dict, list[dict]]:
    """Per-sample oracle, preprocessing and inference timings plus totals."""
    from .nn.models import GraphData

    rows = []
    for i, s in enumerate(samples):
        b, f = s.automaton, s.formula
        t0 = time.perf_counter()
        try:
            verdict = "holds" if check(b, f, state_cap, timeout_s).holds else "fails"
        except ResourceLimit:
            verdict = "unknown"
        t1 = time.perf_counter()
        scheme = "gaussian" if dictionary is not None else "one_hot"
        g = union_graph(b, to_nnf(f))
        encode_features(g, scheme, s.features.shape[1] == 66, dictionary)
        t2 = time.perf_counter()
        data = GraphData.from_sample(s, model.dtype)
        t3 = time.perf_counter()
        prob = float(model.predict_proba([data])[0])
        t4 = time.perf_counter()
        rows.append({
            "sample": i,
            "states": b.state_count,
            "transitions": len(b.transitions),
            "verdict": verdict,
            "prediction": int(prob >= 0.5),
            "oracle_s": t1 - t0,
            "overhead_s": (t2 - t1) + (t3 - t2),
            "nn_s": t4 - t3,
        })
    total = {k: float(sum(r[k] for r in rows)) for k in ("oracle_s", "nn_s", "overhead_s")}
    total["samples"] = len(rows)
    total["speedup_inference"] = total["oracle_s"] / total["nn_s"] if total["nn_s"] > 0 else 0.0
    both = total["nn_s"] + total["overhead_s"]
    total["speedup_with_overhead"] = total["oracle_s"] / both if both > 0 else 0.0
    return total, rows


def cmd_bench(args) -> int:
    from .plotting import timing_bars

    model, meta = _load_model(args.checkpoint)
    ds = _load_samples(args.data)
    if args.count:
        ds = sorted(ds, key=lambda s: -len(s.graph.nodes))[: args.count]
    total, rows = bench(ds, model, args.state_cap, args.timeout_s, meta["dictionary"])
    if args.out:
        out = _out_dir(args)
        _write_csv(out / "timings.csv", [{k: (f"{v:.9f}" if isinstance(v, float) else v) for k, v in r.items()}
                                         for r in rows])
        _write_csv(out / "bench.csv", [total])
        if rows:
            timing_bars(total, out / "bench.png")
        _write_manifest(out, "bench", _config(args), [])
    print(json.dumps(total))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ltlcheck", description="LTL model checking with an exact oracle and graph classifiers.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def limits(sp):
        sp.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
        sp.add_argument("--timeout-s", type=float, default=120.0)

    def encoding(sp):
        sp.add_argument("--scheme", choices=("gaussian", "one_hot"), default="gaussian")
        sp.add_argument("--directed", action="store_true")
        sp.add_argument("--dict-seed", type=int, default=0, help="seed of the gaussian encoding dictionary")

    c = sub.add_parser("check", help="decide whether an automaton satisfies a formula")
    c.add_argument("automaton")
    c.add_argument("formula")
    limits(c)
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="generate a labelled corpus")
    g.add_argument("--profile", choices=sorted(PROFILES), default="short_like")
    g.add_argument("--count", type=int, default=4000)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    encoding(g)
    limits(g)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("encode", help="encode one automaton/formula pair as a sample record")
    e.add_argument("automaton")
    e.add_argument("formula")
    e.add_argument("--out")
    encoding(e)
    limits(e)
    e.set_defaults(func=cmd_encode)

    t = sub.add_parser("train", help="train a classifier on a corpus")
    t.add_argument("--data", required=True)
    t.add_argument("--variant", choices=("gin", "gcn", "mlp", "linkpred"), default="gin")
    t.add_argument("--split", type=float, default=0.8)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--lr", type=float, default=1e-5)
    t.add_argument("--dropout", type=float, default=0.1)
    t.add_argument("--patience", type=int, default=5)
    t.add_argument("--max-epochs", type=int, default=200)
    t.add_argument("--batch-size", type=int, default=8)
    t.add_argument("--combine", choices=("concat", "multiply"), default="concat")
    t.add_argument("--verbose", action="store_true")
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("eval", help="classification metrics of a checkpoint")
    v.add_argument("--checkpoint", required=True)
    v.add_argument("--data", required=True)
    v.add_argument("--split", type=float, default=1.0, help="evaluate the validation side of this split")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_eval)

    r = sub.add_parser("rank", help="one-vs-many ranking evaluation")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--count", type=int, default=100)
    r.add_argument("--negatives", type=int, default=50)
    r.add_argument("--profile", choices=sorted(PROFILES), default="short_like")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out")
    encoding(r)
    limits(r)
    r.set_defaults(func=cmd_rank)

    q = sub.add_parser("perturb", help="build an edge-perturbation set from the positives of a corpus")
    q.add_argument("--data", required=True)
    q.add_argument("--p", type=float, default=0.3)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_perturb)

    b = sub.add_parser("bench", help="time the oracle against network inference")
    b.add_argument("--data", required=True)
    b.add_argument("--checkpoint", required=True)
    b.add_argument("--count", type=int, default=0, help="keep only the N largest graphs")
    b.add_argument("--out")
    limits(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return int(exc.code or 0)
    if getattr(args, "p", 1.0) <= 0 or not 0 < getattr(args, "split", 0.5) <= 1:
        print("error: --p must be positive and --split must lie in (0, 1]", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, LtlSyntaxError, AutomatonFormatError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Static figures written next to the CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def corpus_histograms(stats: dict, path) -> None:
    names = ("formula_length", "states", "transitions")
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, name in zip(axes, names):
        values = stats[name]["values"]
        if values:
            ax.hist(values, bins=20, color="#4c72b0")
        ax.set_title(name.replace("_", " "))
        ax.set_ylabel("samples")
    _save(fig, path)


def training_curves(history: list[dict], path) -> None:
    epochs = [h["epoch"] for h in history]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(epochs, [h["train_loss"] for h in history], label="train loss", color="#4c72b0")
    ax.set_xlabel("epoch")
    ax.set_ylabel("binary cross-entropy")
    ax2 = ax.twinx()
    ax2.plot(epochs, [h["val_accuracy"] for h in history], label="val accuracy", color="#dd8452")
    ax2.set_ylabel("validation accuracy")
    ax2.set_ylim(0, 1)
    fig.legend(loc="lower left")
    _save(fig, path)


def timing_bars(report: dict, path) -> None:
    labels = ["oracle", "nn inference", "preprocessing"]
    values = [report["oracle_s"], report["nn_s"], report["overhead_s"]]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(labels, values, color=["#c44e52", "#55a868", "#8172b2"])
    ax.set_ylabel("seconds (total)")
    ax.set_yscale("log" if min(values) > 0 else "linear")
    _save(fig, path)


def rank_histogram(ranks: list[int], path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if ranks:
        ax.hist(ranks, bins=range(1, max(ranks) + 2), color="#4c72b0")
    ax.set_xlabel("rank of the positive candidate")
    ax.set_ylabel("groups")
    _save(fig, path)

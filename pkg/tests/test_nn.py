import numpy as np
import pytest

from ltlcheck.graph import EdgeKind, perturb_edges
from ltlcheck.nn import layers as L
from ltlcheck.nn.checkpoint import load_checkpoint, read_history, save_checkpoint, write_history
from ltlcheck.nn.gradcheck import grad_check
from ltlcheck.nn.metrics import (
    classification_from_scores,
    confusion_metrics,
    evaluate_classification,
    rank_of_positive,
    ranking_from_ranks,
)
from ltlcheck.nn.models import (
    VARIANTS,
    Architecture,
    GraphData,
    Model,
    forward_gcn,
    forward_gin,
    forward_link_predictor,
    forward_mlp_baseline,
)
from ltlcheck.nn.train import Hyperparams, TrainingDiverged, accuracy, train
from ltlcheck.sample import Sample

FORWARD = {
    "gin": forward_gin,
    "gcn": forward_gcn,
    "mlp_baseline": forward_mlp_baseline,
    "link_predictor": forward_link_predictor,
}


def graph(sample):
    return GraphData.from_sample(sample)


@pytest.mark.parametrize("variant", VARIANTS)
def test_output_is_probability(variant, small_corpus):
    m = Model.init(Architecture(variant, 64), seed=1)
    for s in small_corpus[:10]:
        p = FORWARD[variant](m, s)
        assert 0.0 < p < 1.0


@pytest.mark.parametrize("variant", VARIANTS)
def test_zero_model_outputs_half(variant, small_corpus):
    m = Model.init(Architecture(variant, 64), seed=1)
    for k in m.params:
        m.params[k][...] = 0.0
    assert FORWARD[variant](m, small_corpus[0]) == 0.5


@pytest.mark.parametrize("variant", VARIANTS)
def test_permutation_invariance(variant, small_corpus):
    m = Model.init(Architecture(variant, 64), seed=2)
    rng = np.random.default_rng(0)
    for s in small_corpus[:10]:
        g = graph(s)
        perm = rng.permutation(len(g.x))
        assert abs(FORWARD[variant](m, g) - FORWARD[variant](m, g.permuted(perm))) < 1e-9


def test_wrong_variant_and_width(small_corpus):
    m = Model.init(Architecture("gin", 66), seed=0)
    with pytest.raises(ValueError):
        forward_gin(m, small_corpus[0])
    with pytest.raises(ValueError):
        forward_gcn(m, small_corpus[0])


def test_non_finite_input_rejected(small_corpus):
    m = Model.init(Architecture("gin", 64), seed=0)
    g = graph(small_corpus[0])
    g.x[0, 0] = np.inf
    with pytest.raises(FloatingPointError):
        forward_gin(m, g)


def test_gcn_single_node_is_per_node_transform():
    m = Model.init(Architecture("gcn", 64, hidden=8, layers=1), seed=0)
    x = np.random.default_rng(1).normal(size=(1, 64))
    g = GraphData(x, np.zeros((0, 2), np.int64), np.zeros(0, np.int8), np.array([True]), 1)
    from ltlcheck.nn.models import make_batch

    batch = make_batch([g], m.arch)
    assert np.allclose(batch.adj.toarray(), [[1.0]])
    logits, cache = m.forward(batch)
    pre = x @ m.params["gnn0.w"] + m.params["gnn0.b"]
    assert np.allclose(cache["gnn"][0][0]["y"], L.batchnorm_eval(pre, m.params["gnn0.gamma"], m.params["gnn0.beta"],
                                                                 m.state["gnn0.mean"], m.state["gnn0.var"]))


def test_mlp_ignores_perturbation(small_corpus):
    m = Model.init(Architecture("mlp_baseline", 64), seed=3)
    for i, s in enumerate(small_corpus[:10]):
        for p in (0.3, 1.0):
            t = Sample(perturb_edges(s.graph, p, i), s.features, 0, s.meta)
            assert forward_mlp_baseline(m, s) == forward_mlp_baseline(m, t)


def test_link_predictor_ignores_union_edges(small_corpus):
    m = Model.init(Architecture("link_predictor", 64), seed=3)
    for s in small_corpus[:10]:
        g = graph(s)
        keep = g.kinds != 2
        h = GraphData(g.x, g.edges[keep], g.kinds[keep], g.system, g.label)
        assert forward_link_predictor(m, g) == forward_link_predictor(m, h)


def test_link_predictor_needs_partition(small_corpus):
    m = Model.init(Architecture("link_predictor", 64), seed=3)
    g = graph(small_corpus[0])
    g.system[:] = True
    with pytest.raises(ValueError):
        forward_link_predictor(m, g)


@pytest.mark.parametrize("variant", VARIANTS)
def test_gradients_match_finite_differences(variant, small_corpus):
    for i, s in enumerate(small_corpus[:8]):
        r = grad_check(variant, s, seed=i)
        assert r.checked >= 50
        assert r.passed(1e-3), r


@pytest.mark.parametrize("combine", ["concat", "multiply"])
def test_link_predictor_combine_modes(combine, small_corpus):
    m = Model.init(Architecture("link_predictor", 64, hidden=16, combine=combine), seed=0)
    assert grad_check("link_predictor", small_corpus[:3], model=m).passed(1e-3)


def test_zero_weights_give_zero_gradients_below_head(small_corpus):
    m = Model.init(Architecture("gin", 64, hidden=8), seed=0)
    m.params["head.w2"][...] = 0.0
    from ltlcheck.nn.models import make_batch

    batch = make_batch([graph(s) for s in small_corpus[:3]], m.arch)
    logits, cache = m.forward(batch, train=True)
    grads = m.backward(cache, np.ones_like(logits))
    assert all(not g.any() for k, g in grads.items() if not k.startswith("head.") or k == "head.w1")
    assert grads["head.b2"][0] == 3.0


def test_bce_gradient():
    z = np.array([0.3, -1.2, 2.0])
    y = np.array([1.0, 0.0, 1.0])
    loss, grad = L.bce_with_logits(z, y)
    h = 1e-6
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        num = (L.bce_with_logits(z + d, y)[0] - L.bce_with_logits(z - d, y)[0]) / (2 * h)
        assert abs(num - grad[i]) < 1e-8


def test_metrics_arithmetic():
    m = confusion_metrics(tp=3, fp=1, fn=2, tn=4)
    assert (m.precision, m.recall, m.accuracy) == (0.75, 0.6, 0.7)
    ones = classification_from_scores([0.9, 0.1], [1, 0])
    assert ones.accuracy == ones.precision == ones.recall == 1.0
    tie = classification_from_scores([0.5] * 4, [1, 1, 0, 0])
    assert tie.accuracy == 0.5 and tie.tp == 2
    with pytest.raises(ValueError):
        classification_from_scores([], [])


def test_ranking_arithmetic():
    assert ranking_from_ranks([1, 1]).mrr == 1.0
    r4 = ranking_from_ranks([4, 4, 4])
    assert r4.mrr == 0.25 and r4.hits_at_k[3] == 0.0
    r2 = ranking_from_ranks([2])
    assert r2.mrr == 0.5 and r2.hits_at_k[3] == 1.0
    hits = ranking_from_ranks([1, 5, 12, 3]).hits_at_k
    assert hits[1] <= hits[3] <= hits[10]
    # ties keep candidate order
    assert rank_of_positive([0.5, 0.5, 0.5], 2) == 3
    assert rank_of_positive([0.1, 0.9, 0.9], 2) == 2


def test_training_is_deterministic(small_corpus):
    hp = Hyperparams(learning_rate=1e-3, max_epochs=3, batch_size=8, seed=5)
    a = train("gin", small_corpus[:30], small_corpus[30:], hp)
    b = train("gin", small_corpus[:30], small_corpus[30:], hp)
    assert a.history == b.history
    assert all(np.array_equal(a.model.params[k], b.model.params[k]) for k in a.model.params)


def test_overfits_toy_set(small_corpus):
    toy = small_corpus[:20]
    hp = Hyperparams(learning_rate=3e-3, dropout=0.0, max_epochs=150, patience=150, batch_size=20, seed=1)
    result = train("gin", toy, toy, hp)
    assert accuracy(result.model, [graph(s) for s in toy]) == 1.0


def test_early_stopping_and_best_checkpoint(small_corpus):
    hp = Hyperparams(learning_rate=1e-9, max_epochs=50, patience=2, seed=0)
    r = train("mlp", small_corpus[:30], small_corpus[30:], hp)
    assert r.stopped_by == "patience" and len(r.history) < 50
    assert r.best_val_accuracy == max(h["val_accuracy"] for h in r.history)
    assert evaluate_classification(r.model, small_corpus[30:]).accuracy == pytest.approx(r.best_val_accuracy)


def test_divergence_is_reported(small_corpus):
    hp = Hyperparams(learning_rate=1e30, max_epochs=5, batch_size=4, dropout=0.0)
    with pytest.raises(TrainingDiverged):
        train("gcn", small_corpus[:12], small_corpus[12:16], hp)


def test_hyperparam_validation():
    with pytest.raises(ValueError):
        Hyperparams(dropout=1.0)
    with pytest.raises(ValueError):
        Hyperparams(learning_rate=0)


def test_checkpoint_round_trip(tmp_path, small_corpus):
    from ltlcheck.features import make_dictionary

    m = Model.init(Architecture("gcn", 64), seed=4, dtype=np.float32)
    path = tmp_path / "ckpt.json"
    save_checkpoint(path, m, Hyperparams().to_dict(), make_dictionary(0))
    loaded, meta = load_checkpoint(path)
    assert loaded.arch == m.arch and meta["dictionary"] == make_dictionary(0)
    assert all(np.array_equal(loaded.params[k], m.params[k]) for k in m.params)
    assert forward_gcn(loaded, small_corpus[0]) == forward_gcn(m, small_corpus[0])
    hist = [{"epoch": 1, "train_loss": 0.5, "val_accuracy": 0.75}]
    write_history(tmp_path / "h.jsonl", hist)
    assert read_history(tmp_path / "h.jsonl") == hist

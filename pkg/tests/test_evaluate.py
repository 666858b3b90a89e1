import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgtdetect import Dataset, Document, PipelineConfig, accuracy, confusion_matrix, evaluate, pipeline_fit
from mgtdetect.corpus import BINARY_A, MULTIWAY_B
from mgtdetect.evaluate import metrics_from_predictions


@pytest.mark.parametrize("preds, golds, expected", [([0, 1], [0, 1], 1.0), ([0, 0], [0, 1], 0.5)])
def test_accuracy_examples(preds, golds, expected):
    assert accuracy(preds, golds) == expected


@pytest.mark.parametrize("preds, golds", [([], []), ([0], [0, 1])])
def test_accuracy_errors(preds, golds):
    with pytest.raises(ValueError):
        accuracy(preds, golds)


def test_confusion_examples():
    assert confusion_matrix([0, 1, 1], [0, 1, 1], 2).tolist() == [[1, 0], [0, 2]]
    assert confusion_matrix([1, 1], [0, 0], 2).tolist() == [[0, 2], [0, 0]]
    cm = confusion_matrix([5] * 4, [0] * 4, 6)
    assert cm[0, 5] == 4 and cm.sum() == 4


def test_confusion_out_of_range():
    with pytest.raises(ValueError, match="outside"):
        confusion_matrix([2], [0], 2)


pairs = st.integers(2, 6).flatmap(
    lambda c: st.lists(st.tuples(st.integers(0, c - 1), st.integers(0, c - 1)), min_size=1, max_size=40).map(
        lambda ps: (c, ps)
    )
)


@given(pairs)
def test_trace_matches_accuracy(case):
    c, ps = case
    preds, golds = zip(*ps)
    cm = confusion_matrix(preds, golds, c)
    assert cm.sum() == len(ps)
    assert np.trace(cm) / len(ps) == accuracy(preds, golds)


@given(pairs, st.randoms(use_true_random=False))
def test_permutation_invariance(case, rnd):
    c, ps = case
    names = [f"c{i}" for i in range(c)]
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    a = metrics_from_predictions(*zip(*ps), names)
    b = metrics_from_predictions(*zip(*shuffled), names)
    assert a.to_dict() == b.to_dict()


@given(pairs)
def test_recall_convention(case):
    c, ps = case
    preds, golds = zip(*ps)
    m = metrics_from_predictions(preds, golds, [str(i) for i in range(c)])
    for k, cls in enumerate(m.per_class):
        row = m.confusion[k].sum()
        assert cls.support == row
        assert cls.recall == (m.confusion[k, k] / row if row else 0.0)
        assert 0.0 <= cls.f1 <= 1.0


def test_zero_denominators_flagged():
    m = metrics_from_predictions([0, 0], [0, 0], ["human", "machine"])
    machine = m.per_class[1]
    assert (machine.precision, machine.recall, machine.f1) == (0.0, 0.0, 0.0)
    assert machine.undefined
    assert "*" in m.report()


def test_json_schema():
    m = metrics_from_predictions([0, 1, 1], [0, 1, 0], ["human", "machine"])
    d = json.loads(m.to_json())
    assert set(d) == {"accuracy", "n", "confusion", "per_class"}
    assert d["n"] == 3 and d["confusion"] == [[1, 1], [0, 1]]
    assert [set(p) for p in d["per_class"]] == [{"name", "precision", "recall", "f1"}] * 2
    assert d["per_class"][0]["name"] == "human"


def test_report_lists_every_class():
    names = list(MULTIWAY_B.class_names)
    m = metrics_from_predictions([0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 4, 0], names)
    text = m.report("dev")
    assert text.startswith("dev\naccuracy 0.8333")
    assert all(n in text for n in names)


def _docs(pairs):
    return tuple(Document(str(i), t, lab) for i, (t, lab) in enumerate(pairs))


def test_evaluate_overfit_is_perfect():
    train = Dataset(_docs([("alpha beta gamma", 0), ("delta epsilon zeta", 1)] * 6), BINARY_A)
    cfg = PipelineConfig(
        scheme="a",
        features=[{"kind": "count"}],
        model={"type": "gbdt", "train": {"n_rounds": 20, "min_leaf": 1, "max_depth": 2}},
    )
    m = evaluate(pipeline_fit(cfg, train), train)
    assert m.accuracy == 1.0 and m.n == 12


def test_evaluate_constant_predictor_balanced():
    # every training text is identical, so the model sees no signal and predicts one class
    train = Dataset(_docs([("same words", 0), ("same words", 1), ("same words", 0)]), BINARY_A)
    fp = pipeline_fit(PipelineConfig(scheme="a", features=[{"kind": "count"}], model={"type": "nb"}), train)
    test = Dataset(_docs([("anything", 0), ("else", 1), ("here", 0), ("now", 1)]), BINARY_A)
    assert evaluate(fp, test).accuracy == 0.5


def test_evaluate_unlabeled_names_document():
    train = Dataset(_docs([("a b", 0), ("c d", 1)]), BINARY_A)
    fp = pipeline_fit(PipelineConfig(scheme="a", features=[{"kind": "count"}], model={"type": "nb"}), train)
    ds = Dataset((Document("x1", "a b", 0), Document("lost", "c d", None)), BINARY_A)
    with pytest.raises(ValueError, match="lost"):
        evaluate(fp, ds)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogrnn.eval.metrics import ConfusionCounts, confusion, roc_auc, roc_curve, sens_spec
from oracles import pairwise_auc


def test_confusion_basic():
    c = confusion([0.9, 0.1], [1, 0])
    assert (c.tp, c.tn, c.fp, c.fn) == (1, 1, 0, 0)


def test_confusion_tie_is_positive():
    assert confusion([0.5], [1]).tp == 1
    assert confusion([0.5], [0]).fp == 1


def test_confusion_all_false_positive():
    c = confusion([0.9] * 7, [0] * 7)
    assert (c.fp, c.tp, c.tn, c.fn) == (7, 0, 0, 0)
    assert c.total == 7


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion([], [])
    with pytest.raises(ValueError):
        confusion([0.1, 0.2], [1])
    with pytest.raises(ValueError):
        confusion([0.1], [2])


def test_sens_spec():
    assert sens_spec(ConfusionCounts(tp=8, fp=0, tn=0, fn=2))[0] == pytest.approx(0.8)
    assert sens_spec(ConfusionCounts(tp=0, fp=10, tn=90, fn=0))[1] == pytest.approx(0.9)
    assert sens_spec(ConfusionCounts(tp=0, fp=1, tn=1, fn=0))[0] is None
    assert sens_spec(ConfusionCounts(tp=1, fp=0, tn=0, fn=1))[1] is None


def test_auc_examples():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])[1] == 1.0
    labels, scores = [1, 0, 0, 1], [0.9, 0.2, 0.8, 0.3]
    assert pairwise_auc(scores, labels) == 0.75
    assert roc_auc(scores, labels)[1] == pytest.approx(0.75, abs=1e-15)


def test_auc_single_class():
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])


def test_random_scores_auc_near_half():
    rng = np.random.default_rng(0)
    aucs = []
    for _ in range(10_000):
        y = rng.integers(0, 2, size=20)
        if y.min() == y.max():
            continue
        aucs.append(roc_auc(rng.random(20), y)[1])
    assert abs(np.mean(aucs) - 0.5) < 0.02


label_score = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1000).map(lambda v: v / 1000), min_size=n, max_size=n),
    )
).filter(lambda t: 0 < sum(t[0]) < len(t[0]))


@settings(max_examples=200)
@given(label_score)
def test_auc_equals_pairwise_oracle(ls):
    labels, scores = ls
    assert roc_auc(scores, labels)[1] == pytest.approx(pairwise_auc(scores, labels), abs=1e-12)


@settings(max_examples=100)
@given(label_score, st.randoms(use_true_random=False))
def test_roc_invariants(ls, rnd):
    labels, scores = ls
    roc = roc_curve(scores, labels)
    assert (roc.fpr[0], roc.tpr[0]) == (0.0, 0.0)
    assert (roc.fpr[-1], roc.tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(roc.fpr) >= 0) and np.all(np.diff(roc.tpr) >= 0)
    perm = list(range(len(labels)))
    rnd.shuffle(perm)
    auc = roc_auc(scores, labels)[1]
    assert roc_auc([scores[i] for i in perm], [labels[i] for i in perm])[1] == pytest.approx(auc, abs=1e-12)
    c = confusion(scores, labels)
    assert confusion([scores[i] for i in perm], [labels[i] for i in perm]) == c
    # strictly increasing transform
    assert roc_auc(np.exp(3 * np.asarray(scores)) - 7, labels)[1] == pytest.approx(auc, abs=1e-12)

"""Image- and signal-domain classifiers."""

from __future__ import annotations

import pytest
import torch

from relayjscc.classifiers import ImageClassifier, SignalClassifier
from relayjscc.codec import CodecSpec


@pytest.fixture
def spec(tiny_cfg):
    return CodecSpec.from_config(tiny_cfg)


def test_image_classifier_shape(spec):
    clf = ImageClassifier(spec, num_classes=5)
    logits = clf(torch.rand(3, 3, 16, 16))
    assert logits.shape == (3, 5)
    assert torch.isfinite(logits).all()


def test_signal_classifier_shape(spec):
    clf = SignalClassifier(spec, num_classes=4)
    logits = clf(torch.randn(2, 16, 8))
    assert logits.shape == (2, 4)
    assert torch.isfinite(logits).all()


def test_softmax_rows_sum_to_one(spec):
    clf = ImageClassifier(spec, num_classes=3)
    with torch.no_grad():
        probs = clf(torch.rand(4, 3, 16, 16)).softmax(dim=1)
    assert torch.allclose(probs.sum(dim=1), torch.ones(4), atol=1e-6)


def test_argmax_invariant_to_logit_shift(spec):
    clf = SignalClassifier(spec, num_classes=6)
    with torch.no_grad():
        logits = clf(torch.randn(5, 16, 8))
    for c in (-3.7, 0.0, 11.2):
        assert torch.equal((logits + c).argmax(dim=1), logits.argmax(dim=1))


def test_batch_order_preserved(spec):
    clf = SignalClassifier(spec, num_classes=3)
    y = torch.randn(4, 16, 8)
    perm = torch.tensor([3, 1, 0, 2])
    with torch.no_grad():
        assert torch.allclose(clf(y)[perm], clf(y[perm]), atol=1e-6)


def test_classifiers_do_not_share_parameters(spec):
    a = ImageClassifier(spec, num_classes=2)
    b = SignalClassifier(spec, num_classes=2)
    ids_a = {id(p) for p in a.parameters()}
    ids_b = {id(p) for p in b.parameters()}
    assert ids_a.isdisjoint(ids_b)


def test_gradients_reach_all_parameters(spec):
    clf = SignalClassifier(spec, num_classes=3)
    loss = torch.nn.functional.cross_entropy(
        clf(torch.randn(4, 16, 8)), torch.tensor([0, 1, 2, 0]))
    loss.backward()
    missing = [name for name, p in clf.named_parameters() if p.grad is None]
    assert missing == []

"""Tests for nearest-neighbor matching and evaluation reporting."""

import numpy as np
import pytest

from avword import classifier
from avword.classifier import Prediction
from avword.pca import PcaModel


def make_model(projections, labels, dim=None):
    """Assemble a model straight from its eigenspace contents."""
    projections = np.asarray(projections, dtype=np.float64)
    k = projections.shape[0]
    dim = dim or max(k, 1)
    eigenvectors = np.zeros((dim, k))
    for j in range(k):
        eigenvectors[j, j] = 1.0
    return PcaModel(
        mean=np.zeros(dim),
        eigenvalues=np.arange(k, 0, -1, dtype=np.float64),
        eigenvectors=eigenvectors,
        train_projections=projections,
        labels=list(labels),
    )


class TestEuclidean:
    def test_identity(self):
        x = np.array([1.0, 2.0, 3.0])
        assert classifier.euclidean(x, x) == 0.0

    def test_pythagorean(self):
        assert classifier.euclidean(np.zeros(2), np.array([3.0, 4.0])) == 5.0

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a, b = rng.random(8), rng.random(8)
        assert classifier.euclidean(a, b) == classifier.euclidean(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            classifier.euclidean(np.zeros(3), np.zeros(4))


class TestNearest:
    def test_exact_match(self):
        model = make_model([[0.0, 1.0, 5.0], [0.0, 2.0, 5.0]], ["a", "b", "c"])
        pred = classifier.nearest(np.array([1.0, 2.0]), model)
        assert pred.predicted_label == "b"
        assert pred.nearest_index == 1
        assert pred.distance == 0.0

    def test_midpoint_tie_breaks_low(self):
        model = make_model([[0.0, 2.0]], ["first", "second"])
        pred = classifier.nearest(np.array([1.0]), model)
        assert pred.predicted_label == "first"
        assert pred.nearest_index == 0

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(13)
        proj = rng.random((4, 20))
        labels = [f"c{i}" for i in range(20)]
        model = make_model(proj, labels)
        for _ in range(25):
            x = rng.random(4)
            pred = classifier.nearest(x, model)
            dists = [classifier.euclidean(x, proj[:, i]) for i in range(20)]
            best = int(np.argmin(dists))
            assert pred.nearest_index == best
            assert pred.distance == pytest.approx(dists[best])

    def test_permutation_invariant_when_distinct(self):
        rng = np.random.default_rng(21)
        proj = rng.random((3, 10))
        labels = [f"c{i}" for i in range(10)]
        model = make_model(proj, labels)
        x = rng.random(3)
        want = classifier.nearest(x, model).predicted_label
        perm = rng.permutation(10)
        shuffled = make_model(proj[:, perm], [labels[i] for i in perm])
        assert classifier.nearest(x, shuffled).predicted_label == want

    def test_duplicate_of_nearest_changes_nothing(self):
        rng = np.random.default_rng(33)
        proj = rng.random((3, 6))
        labels = [f"c{i}" for i in range(6)]
        model = make_model(proj, labels)
        x = rng.random(3)
        pred = classifier.nearest(x, model)
        dup = np.hstack([proj, proj[:, [pred.nearest_index]]])
        model2 = make_model(dup, labels + [pred.predicted_label])
        assert classifier.nearest(x, model2).predicted_label == pred.predicted_label

    def test_scaling_invariance(self):
        rng = np.random.default_rng(8)
        proj = rng.random((5, 12))
        labels = [f"c{i % 4}" for i in range(12)]
        model = make_model(proj, labels)
        scaled = make_model(3.7 * proj, labels)
        for _ in range(10):
            x = rng.random(5)
            assert (
                classifier.nearest(x, model).predicted_label
                == classifier.nearest(3.7 * x, scaled).predicted_label
            )

    def test_empty_model_rejected(self):
        model = make_model(np.zeros((2, 1)), ["a"])
        model.train_projections = np.zeros((2, 0))
        model.labels = []
        with pytest.raises(ValueError):
            classifier.nearest(np.zeros(2), model)

    def test_wrong_dimension_rejected(self):
        model = make_model([[0.0, 1.0]], ["a", "b"])
        with pytest.raises(ValueError):
            classifier.nearest(np.zeros(3), model)


class TestClassifyFallback:
    def test_rank_zero_uses_mean_distance(self):
        model = PcaModel(
            mean=np.array([1.0, 1.0]),
            eigenvalues=np.zeros(0),
            eigenvectors=np.zeros((2, 0)),
            train_projections=np.zeros((0, 3)),
            labels=["a", "b", "c"],
        )
        pred = classifier.classify(np.array([4.0, 5.0]), model)
        assert pred.predicted_label == "a"
        assert pred.nearest_index == 0
        assert pred.distance == pytest.approx(5.0)


class TestFormatPercent:
    def test_reference_count_pairs(self):
        assert classifier.format_percent(23, 36) == "63.88%"
        assert classifier.format_percent(2, 3) == "66.66%"
        assert classifier.format_percent(1, 3) == "33.33%"
        assert classifier.format_percent(36, 36) == "100%"
        assert classifier.format_percent(0, 3) == "0%"
        assert classifier.format_percent(18, 36) == "50%"

    def test_truncates_never_rounds(self):
        # 35/36 = 97.222..., truncation keeps 97.22
        assert classifier.format_percent(35, 36) == "97.22%"
        # 1/7 = 14.2857...% -> 14.28, not 14.29
        assert classifier.format_percent(1, 7) == "14.28%"

    def test_empty_denominator(self):
        assert classifier.format_percent(0, 0) == "0%"


class TestEvaluate:
    @pytest.fixture
    def twelve_classes(self):
        return [f"word{i:02d}" for i in range(12)]

    def test_single_row_accuracy(self, twelve_classes):
        truths = [twelve_classes[0]] * 3
        preds = [twelve_classes[0], twelve_classes[0], twelve_classes[4]]
        cm = classifier.evaluate(preds, truths, twelve_classes)
        assert cm.counts[0, 0] == 2 and cm.counts[0, 4] == 1
        assert classifier.format_percent(cm.recognized(0), cm.row_total(0)) == "66.66%"

    def test_23_of_36(self, twelve_classes):
        # per-class correct counts summing to 23 over 36 samples
        diagonal = [2, 1, 2, 2, 2, 0, 3, 3, 3, 2, 3, 0]
        preds, truths = [], []
        for i, label in enumerate(twelve_classes):
            wrong = twelve_classes[(i + 1) % 12]
            truths += [label] * 3
            preds += [label] * diagonal[i] + [wrong] * (3 - diagonal[i])
        cm = classifier.evaluate(preds, truths, twelve_classes)
        correct, total = cm.overall()
        assert (correct, total) == (23, 36)
        assert classifier.format_percent(correct, total) == "63.88%"

    def test_identity_is_100(self, twelve_classes):
        truths = [label for label in twelve_classes for _ in range(3)]
        cm = classifier.evaluate(truths, truths, twelve_classes)
        correct, total = cm.overall()
        assert (correct, total) == (36, 36)
        assert classifier.format_percent(correct, total) == "100%"

    def test_row_sums_match_sample_counts(self, twelve_classes):
        rng = np.random.default_rng(3)
        truths = [twelve_classes[rng.integers(12)] for _ in range(60)]
        preds = [twelve_classes[rng.integers(12)] for _ in range(60)]
        cm = classifier.evaluate(preds, truths, twelve_classes)
        for i, label in enumerate(twelve_classes):
            assert cm.row_total(i) == truths.count(label)

    def test_accepts_prediction_objects(self, twelve_classes):
        preds = [Prediction(twelve_classes[0], 0, 0.0)]
        cm = classifier.evaluate(preds, [twelve_classes[0]], twelve_classes)
        assert cm.counts[0, 0] == 1

    def test_unknown_labels_rejected(self, twelve_classes):
        with pytest.raises(ValueError):
            classifier.evaluate(["nope"], [twelve_classes[0]], twelve_classes)
        with pytest.raises(ValueError):
            classifier.evaluate([twelve_classes[0]], ["nope"], twelve_classes)

    def test_length_mismatch_rejected(self, twelve_classes):
        with pytest.raises(ValueError):
            classifier.evaluate([], [twelve_classes[0]], twelve_classes)

    def test_zero_row_reports_zero(self, twelve_classes):
        cm = classifier.evaluate(
            [twelve_classes[1]], [twelve_classes[1]], twelve_classes
        )
        assert cm.per_class_accuracy(0) == 0.0
        assert classifier.format_percent(cm.recognized(0), cm.row_total(0)) == "0%"


class TestRendering:
    @pytest.fixture
    def small_cm(self):
        classes = ["aa", "bb", "cc"]
        preds = ["aa", "aa", "bb", "bb", "cc", "bb"]
        truths = ["aa", "aa", "aa", "bb", "cc", "cc"]
        return classifier.evaluate(preds, truths, classes)

    def test_csv_layout(self, small_cm):
        text = classifier.confusion_csv(small_cm)
        lines = text.strip().split("\n")
        assert lines[0] == "true_class,aa,bb,cc"
        assert lines[1] == "aa,2,1,0"
        assert lines[3] == "cc,0,1,1"

    def test_metrics_full_precision(self, small_cm):
        text = classifier.metrics_csv(small_cm)
        lines = text.strip().split("\n")
        assert lines[0] == "class,recognized,missed,accuracy,accuracy_printed"
        aa = lines[1].split(",")
        assert aa[0] == "aa" and aa[1] == "2" and aa[2] == "1"
        assert float(aa[3]) == pytest.approx(2.0 / 3.0)
        assert aa[4] == "66.66%"
        overall = lines[-1].split(",")
        assert overall[0] == "overall"
        assert float(overall[3]) == pytest.approx(4.0 / 6.0)

    def test_table_structure(self, small_cm):
        table = classifier.confusion_table(small_cm)
        lines = table.strip().split("\n")
        assert "Recognized" in lines[0] and "Accuracy" in lines[0]
        assert lines[-2].startswith("Total")
        assert lines[-1].startswith("Final Result")
        assert "66.66%" in table
        # column alignment: header and data rows agree on total width
        assert len(lines[0]) >= len(lines[1].rstrip())

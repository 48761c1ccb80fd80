"""Acceptance checks for the whole pipeline.

One test per acceptance criterion; `pytest -v tests/test_acceptance.py`
prints a single pass/fail line for each. Tolerances are part of the
contract and must not be loosened.
"""

import math
import time

import numpy as np

from avword import classifier, dataset, featio, mfcc, pca, roi, zernike
from avword.cli import main


def all_moment_indices(max_m):
    """Every legal (m, n): |n| <= m and m - |n| even."""
    return [
        (m, n)
        for m in range(max_m + 1)
        for n in range(-m, m + 1)
        if (m - abs(n)) % 2 == 0
    ]


def radial_coefficients(m, n):
    n = abs(n)
    return [
        (-1) ** s
        * math.factorial(m - s)
        / (
            math.factorial(s)
            * math.factorial((m + n) // 2 - s)
            * math.factorial((m - n) // 2 - s)
        )
        for s in range((m - n) // 2 + 1)
    ]


def naive_moment(image, m, n):
    """Per-pixel double sum with exactly rounded accumulation."""
    h, w = image.shape
    coeffs = radial_coefficients(m, n)
    re_terms, im_terms = [], []
    for i in range(h):
        y = (2.0 * i + 1.0 - h) / h
        for j in range(w):
            x = (2.0 * j + 1.0 - w) / w
            r = math.hypot(x, y)
            if r > 1.0:
                continue
            radial = math.fsum(
                c * r ** (m - 2 * s) for s, c in enumerate(coeffs)
            )
            theta = math.atan2(y, x)
            # conj(R e^{-jn theta}) = R (cos + j sin)(n theta)
            weight = image[i, j] * radial * (4.0 / (w * h))
            re_terms.append(weight * math.cos(n * theta))
            im_terms.append(weight * math.sin(n * theta))
    scale = (m + 1) / math.pi
    return complex(scale * math.fsum(re_terms), scale * math.fsum(im_terms))


def test_substitute_corpus_for_private_recordings():
    """The recordings behind the originally reported figures are not
    redistributable, so nothing here replays them; correctness rests on
    the oracle, invariance, and synthetic-corpus checks below."""
    assert callable(dataset.synth_corpus)


def test_zernike_moments_match_naive_double_sum():
    rng = np.random.default_rng(12345)
    indices = all_moment_indices(9)
    started = time.monotonic()
    worst = 0.0
    for _ in range(50):
        image = rng.random((16, 16))
        for m, n in indices:
            fast = zernike.zernike_moment(image, m, n)
            slow = naive_moment(image, m, n)
            rel = abs(fast - slow) / max(abs(slow), 1e-12)
            worst = max(worst, rel)
            assert rel <= 1e-9, (m, n, rel)
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"oracle comparison took {elapsed:.1f}s"


def test_radial_polynomials_equal_one_at_unit_radius():
    one = np.array([1.0])
    for m, n in all_moment_indices(12):
        value = zernike.radial_polynomial(m, n, one)[0]
        assert abs(value - 1.0) <= 1e-9, (m, n, value)


def test_descriptor_invariant_under_quarter_rotation():
    # centered disk with a notch cut out, so no extra symmetry is left
    size = 121
    yy, xx = np.indices((size, size), dtype=np.float64)
    cy = cx = (size - 1) / 2.0
    disk = (xx - cx) ** 2 + (yy - cy) ** 2 <= 45.0**2
    notch = (xx > cx + 18) & (np.abs(yy - cy - 14) < 9)
    mask = (disk & ~notch).astype(np.float64)
    before = zernike.zernike_magnitudes(mask)
    after = zernike.zernike_magnitudes(np.rot90(mask))
    rel = np.abs(before - after) / np.maximum(np.maximum(before, after), 1e-12)
    assert before.min() > 0.0
    assert rel.max() <= 0.02, rel


def test_mel_scale_calibration_points():
    assert mfcc.hz_to_mel(0.0) == 0.0
    assert 999.9 <= mfcc.hz_to_mel(1000.0) <= 1000.1


def test_dct_of_constant_log_energies_is_null():
    matrix = mfcc.dct_matrix(13, 26)
    for level in (1.0, -3.5, 100.0):
        cepstra = matrix @ np.full(26, level)
        assert np.abs(cepstra).max() <= 1e-9


def test_snapshot_pca_matches_direct_eigendecomposition():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        samples = rng.standard_normal((10, 6))
        labels = [f"c{i}" for i in range(6)]
        model = pca.fit(samples, labels, "all")

        centered = samples - samples.mean(axis=1, keepdims=True)
        direct = np.linalg.eigvalsh(centered @ centered.T)[::-1]
        for got, want in zip(model.eigenvalues, direct):
            assert abs(got - want) <= 1e-8 * max(abs(want), 1.0), seed

        for column in samples.T:
            rebuilt = model.reconstruct(model.project(column))
            rel = np.linalg.norm(rebuilt - column) / np.linalg.norm(column)
            assert rel <= 1e-6, seed


def test_reference_confusion_counts_format_as_expected():
    classes = [f"word{i:02d}" for i in range(12)]
    diagonal = [2, 1, 2, 2, 2, 0, 3, 3, 3, 2, 3, 0]
    truths, predictions = [], []
    for i, correct in enumerate(diagonal):
        for sample in range(3):
            truths.append(classes[i])
            if sample < correct:
                predictions.append(classes[i])
            else:
                predictions.append(classes[(i + 1) % 12])
    cm = classifier.evaluate(predictions, truths, classes)
    assert cm.overall() == (23, 36)
    assert classifier.format_percent(*cm.overall()) == "63.88%"

    perfect = classifier.evaluate(truths, truths, classes)
    assert perfect.overall() == (36, 36)
    assert classifier.format_percent(*perfect.overall()) == "100%"


def run_pipeline(root):
    """synth -> extract both modalities -> train -> evaluate; returns paths."""
    corpus = root / "corpus"
    assert main(["synth", "--out", str(corpus), "--classes", "12",
                 "--per-class", "10", "--seed", "0", "--noise", "0.0"]) == 0
    manifest = corpus / "manifest.jsonl"
    results = {}
    for modality in ("visual", "audio"):
        features = root / f"{modality}.csv"
        model = root / f"{modality}.model"
        metrics = root / f"{modality}_metrics"
        assert main(["extract", "--manifest", str(manifest),
                     "--modality", modality, "--out", str(features)]) == 0
        assert main(["train", str(features), "--manifest", str(manifest),
                     "--out", str(model)]) == 0
        assert main(["evaluate", str(features), "--model", str(model),
                     "--manifest", str(manifest), "--out", str(metrics)]) == 0
        results[modality] = metrics
    return results


def accuracy_from_confusion(path):
    lines = path.read_text().splitlines()
    counts = np.array(
        [[int(v) for v in line.split(",")[1:]] for line in lines[1:]]
    )
    return np.trace(counts), counts.sum()


def test_end_to_end_synthetic_corpus_run(tmp_path):
    started = time.monotonic()
    results = run_pipeline(tmp_path / "first")
    elapsed = time.monotonic() - started
    assert elapsed < 120.0, f"pipeline took {elapsed:.1f}s"

    correct, total = accuracy_from_confusion(results["audio"] / "confusion.csv")
    assert total == 36
    assert correct == total, f"acoustic accuracy {correct}/{total}"

    correct, total = accuracy_from_confusion(results["visual"] / "confusion.csv")
    assert total == 36
    assert correct / total >= 0.90, f"visual accuracy {correct}/{total}"

    rerun = run_pipeline(tmp_path / "second")
    for modality in ("visual", "audio"):
        for name in ("confusion.csv", "confusion.txt", "metrics.csv"):
            first = (results[modality] / name).read_bytes()
            second = (rerun[modality] / name).read_bytes()
            assert first == second, f"{modality}/{name} differs between runs"


def test_feature_and_frame_shape_contracts():
    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, size=(90, 160, 3), dtype=np.uint8)
    mask = roi.preprocess_frame(frame, roi.full_frame_box(160, 90))
    assert mask.shape == (120, 120)

    vector = zernike.sequence_features([np.zeros((120, 120))])
    assert vector.shape == (468,)
    assert zernike.FEATURE_DIM == 468

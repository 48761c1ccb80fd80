"""Corpus plumbing: manifests, the 70/30 split, and synthetic data.

A corpus is described by a JSON-lines manifest; each line is one
utterance with media paths stored relative to the manifest file. The
synthetic generator builds a fully self-contained corpus (frames, audio,
manifest) whose classes are separable by both the visual and acoustic
front ends, for pipeline benchmarking without any private recordings.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .featio import atomic_write_text
from .mfcc import write_wav
from .roi import BoundingBox

FRAME_COUNT = 52
FRAME_WIDTH = 720
FRAME_HEIGHT = 576
AUDIO_RATE = 16000
AUDIO_SECONDS = 2.0

_SPLITS = ("train", "test", "auto")
_RECORD_KEYS = {
    "id", "label", "frames_dir", "audio_path", "mouth_box", "split", "speaker",
}


@dataclass
class UtteranceRecord:
    id: str
    label: str
    frames_dir: Path | None = None
    audio_path: Path | None = None
    mouth_box: BoundingBox | None = None
    split: str = "auto"
    speaker: str | None = None

    def validate(self) -> None:
        if not self.id:
            raise ValueError("record id must be nonempty")
        if not self.label:
            raise ValueError(f"record {self.id!r}: label must be nonempty")
        if self.frames_dir is None and self.audio_path is None:
            raise ValueError(
                f"record {self.id!r}: needs frames_dir or audio_path"
            )
        if self.split not in _SPLITS:
            raise ValueError(
                f"record {self.id!r}: split must be one of {_SPLITS}"
            )


@dataclass
class SplitConfig:
    train_fraction: float = 0.70
    seed: int = 0
    stratified: bool = True

    def validate(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


def load_manifest(path: str | Path, check_paths: bool = True) -> list[UtteranceRecord]:
    """Parse and validate a JSON-lines manifest.

    Relative media paths resolve against the manifest's directory. With
    check_paths every referenced path must exist; all missing ones are
    reported together.
    """
    path = Path(path)
    base = path.parent
    records: list[UtteranceRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{line_no}: invalid JSON ({err.msg})") from None
            if not isinstance(raw, dict):
                raise ValueError(f"{path}:{line_no}: expected a JSON object")
            unknown = set(raw) - _RECORD_KEYS
            if unknown:
                raise ValueError(
                    f"{path}:{line_no}: unknown fields {sorted(unknown)}"
                )
            try:
                record = _record_from_json(raw, base)
                record.validate()
            except (ValueError, TypeError) as err:
                raise ValueError(f"{path}:{line_no}: {err}") from None
            if record.id in seen:
                raise ValueError(f"{path}:{line_no}: duplicate id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    if check_paths:
        missing = []
        for record in records:
            if record.frames_dir is not None and not record.frames_dir.is_dir():
                missing.append(f"{record.id}: frames_dir {record.frames_dir}")
            if record.audio_path is not None and not record.audio_path.is_file():
                missing.append(f"{record.id}: audio_path {record.audio_path}")
        if missing:
            raise ValueError(
                f"{path}: missing referenced paths:\n  " + "\n  ".join(missing)
            )
    return records


def write_manifest(path: str | Path, records: list[UtteranceRecord]) -> None:
    """Serialize records as JSON lines with paths relative to the manifest."""
    path = Path(path)
    base = path.parent.resolve()
    lines = []
    for record in records:
        record.validate()
        obj: dict = {"id": record.id, "label": record.label}
        if record.speaker is not None:
            obj["speaker"] = record.speaker
        if record.frames_dir is not None:
            obj["frames_dir"] = _relativize(record.frames_dir, base)
        if record.audio_path is not None:
            obj["audio_path"] = _relativize(record.audio_path, base)
        if record.mouth_box is not None:
            b = record.mouth_box
            obj["mouth_box"] = {"x0": b.x0, "y0": b.y0, "w": b.w, "h": b.h}
        if record.split != "auto":
            obj["split"] = record.split
        lines.append(json.dumps(obj, ensure_ascii=False))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def _record_from_json(raw: dict, base: Path) -> UtteranceRecord:
    box = None
    if raw.get("mouth_box") is not None:
        b = raw["mouth_box"]
        if not isinstance(b, dict) or set(b) != {"x0", "y0", "w", "h"}:
            raise ValueError("mouth_box needs exactly the keys x0, y0, w, h")
        box = BoundingBox(int(b["x0"]), int(b["y0"]), int(b["w"]), int(b["h"]))

    def path_of(key):
        value = raw.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    return UtteranceRecord(
        id=str(raw.get("id", "")),
        label=str(raw.get("label", "")),
        frames_dir=path_of("frames_dir"),
        audio_path=path_of("audio_path"),
        mouth_box=box,
        split=raw.get("split", "auto"),
        speaker=raw.get("speaker"),
    )


def _relativize(p: Path, base: Path) -> str:
    try:
        return p.resolve().relative_to(base).as_posix()
    except ValueError:
        return p.resolve().as_posix()


def split_records(
    records: list[UtteranceRecord], cfg: SplitConfig | None = None
) -> tuple[list[UtteranceRecord], list[UtteranceRecord]]:
    """Partition records into train and test sets, 70/30 by default.

    Explicit per-record splits are honored as-is. The rest are shuffled
    with a seed derived from the global seed (and the class label when
    stratified) and divided so each class sends floor(n * fraction), at
    least 1, to training. String seeding hashes the text, so the draw is
    stable across processes. Outputs are ordered by record id.
    """
    cfg = cfg or SplitConfig()
    cfg.validate()
    train: list[UtteranceRecord] = []
    test: list[UtteranceRecord] = []
    auto: list[UtteranceRecord] = []
    for record in records:
        if record.split == "train":
            train.append(record)
        elif record.split == "test":
            test.append(record)
        else:
            auto.append(record)
    if cfg.stratified:
        by_label: dict[str, list[UtteranceRecord]] = {}
        for record in auto:
            by_label.setdefault(record.label, []).append(record)
        for label, group in by_label.items():
            if len(group) < 2:
                raise ValueError(
                    f"class {label!r} has {len(group)} records; "
                    "stratified splitting needs at least 2"
                )
            _draw(group, cfg.train_fraction, f"{cfg.seed}:{label}", train, test)
    elif auto:
        if len(auto) < 2:
            raise ValueError("splitting needs at least 2 records")
        _draw(auto, cfg.train_fraction, f"{cfg.seed}:", train, test)
    train.sort(key=lambda r: r.id)
    test.sort(key=lambda r: r.id)
    return train, test


def _draw(group, fraction, seed_key, train, test):
    # canonical order first, so the draw ignores manifest row order
    shuffled = sorted(group, key=lambda r: r.id)
    random.Random(seed_key).shuffle(shuffled)
    # guard against float drag just under the exact product
    n_train = max(1, int(len(shuffled) * fraction + 1e-9))
    train.extend(shuffled[:n_train])
    test.extend(shuffled[n_train:])


def synth_corpus(
    out_dir: str | Path,
    n_classes: int = 12,
    n_per_class: int = 10,
    seed: int = 0,
    noise_level: float = 0.0,
) -> Path:
    """Generate a synthetic audio-visual corpus and return the manifest path.

    Each utterance is a 52-frame sequence of a red ellipse opening and
    closing on a gray background (the aperture trajectory is the class
    signature) plus a 2 s two-tone WAV. Samples within a class differ by a
    deterministic time-warp exponent; noise_level > 0 adds seeded jitter
    and pixel/sample noise on top. With noise_level 0 regeneration is
    bitwise identical.
    """
    if n_classes < 2 or n_per_class < 2:
        raise ValueError("need at least 2 classes and 2 samples per class")
    if noise_level < 0.0:
        raise ValueError("noise_level must be >= 0")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    box = BoundingBox(240, 198, 240, 180)
    background = np.full((FRAME_HEIGHT, FRAME_WIDTH, 3), 128, dtype=np.uint8)
    yy, xx = np.indices((box.h, box.w), dtype=np.float64)
    dx = xx - (box.w - 1) / 2.0
    dy = yy - (box.h - 1) / 2.0
    a_axis = 96.0
    b_max = box.h / 2.0 - 6.0
    tone_step = math.floor(2800.0 / n_classes)
    records = []
    for c in range(n_classes):
        label = f"word{c:02d}"
        cycles = 1 + c % 4
        amplitude = (0.45, 0.70, 0.95)[(c // 4) % 3]
        for s in range(n_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, c, s]))
            warp = 1.0 + 0.05 * ((s % 5) - 2)
            amp = amplitude
            if noise_level > 0.0:
                warp *= 1.0 + 0.05 * noise_level * rng.uniform(-1.0, 1.0)
                amp *= 1.0 + 0.10 * noise_level * rng.uniform(-1.0, 1.0)
            utt_dir = out / label / f"s{s:02d}"
            frames_dir = utt_dir / "frames"
            frames_dir.mkdir(parents=True, exist_ok=True)
            for t in range(FRAME_COUNT):
                u = (t / (FRAME_COUNT - 1)) ** warp
                aperture = amp * abs(math.sin(math.pi * cycles * u))
                frame = background.copy()
                b_axis = aperture * b_max
                if b_axis > 0.0:
                    lips = (dx / a_axis) ** 2 + (dy / b_axis) ** 2 <= 1.0
                    region = frame[box.y0 : box.y0 + box.h, box.x0 : box.x0 + box.w]
                    region[lips] = (200, 40, 40)
                if noise_level > 0.0:
                    noisy = frame.astype(np.float64)
                    noisy += 8.0 * noise_level * rng.standard_normal(frame.shape)
                    frame = np.clip(noisy, 0.0, 255.0).astype(np.uint8)
                Image.fromarray(frame).save(
                    frames_dir / f"frame_{t + 1:04d}.png", compress_level=1
                )
            audio_path = utt_dir / "audio.wav"
            write_wav(audio_path, AUDIO_RATE, _two_tone(c, s, tone_step, rng, noise_level))
            records.append(
                UtteranceRecord(
                    id=f"{label}-s{s:02d}",
                    label=label,
                    frames_dir=frames_dir,
                    audio_path=audio_path,
                    mouth_box=box,
                    speaker=f"spk{s:02d}",
                )
            )
    manifest = out / "manifest.jsonl"
    write_manifest(manifest, records)
    return manifest


def _two_tone(c: int, s: int, step: int, rng, noise_level: float) -> np.ndarray:
    """Class signature: two sequential tones inside the 300-3400 Hz band."""
    half = int(AUDIO_RATE * AUDIO_SECONDS / 2.0)
    detune = 2.0 * ((s % 5) - 2)
    f1 = 350.0 + step * c + detune
    f2 = 520.0 + step * c + detune
    t = np.arange(half) / AUDIO_RATE
    signal = np.concatenate(
        [0.35 * np.sin(2.0 * math.pi * f1 * t), 0.35 * np.sin(2.0 * math.pi * f2 * t)]
    )
    if noise_level > 0.0:
        signal = signal + 0.02 * noise_level * rng.standard_normal(signal.size)
    return signal

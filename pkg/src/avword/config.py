"""One flat config file for every pipeline tunable.

The on-disk format is plain `section.key = value` lines with `#`
comments. `dumps(PipelineConfig())` emits the full default set, which is
what the `print-config` command prints; `loads` parses strictly, so a
typo in a key or value is an error rather than a silent default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dataset import SplitConfig
from .mfcc import MfccConfig
from .roi import RoiConfig
from .zernike import ZernikeConfig


@dataclass
class PipelineConfig:
    roi: RoiConfig = field(default_factory=RoiConfig)
    zernike: ZernikeConfig = field(default_factory=ZernikeConfig)
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    pca_components: int | str = "all"

    def validate(self) -> None:
        self.roi.validate()
        self.zernike.validate()
        self.mfcc.validate()
        self.split.validate()
        if self.pca_components != "all":
            if not isinstance(self.pca_components, int) or self.pca_components < 0:
                raise ValueError("pca.components must be 'all' or an integer >= 0")


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_indices(indices) -> str:
    return ",".join(f"{m}:{n}" for m, n in indices)


def dumps(cfg: PipelineConfig) -> str:
    """Render a config as text; loads(dumps(cfg)) is the identity."""
    c = cfg
    lines = [
        "# mouth region preprocessing",
        f"roi.median_radius = {_fmt(c.roi.median_radius)}",
        f"roi.feature_source = {c.roi.feature_source}",
        "",
        "# frame shape descriptors",
        f"zernike.indices = {_fmt_indices(c.zernike.indices)}",
        f"zernike.disk_mode = {c.zernike.disk_mode}",
        f"zernike.n_frames = {_fmt(c.zernike.n_frames)}",
        "",
        "# acoustic front end",
        f"mfcc.frame_len_ms = {_fmt(c.mfcc.frame_len_ms)}",
        f"mfcc.frame_step_ms = {_fmt(c.mfcc.frame_step_ms)}",
        f"mfcc.n_filters = {_fmt(c.mfcc.n_filters)}",
        f"mfcc.n_ceps = {_fmt(c.mfcc.n_ceps)}",
        f"mfcc.pre_emphasis = {_fmt(c.mfcc.pre_emphasis)}",
        f"mfcc.fft_size = {_fmt(c.mfcc.fft_size)}",
        f"mfcc.low_hz = {_fmt(c.mfcc.low_hz)}",
        f"mfcc.high_hz = {_fmt(c.mfcc.high_hz)}",
        f"mfcc.include_c0 = {_fmt(c.mfcc.include_c0)}",
        f"mfcc.pooling = {c.mfcc.pooling}",
        f"mfcc.n_frames = {_fmt(c.mfcc.n_frames)}",
        f"mfcc.log_floor = {_fmt(c.mfcc.log_floor)}",
        "",
        "# eigenspace size ('all' keeps every positive-variance component)",
        f"pca.components = {_fmt(c.pca_components)}",
        "",
        "# train/test split",
        f"split.train_fraction = {_fmt(c.split.train_fraction)}",
        f"split.seed = {_fmt(c.split.seed)}",
        f"split.stratified = {_fmt(c.split.stratified)}",
    ]
    return "\n".join(lines) + "\n"


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None


def _parse_auto_int(text: str):
    return None if text == "auto" else _parse_int(text)


def _parse_auto_float(text: str):
    return None if text == "auto" else _parse_float(text)


def _parse_indices(text: str):
    indices = []
    for part in text.split(","):
        m, sep, n = part.strip().partition(":")
        if not sep:
            raise ValueError(f"expected m:n pairs, got {part.strip()!r}")
        indices.append((_parse_int(m), _parse_int(n)))
    return indices


def _parse_components(text: str):
    return "all" if text == "all" else _parse_int(text)


def _choice(*allowed: str):
    def parse(text: str) -> str:
        if text not in allowed:
            raise ValueError(f"expected one of {allowed}, got {text!r}")
        return text

    return parse


# key -> ((section attr, field attr), value parser)
_KEYS = {
    "roi.median_radius": (("roi", "median_radius"), _parse_int),
    "roi.feature_source": (("roi", "feature_source"), _choice("binary", "gray")),
    "zernike.indices": (("zernike", "indices"), _parse_indices),
    "zernike.disk_mode": (("zernike", "disk_mode"), _choice("cover", "contain")),
    "zernike.n_frames": (("zernike", "n_frames"), _parse_int),
    "mfcc.frame_len_ms": (("mfcc", "frame_len_ms"), _parse_float),
    "mfcc.frame_step_ms": (("mfcc", "frame_step_ms"), _parse_float),
    "mfcc.n_filters": (("mfcc", "n_filters"), _parse_int),
    "mfcc.n_ceps": (("mfcc", "n_ceps"), _parse_int),
    "mfcc.pre_emphasis": (("mfcc", "pre_emphasis"), _parse_float),
    "mfcc.fft_size": (("mfcc", "fft_size"), _parse_auto_int),
    "mfcc.low_hz": (("mfcc", "low_hz"), _parse_float),
    "mfcc.high_hz": (("mfcc", "high_hz"), _parse_auto_float),
    "mfcc.include_c0": (("mfcc", "include_c0"), _parse_bool),
    "mfcc.pooling": (("mfcc", "pooling"), _choice("concat_fixed", "mean")),
    "mfcc.n_frames": (("mfcc", "n_frames"), _parse_int),
    "mfcc.log_floor": (("mfcc", "log_floor"), _parse_float),
    "pca.components": (("pca_components", None), _parse_components),
    "split.train_fraction": (("split", "train_fraction"), _parse_float),
    "split.seed": (("split", "seed"), _parse_int),
    "split.stratified": (("split", "stratified"), _parse_bool),
}


def loads(text: str, source: str = "<config>") -> PipelineConfig:
    """Parse config text over the defaults; unknown or repeated keys fail."""
    cfg = PipelineConfig()
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ValueError(f"{source}:{line_no}: expected 'key = value'")
        if key not in _KEYS:
            raise ValueError(f"{source}:{line_no}: unknown key {key!r}")
        if key in seen:
            raise ValueError(f"{source}:{line_no}: duplicate key {key!r}")
        seen.add(key)
        (attr, sub), parse = _KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as err:
            raise ValueError(f"{source}:{line_no}: {key}: {err}") from None
        if sub is None:
            setattr(cfg, attr, parsed)
        else:
            setattr(getattr(cfg, attr), sub, parsed)
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), source=str(path))

"""Python access to the sideseeing toolkit."""

import json as _json

from . import _core
from ._core import SideSeeingError

__all__ = [
    "SideSeeingError",
    "load",
    "validate",
    "summarize",
    "summarize_instance",
    "segment",
    "taxonomy",
    "synth",
    "snippet",
    "bundle",
    "geojson",
    "run_cli",
]


def load(path):
    return _json.loads(_core.load(str(path)))


def validate(path, profile="lenient"):
    return _json.loads(_core.validate(str(path), profile))


def summarize(root):
    """Per-city table rows plus the "all" row for a dataset root."""
    return _json.loads(_core.summarize(str(root)))


def summarize_instance(path):
    return _json.loads(_core.summarize_instance(str(path)))


def segment(path, params=None):
    return _json.loads(_core.segment(str(path), _json.dumps(params) if params else ""))


def taxonomy():
    return _json.loads(_core.taxonomy())


def synth(out, seed=1, per_city=3, config=None):
    """Writes a synthetic dataset and returns its ground truth."""
    return _json.loads(_core.synth(str(out), seed, per_city, _json.dumps(config) if config else ""))


def snippet(path, start_ms, end_ms, out, cut_video=True):
    """Offsets are milliseconds from the instance start."""
    return _json.loads(_core.snippet(str(path), int(start_ms), int(end_ms), str(out), cut_video))


def bundle(path, out, downsample_hz=10.0, waveform=False):
    return _core.bundle(str(path), str(out), downsample_hz, waveform)


def geojson(path):
    return _json.loads(_core.geojson(str(path)))


def run_cli(*args):
    return _core.run_cli([str(a) for a in args])

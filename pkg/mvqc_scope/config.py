"""
Global configuration for MVQC Scope, inspired by pandas' options API.

API:
- set_option(key, value)
- get_option(key)
- reset_option(key=None)  # None resets all
- option_context(*pairs): context manager to temporarily set options
- load_config_file(path): apply a line-oriented ``key = value`` file

Additionally, `configure_backend()` uses current options to create the
decision-record backend.

Keys (str or Enum accepted):
- imaging.t_dark: int in [0, 255]
- imaging.offset1 / imaging.offset2: int >= 0
- quadtree.order: "zorder" | "rowmajor"
- moments.normalized: bool
- classify.fuzzifier: float > 1
- classify.eps: float > 0
- classify.max_iter: int > 0
- classify.knn_slack: float >= 0
- eval.iris_imposters: "first" | "all"
- eval.jobs: int > 0
- records.backend: "memory" | "file"
- records.file.path: str | pathlib.Path
- records.file.buffer_size: int
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Iterator

from mvqc_scope.backend import Backend, FileBackend, InMemoryBackend

logger = logging.getLogger(__name__)


class ConfigKey(str, Enum):
    IMAGING_T_DARK = "imaging.t_dark"
    IMAGING_OFFSET1 = "imaging.offset1"
    IMAGING_OFFSET2 = "imaging.offset2"
    QUADTREE_ORDER = "quadtree.order"
    MOMENTS_NORMALIZED = "moments.normalized"
    CLASSIFY_FUZZIFIER = "classify.fuzzifier"
    CLASSIFY_EPS = "classify.eps"
    CLASSIFY_MAX_ITER = "classify.max_iter"
    CLASSIFY_KNN_SLACK = "classify.knn_slack"
    EVAL_IRIS_IMPOSTERS = "eval.iris_imposters"
    EVAL_JOBS = "eval.jobs"
    RECORDS_BACKEND = "records.backend"
    RECORDS_FILE_PATH = "records.file.path"
    RECORDS_FILE_BUFFER_SIZE = "records.file.buffer_size"


_DEFAULTS: dict[str, Any] = {
    ConfigKey.IMAGING_T_DARK.value: 128,
    ConfigKey.IMAGING_OFFSET1.value: 20,  # CASIA/MMU window offsets
    ConfigKey.IMAGING_OFFSET2.value: 40,
    ConfigKey.QUADTREE_ORDER.value: "zorder",  # zorder | rowmajor
    ConfigKey.MOMENTS_NORMALIZED.value: False,
    ConfigKey.CLASSIFY_FUZZIFIER.value: 2.0,
    ConfigKey.CLASSIFY_EPS.value: 1e-5,
    ConfigKey.CLASSIFY_MAX_ITER.value: 1000,
    ConfigKey.CLASSIFY_KNN_SLACK.value: 0.0,
    ConfigKey.EVAL_IRIS_IMPOSTERS.value: "first",  # first | all
    ConfigKey.EVAL_JOBS.value: 1,
    ConfigKey.RECORDS_BACKEND.value: "memory",  # memory | file
    ConfigKey.RECORDS_FILE_PATH.value: None,  # default decisions.jsonl
    ConfigKey.RECORDS_FILE_BUFFER_SIZE.value: 10,
}

_options: dict[str, Any] = dict(_DEFAULTS)


def _normalize_key(key: str | Enum) -> str:
    if isinstance(key, Enum):
        return str(key.value)
    if not isinstance(key, str):
        raise TypeError("Option key must be str or Enum")
    return key


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _validate(k: str, value: Any) -> None:
    if k == ConfigKey.IMAGING_T_DARK.value:
        if not _is_int(value) or not 0 <= value <= 255:
            raise ValueError("imaging.t_dark must be an int in [0, 255]")
    elif k in (ConfigKey.IMAGING_OFFSET1.value, ConfigKey.IMAGING_OFFSET2.value):
        if not _is_int(value) or value < 0:
            raise ValueError(f"{k} must be a non-negative int")
    elif k == ConfigKey.QUADTREE_ORDER.value:
        if value not in ("zorder", "rowmajor"):
            raise ValueError("quadtree.order must be 'zorder' or 'rowmajor'")
    elif k == ConfigKey.MOMENTS_NORMALIZED.value:
        if not isinstance(value, bool):
            raise ValueError("moments.normalized must be a bool")
    elif k == ConfigKey.CLASSIFY_FUZZIFIER.value:
        if not _is_number(value) or value <= 1:
            raise ValueError("classify.fuzzifier must be a number > 1")
    elif k == ConfigKey.CLASSIFY_EPS.value:
        if not _is_number(value) or value <= 0:
            raise ValueError("classify.eps must be a positive number")
    elif k in (ConfigKey.CLASSIFY_MAX_ITER.value, ConfigKey.EVAL_JOBS.value):
        if not _is_int(value) or value <= 0:
            raise ValueError(f"{k} must be a positive int")
    elif k == ConfigKey.CLASSIFY_KNN_SLACK.value:
        if not _is_number(value) or value < 0:
            raise ValueError("classify.knn_slack must be a non-negative number")
    elif k == ConfigKey.EVAL_IRIS_IMPOSTERS.value:
        if value not in ("first", "all"):
            raise ValueError("eval.iris_imposters must be 'first' or 'all'")
    elif k == ConfigKey.RECORDS_BACKEND.value:
        if value not in ("file", "memory"):
            raise ValueError("records.backend must be 'file' or 'memory'")
    elif k == ConfigKey.RECORDS_FILE_BUFFER_SIZE.value:
        if value is not None:
            if not _is_int(value) or value <= 0:
                raise ValueError("records.file.buffer_size must be a positive int")
    elif k == ConfigKey.RECORDS_FILE_PATH.value:
        if value is not None and not isinstance(value, (str, Path)):
            raise ValueError("records.file.path must be a str, Path, or None")


def set_option(key: str | Enum, value: Any) -> None:
    """Set a configuration option.

    Args:
        key: Option key as str or Enum
        value: Option value
    """
    k = _normalize_key(key)
    if k not in _DEFAULTS:
        raise KeyError(f"Unknown option: {k}")
    _validate(k, value)
    _options[k] = value


def get_option(key: str | Enum) -> Any:
    k = _normalize_key(key)
    if k not in _DEFAULTS:
        raise KeyError(f"Unknown option: {k}")
    return _options[k]


def resolve(key: str | Enum, value: Any) -> Any:
    """Return `value` unless it is None, in which case the current option."""
    return get_option(key) if value is None else value


def reset_option(key: str | Enum | None = None) -> None:
    """Reset one or all options.

    Args:
        key: specific key to reset, or None to reset all
    """
    if key is None:
        _options.clear()
        _options.update(_DEFAULTS)
        return
    k = _normalize_key(key)
    if k not in _DEFAULTS:
        raise KeyError(f"Unknown option: {k}")
    _options[k] = _DEFAULTS[k]


@contextmanager
def option_context(*pairs: tuple[str | Enum, Any]) -> Iterator[None]:
    """Temporarily set options within a context.

    Example:
        with option_context((ConfigKey.QUADTREE_ORDER, "rowmajor")):
            ...
    """
    originals: list[tuple[str, Any]] = []
    try:
        for key, value in pairs:
            k = _normalize_key(key)
            if k not in _DEFAULTS:
                raise KeyError(f"Unknown option: {k}")
            originals.append((k, _options[k]))
            set_option(k, value)
        yield
    finally:
        for k, v in originals:
            _options[k] = v


def _coerce(k: str, raw: str) -> Any:
    default = _DEFAULTS[k]
    if isinstance(default, bool):
        lowered = raw.lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"{k}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if raw.lower() == "none":
        return None
    return raw


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in _DEFAULTS:
            raise KeyError(f"line {lineno}: unknown option {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from e
    return values


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Apply every option of a config file and return what was set."""
    values = parse_config_text(Path(path).read_text(encoding="utf-8"))
    for key, value in values.items():
        set_option(key, value)
    logger.debug("loaded %d options from %s", len(values), path)
    return values


def configure_backend() -> Backend:
    """Create a decision-record backend from current options."""
    backend_kind: str = get_option(ConfigKey.RECORDS_BACKEND)
    backend: Backend
    if backend_kind == "memory":
        backend = InMemoryBackend()
    else:
        filepath = get_option(ConfigKey.RECORDS_FILE_PATH)
        buffer_size = get_option(ConfigKey.RECORDS_FILE_BUFFER_SIZE)
        backend = FileBackend(
            filepath=Path(filepath) if isinstance(filepath, str) else filepath,
            buffer_size=buffer_size,
        )
    return backend

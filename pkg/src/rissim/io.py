"""Deterministic, atomic file output with a provenance header."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

from . import __version__


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def meta_line(digest: str) -> str:
    return f"# rissim {__version__} config_sha256={digest}"


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def write_text_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows, digest: str | None = None) -> Path:
    lines = []
    if digest is not None:
        lines.append(meta_line(digest))
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return write_text_atomic(path, "\n".join(lines) + "\n")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, payload: dict, digest: str | None = None) -> Path:
    doc = {}
    if digest is not None:
        doc["_meta"] = {"tool": "rissim", "version": __version__, "config_sha256": digest}
    doc.update(payload)
    return write_text_atomic(path, json.dumps(_clean(doc), indent=2) + "\n")

"""Snapshot persistence.

A snapshot ``<name>`` is two files:

* ``<name>.meta``: UTF-8 ``key = value`` lines (format_version, n, l, t, h,
  step, alpha, gamma, epsilon, inhomogeneity).  Floats are written with
  ``repr`` so they read back exactly.
* ``<name>.dat``: little-endian complex128 (re, im pairs), row-major with
  the last axis fastest, exactly ``16 n^3`` bytes.

Real fields (first-order predictions) use the same header with
``dtype = float64`` and ``8 n^3`` bytes of little-endian doubles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

FORMAT_VERSION = 1

PathLike = Union[str, Path]


class SnapshotError(OSError):
    pass


@dataclass
class Snapshot:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.meta["n"])

    @property
    def l(self) -> float:
        return float(self.meta["l"])


def _stem(path: PathLike) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix in (".meta", ".dat") else p


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_snapshot(path: PathLike, values: np.ndarray, **meta) -> Path:
    """Write ``values`` (n^3 complex or real) and its header; returns the stem."""
    stem = _stem(path)
    values = np.asarray(values)
    if values.ndim != 3 or len(set(values.shape)) != 1:
        raise SnapshotError(f"snapshot must be an n^3 array, got shape {values.shape}")
    dtype = "<f8" if np.isrealobj(values) else "<c16"
    head = {"format_version": FORMAT_VERSION, "n": values.shape[0],
            "dtype": "float64" if dtype == "<f8" else "complex128"}
    head.update(meta)
    try:
        stem.parent.mkdir(parents=True, exist_ok=True)
        stem.with_suffix(".meta").write_text(
            "".join(f"{k} = {_fmt(v)}\n" for k, v in head.items()), encoding="utf-8")
        np.ascontiguousarray(values, dtype=dtype).tofile(stem.with_suffix(".dat"))
    except OSError as e:
        raise SnapshotError(f"cannot write snapshot {stem}: {e}") from e
    return stem


def _parse_value(raw: str):
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def read_meta(path: PathLike) -> dict:
    stem = _stem(path)
    try:
        text = stem.with_suffix(".meta").read_text(encoding="utf-8")
    except OSError as e:
        raise SnapshotError(f"cannot read snapshot header {stem}.meta: {e}") from e
    meta = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if "=" not in line:
            raise SnapshotError(f"{stem}.meta line {lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        meta[k] = v if k == "inhomogeneity" else _parse_value(v)
    if meta.get("format_version") != FORMAT_VERSION:
        raise SnapshotError(f"{stem}.meta: unsupported format_version {meta.get('format_version')!r}")
    if not isinstance(meta.get("n"), int) or meta["n"] <= 0:
        raise SnapshotError(f"{stem}.meta: missing or invalid n")
    return meta


def read_snapshot(path: PathLike) -> Snapshot:
    stem = _stem(path)
    meta = read_meta(stem)
    n = meta["n"]
    dtype = "<f8" if meta.get("dtype", "complex128") == "float64" else "<c16"
    itemsize = np.dtype(dtype).itemsize
    dat = stem.with_suffix(".dat")
    try:
        size = dat.stat().st_size
        if size != itemsize * n**3:
            raise SnapshotError(f"{dat}: {size} bytes, expected {itemsize * n**3} for n={n}")
        values = np.fromfile(dat, dtype=dtype).reshape(n, n, n)
    except SnapshotError:
        raise
    except OSError as e:
        raise SnapshotError(f"cannot read {dat}: {e}") from e
    return Snapshot(values.astype(np.complex128 if dtype == "<c16" else np.float64), meta)

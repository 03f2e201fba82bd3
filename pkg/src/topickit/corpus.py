"""Passage corpus loading, validation, and the binary embedding file format.

File formats:

* Passages: UTF-8 JSONL, one object per line with fields ``id`` (string,
  required), ``text`` (string, required), ``meta`` (string-to-string map,
  optional). Any other field is rejected.
* Embeddings (extension ``.drem``): magic bytes ``DREM``, little-endian
  u32 format version (=1), u8 normalized flag (0/1), u64 row count,
  u32 dimension, then rows*dim little-endian 32-bit floats, row-major,
  no padding.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"DREM"
FORMAT_VERSION = 1
UNIT_NORM_TOL = 1e-4

_HEADER = struct.Struct("<4sIBQI")  # magic, version, normalized, rows, dim
_PASSAGE_FIELDS = {"id", "text", "meta"}


@dataclass(frozen=True)
class PassageRecord:
    """One corpus passage: unique id, non-empty body, optional string metadata."""

    id: str
    text: str
    meta: dict[str, str] | None = None


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-major float32 embedding vectors, one row per passage."""

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise DataError(f"embedding data must be 2-D, got {self.data.ndim}-D")
        if self.data.dtype != np.float32:
            raise DataError(f"embedding data must be float32, got {self.data.dtype}")
        if self.dim < 1:
            raise DataError("embedding dim must be >= 1")
        if self.normalized and self.rows:
            norms = np.linalg.norm(self.data.astype(np.float64), axis=1)
            bad = np.nonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)[0]
            if bad.size:
                raise DataError(
                    f"matrix flagged normalized but row {int(bad[0])} "
                    f"has norm {norms[bad[0]]:.6g}"
                )

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class Corpus:
    """An immutable passage corpus bound to its embedding matrix (row i <-> passage i)."""

    passages: tuple[PassageRecord, ...]
    embeddings: EmbeddingMatrix


def load_passages(path: str | Path) -> list[PassageRecord]:
    """Read passage records from a JSONL file, preserving file order."""
    path = Path(path)
    records: list[PassageRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}: line {lineno}: expected a JSON object")
            unknown = set(obj) - _PASSAGE_FIELDS
            if unknown:
                raise DataError(
                    f"{path}: line {lineno}: unknown fields {sorted(unknown)}"
                )
            pid = obj.get("id")
            if not isinstance(pid, str) or not pid:
                raise DataError(f"{path}: line {lineno}: 'id' must be a non-empty string")
            if pid in seen:
                raise DataError(f"{path}: line {lineno}: duplicate id {pid!r}")
            text = obj.get("text")
            if not isinstance(text, str) or not text:
                raise DataError(f"{path}: line {lineno}: 'text' must be a non-empty string")
            meta = obj.get("meta")
            if meta is not None:
                if not isinstance(meta, dict) or not all(
                    isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
                ):
                    raise DataError(
                        f"{path}: line {lineno}: 'meta' must map strings to strings"
                    )
            seen.add(pid)
            records.append(PassageRecord(id=pid, text=text, meta=meta))
    return records


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an embedding matrix from the binary format, validating the header."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: bad magic bytes, not an embedding file")
    if len(raw) < _HEADER.size:
        raise DataError(
            f"{path}: truncated header: expected {_HEADER.size} bytes, found {len(raw)}"
        )
    _, version, flag, rows, dim = _HEADER.unpack_from(raw, 0)
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    if flag not in (0, 1):
        raise DataError(f"{path}: normalized flag must be 0 or 1, found {flag}")
    if dim == 0:
        raise DataError(f"{path}: dim must be >= 1")
    expected = rows * dim * 4
    payload = raw[_HEADER.size :]
    if len(payload) != expected:
        raise DataError(
            f"{path}: payload length mismatch: expected {expected} bytes "
            f"({rows} rows x {dim} dims), found {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(rows, dim)
    return EmbeddingMatrix(data=data, normalized=bool(flag))


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Write a matrix in the binary format; load_embeddings round-trips it bit-exactly."""
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, int(matrix.normalized), matrix.rows, matrix.dim
    )
    payload = np.ascontiguousarray(matrix.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def normalize_rows(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Return a copy with every row scaled to unit L2 norm."""
    data = matrix.data.astype(np.float64)
    norms = np.linalg.norm(data, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DataError(f"cannot normalize: row {int(zero[0])} has zero norm")
    unit = (data / norms[:, None]).astype(np.float32)
    return EmbeddingMatrix(data=unit, normalized=True)


def bind(passages: list[PassageRecord], matrix: EmbeddingMatrix) -> Corpus:
    """Pair passages with their embedding rows, enforcing count alignment."""
    if len(passages) != matrix.rows:
        raise DataError(
            f"passage count {len(passages)} does not match embedding rows {matrix.rows}"
        )
    return Corpus(passages=tuple(passages), embeddings=matrix)

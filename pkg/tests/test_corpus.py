"""Corpus loading, validation, and binary format round-trips."""

import json
import struct

import numpy as np
import pytest

from topickit import corpus
from topickit.errors import DataError


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class TestLoadPassages:
    def test_preserves_file_order(self, tmp_path):
        path = tmp_path / "p.jsonl"
        write_lines(path, [json.dumps({"id": i, "text": f"body {i}"}) for i in "abc"])
        records = corpus.load_passages(path)
        assert [r.id for r in records] == ["a", "b", "c"]
        assert records[1].text == "body b"

    def test_duplicate_id_reports_offender(self, tmp_path):
        path = tmp_path / "p.jsonl"
        write_lines(
            path,
            [
                json.dumps({"id": "a", "text": "one"}),
                json.dumps({"id": "b", "text": "two"}),
                json.dumps({"id": "a", "text": "three"}),
            ],
        )
        with pytest.raises(DataError, match=r"line 3.*'a'"):
            corpus.load_passages(path)

    def test_empty_file_gives_empty_list(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text("")
        assert corpus.load_passages(path) == []

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "p.jsonl"
        write_lines(path, [json.dumps({"id": "a", "text": "x"}), "{not json"])
        with pytest.raises(DataError, match="line 2"):
            corpus.load_passages(path)

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        write_lines(path, [json.dumps({"id": "a", "text": "x", "extra": 1})])
        with pytest.raises(DataError, match="extra"):
            corpus.load_passages(path)

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        write_lines(path, [json.dumps({"id": "a", "text": ""})])
        with pytest.raises(DataError, match="text"):
            corpus.load_passages(path)

    def test_meta_round_trips_and_is_validated(self, tmp_path):
        path = tmp_path / "p.jsonl"
        write_lines(path, [json.dumps({"id": "a", "text": "x", "meta": {"lang": "en"}})])
        assert corpus.load_passages(path)[0].meta == {"lang": "en"}
        write_lines(path, [json.dumps({"id": "a", "text": "x", "meta": {"n": 3}})])
        with pytest.raises(DataError, match="meta"):
            corpus.load_passages(path)


class TestEmbeddingFile:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(7)
        for rows, dim in [(2, 3), (1, 1), (10, 17), (0, 4)]:
            matrix = corpus.EmbeddingMatrix(
                rng.normal(size=(rows, dim)).astype(np.float32)
            )
            path = tmp_path / f"m{rows}x{dim}.drem"
            corpus.write_embeddings(matrix, path)
            loaded = corpus.load_embeddings(path)
            assert loaded.rows == rows and loaded.dim == dim
            assert loaded.normalized == matrix.normalized
            assert loaded.data.tobytes() == matrix.data.tobytes()

    def test_round_trip_preserves_normalized_flag(self, tmp_path):
        matrix = corpus.normalize_rows(
            corpus.EmbeddingMatrix(np.array([[3.0, 4.0]], dtype=np.float32))
        )
        path = tmp_path / "n.drem"
        corpus.write_embeddings(matrix, path)
        assert corpus.load_embeddings(path).normalized is True

    def test_header_and_payload_sizes(self, tmp_path):
        matrix = corpus.EmbeddingMatrix(np.zeros((2, 3), dtype=np.float32))
        path = tmp_path / "m.drem"
        corpus.write_embeddings(matrix, path)
        raw = path.read_bytes()
        assert raw[:4] == b"DREM"
        assert len(raw) == 21 + 2 * 3 * 4

    def test_truncated_payload_reports_byte_counts(self, tmp_path):
        matrix = corpus.EmbeddingMatrix(np.zeros((2, 3), dtype=np.float32))
        path = tmp_path / "m.drem"
        corpus.write_embeddings(matrix, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(DataError, match="expected 24 bytes.*found 20"):
            corpus.load_embeddings(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.drem"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(DataError, match="magic"):
            corpus.load_embeddings(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "m.drem"
        path.write_bytes(struct.pack("<4sIBQI", b"DREM", 9, 0, 0, 1))
        with pytest.raises(DataError, match="version 9"):
            corpus.load_embeddings(path)

    def test_zero_dim_rejected(self, tmp_path):
        path = tmp_path / "m.drem"
        path.write_bytes(struct.pack("<4sIBQI", b"DREM", 1, 0, 0, 0))
        with pytest.raises(DataError, match="dim"):
            corpus.load_embeddings(path)

    def test_normalized_flag_is_checked_against_rows(self, tmp_path):
        payload = np.array([[3.0, 4.0]], dtype="<f4").tobytes()
        path = tmp_path / "m.drem"
        path.write_bytes(struct.pack("<4sIBQI", b"DREM", 1, 1, 1, 2) + payload)
        with pytest.raises(DataError, match="normalized"):
            corpus.load_embeddings(path)

    def test_unwritable_path_raises(self, tmp_path):
        matrix = corpus.EmbeddingMatrix(np.zeros((1, 1), dtype=np.float32))
        with pytest.raises(OSError):
            corpus.write_embeddings(matrix, tmp_path / "missing" / "m.drem")


class TestNormalizeRows:
    def test_three_four_five(self):
        matrix = corpus.EmbeddingMatrix(np.array([[3.0, 4.0]], dtype=np.float32))
        unit = corpus.normalize_rows(matrix)
        assert unit.normalized is True
        np.testing.assert_allclose(unit.data[0], [0.6, 0.8], atol=1e-7)

    def test_idempotent_within_tolerance(self):
        rng = np.random.default_rng(3)
        matrix = corpus.EmbeddingMatrix(rng.normal(size=(20, 5)).astype(np.float32))
        once = corpus.normalize_rows(matrix)
        twice = corpus.normalize_rows(once)
        np.testing.assert_allclose(twice.data, once.data, atol=1e-7)

    def test_zero_norm_row_reports_index(self):
        matrix = corpus.EmbeddingMatrix(
            np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.float32)
        )
        with pytest.raises(DataError, match="row 1"):
            corpus.normalize_rows(matrix)


class TestBind:
    def test_counts_must_match(self):
        records = [corpus.PassageRecord(id=f"p{i}", text="t") for i in range(5)]
        good = corpus.EmbeddingMatrix(np.zeros((5, 128), dtype=np.float32))
        assert len(corpus.bind(records, good).passages) == 5
        bad = corpus.EmbeddingMatrix(np.zeros((4, 128), dtype=np.float32))
        with pytest.raises(DataError, match="5.*4"):
            corpus.bind(records, bad)

    def test_empty_collection(self):
        empty = corpus.EmbeddingMatrix(np.zeros((0, 128), dtype=np.float32))
        assert corpus.bind([], empty).passages == ()

import json
import math

import numpy as np
import pytest
from conftest import random_sparse_vectors, random_unit_vectors

from cosbound import (
    ChecksumMismatch,
    Dataset,
    DataFormatError,
    PivotTable,
    VpTree,
    dataset_checksum,
    index_to_jsonable,
    laesa_build,
    laesa_knn_query,
    linear_scan,
    load_index,
    save_index,
    vp_build,
    vp_knn_query,
)


@pytest.fixture(scope="module")
def dense_ds():
    rng = np.random.default_rng(3)
    return Dataset(random_unit_vectors(60, 5, rng))


@pytest.fixture(scope="module")
def sparse_ds():
    rng = np.random.default_rng(4)
    return Dataset(random_sparse_vectors(40, 30, 4, rng))


class TestChecksum:
    def test_deterministic(self, dense_ds):
        assert dataset_checksum(dense_ds) == dataset_checksum(dense_ds)

    def test_sensitive_to_any_component(self, dense_ds):
        rows = [v.inner.values.copy() for v in dense_ds.vectors]
        rows[7][2] = np.nextafter(rows[7][2], 2.0)
        from cosbound import DenseVector, normalize

        other = Dataset([normalize(DenseVector(r)) for r in rows])
        assert dataset_checksum(other) != dataset_checksum(dense_ds)

    def test_sensitive_to_order(self, dense_ds):
        shuffled = Dataset(list(reversed(dense_ds.vectors)))
        assert dataset_checksum(shuffled) != dataset_checksum(dense_ds)


class TestRoundTrip:
    def test_vp_dense(self, dense_ds, tmp_path):
        tree = vp_build(dense_ds, leaf_capacity=4, seed=1)
        p = tmp_path / "vp.json"
        save_index(p, tree)
        loaded, ds2 = load_index(p)
        assert isinstance(loaded, VpTree)
        assert index_to_jsonable(loaded) == index_to_jsonable(tree)
        q = dense_ds.vectors[5]
        assert vp_knn_query(loaded, q, 7) == vp_knn_query(tree, q, 7)
        assert linear_scan(ds2, q, k=7) == linear_scan(dense_ds, q, k=7)

    def test_vp_sparse(self, sparse_ds, tmp_path):
        tree = vp_build(sparse_ds, leaf_capacity=4, seed=1)
        p = tmp_path / "vp.json"
        save_index(p, tree)
        loaded, ds2 = load_index(p)
        q = sparse_ds.vectors[3]
        assert vp_knn_query(loaded, q, 5) == vp_knn_query(tree, q, 5)

    def test_laesa_dense(self, dense_ds, tmp_path):
        pt = laesa_build(dense_ds, 6, seed=2)
        p = tmp_path / "laesa.json"
        save_index(p, pt, dense_ds)
        loaded, ds2 = load_index(p)
        assert isinstance(loaded, PivotTable)
        assert loaded.pivot_ids == pt.pivot_ids
        assert np.array_equal(loaded.table, pt.table)
        q = dense_ds.vectors[9]
        assert laesa_knn_query(loaded, ds2, q, 4) == laesa_knn_query(pt, dense_ds, q, 4)

    def test_laesa_requires_dataset(self, dense_ds):
        pt = laesa_build(dense_ds, 6, seed=2)
        with pytest.raises(ValueError):
            index_to_jsonable(pt)

    def test_vectors_survive_bit_exact(self, dense_ds, tmp_path):
        tree = vp_build(dense_ds, leaf_capacity=4, seed=1)
        p = tmp_path / "vp.json"
        save_index(p, tree)
        _, ds2 = load_index(p)
        for a, b in zip(dense_ds.vectors, ds2.vectors):
            assert np.array_equal(a.inner.values, b.inner.values)


class TestTampering:
    def _saved(self, dense_ds, tmp_path):
        tree = vp_build(dense_ds, leaf_capacity=4, seed=1)
        p = tmp_path / "vp.json"
        save_index(p, tree)
        return p

    def test_vector_edit_detected(self, dense_ds, tmp_path):
        p = self._saved(dense_ds, tmp_path)
        obj = json.loads(p.read_text())
        # one-ulp nudge: still a valid unit vector, different checksum
        obj["vectors"][0][0] = math.nextafter(obj["vectors"][0][0], 2.0)
        p.write_text(json.dumps(obj))
        with pytest.raises(ChecksumMismatch):
            load_index(p)

    def test_recorded_checksum_edit_detected(self, dense_ds, tmp_path):
        p = self._saved(dense_ds, tmp_path)
        obj = json.loads(p.read_text())
        obj["checksum"] = "0" * 64
        p.write_text(json.dumps(obj))
        with pytest.raises(ChecksumMismatch):
            load_index(p)

    def test_bad_version(self, dense_ds, tmp_path):
        p = self._saved(dense_ds, tmp_path)
        obj = json.loads(p.read_text())
        obj["format_version"] = 99
        p.write_text(json.dumps(obj))
        with pytest.raises(DataFormatError, match="version"):
            load_index(p)

    def test_unknown_kind(self, dense_ds, tmp_path):
        p = self._saved(dense_ds, tmp_path)
        obj = json.loads(p.read_text())
        obj["kind"] = "kd"
        p.write_text(json.dumps(obj))
        with pytest.raises(DataFormatError):
            load_index(p)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(DataFormatError, match="JSON"):
            load_index(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_index(tmp_path / "absent.json")

    def test_truncated_structure(self, dense_ds, tmp_path):
        p = self._saved(dense_ds, tmp_path)
        obj = json.loads(p.read_text())
        del obj["tree"]
        p.write_text(json.dumps(obj))
        with pytest.raises(DataFormatError):
            load_index(p)

"""Index persistence: versioned JSON with a dataset checksum.

The file embeds the normalized vectors so a saved index is self-contained.
Floats are serialized through json's shortest round-trip repr, so reloaded
values are bit-exact. Loading recomputes the dataset checksum and refuses
files whose vectors were altered.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Union

import numpy as np

from .bounds import SimInterval
from .errors import ChecksumMismatch, DataFormatError
from .index import Dataset, PivotTable, VpNode, VpTree
from .vectors import DenseVector, SparseVector, UnitVector

FORMAT_VERSION = 1


def _canonical_lines(ds: Dataset):
    for v in ds.vectors:
        inner = v.inner
        if isinstance(inner, SparseVector):
            yield "s:" + " ".join(f"{i}:{x!r}" for i, x in zip(inner.indices.tolist(), inner.values.tolist()))
        else:
            yield "d:" + ",".join(repr(x) for x in inner.values.tolist())


def dataset_checksum(ds: Dataset) -> str:
    """sha256 over a canonical text form of the normalized vectors."""
    h = hashlib.sha256()
    for line in _canonical_lines(ds):
        h.update(line.encode("ascii"))
        h.update(b"\n")
    return h.hexdigest()


def _vectors_to_jsonable(ds: Dataset) -> list:
    out = []
    for v in ds.vectors:
        inner = v.inner
        if isinstance(inner, SparseVector):
            out.append([inner.indices.tolist(), inner.values.tolist()])
        else:
            out.append(inner.values.tolist())
    return out


def _vectors_from_jsonable(rows: list, sparse: bool) -> list[UnitVector]:
    vectors = []
    for row in rows:
        if sparse:
            vectors.append(UnitVector(SparseVector(zip(row[0], row[1]))))
        else:
            vectors.append(UnitVector(DenseVector(row)))
    return vectors


def _node_to_jsonable(node: VpNode) -> dict:
    if node.is_leaf:
        return {"leaf": list(node.leaf_ids), "size": node.size}
    return {
        "routing": node.routing_id,
        "size": node.size,
        "children": [[iv.lo, iv.hi, _node_to_jsonable(child)] for iv, child in node.children],
    }


def _node_from_jsonable(obj: dict) -> VpNode:
    if "leaf" in obj:
        return VpNode(leaf_ids=[int(i) for i in obj["leaf"]], size=int(obj["size"]))
    children = [
        (SimInterval(lo, hi), _node_from_jsonable(child))
        for lo, hi, child in obj["children"]
    ]
    return VpNode(routing_id=int(obj["routing"]), children=children, size=int(obj["size"]))


def index_to_jsonable(index: Union[VpTree, PivotTable], dataset: Dataset | None = None) -> dict:
    """Plain-data form of an index plus its dataset, ready for json.dump."""
    if isinstance(index, VpTree):
        ds = index.dataset
        body = {
            "kind": "vp",
            "config": {"leaf_capacity": index.leaf_capacity, "seed": index.seed},
            "tree": _node_to_jsonable(index.root),
        }
    elif isinstance(index, PivotTable):
        if dataset is None:
            raise ValueError("a PivotTable does not carry its dataset; pass dataset=")
        ds = dataset
        body = {
            "kind": "laesa",
            "config": {"pivots": len(index.pivot_ids), "seed": index.seed},
            "pivot_ids": list(index.pivot_ids),
            "table": index.table.tolist(),
        }
    else:
        raise TypeError(f"cannot persist {type(index).__name__}")
    body.update(
        format_version=FORMAT_VERSION,
        data_format="sparse" if ds.is_sparse else "dense",
        checksum=dataset_checksum(ds),
        vectors=_vectors_to_jsonable(ds),
    )
    return body


def save_index(path: Union[str, Path], index: Union[VpTree, PivotTable], dataset: Dataset | None = None) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(index_to_jsonable(index, dataset), f, sort_keys=True)
        f.write("\n")


def load_index(path: Union[str, Path]) -> tuple[Union[VpTree, PivotTable], Dataset]:
    """Load an index file, verifying the dataset checksum."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
    except OSError as e:
        raise DataFormatError(f"{path}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from None
    try:
        version = obj["format_version"]
        if version != FORMAT_VERSION:
            raise DataFormatError(f"{path}: unsupported format version {version}")
        sparse = obj["data_format"] == "sparse"
        vectors = _vectors_from_jsonable(obj["vectors"], sparse)
        ds = Dataset(vectors)
        actual = dataset_checksum(ds)
        if actual != obj["checksum"]:
            raise ChecksumMismatch(f"{path}: dataset checksum {actual} != recorded {obj['checksum']}")
        if obj["kind"] == "vp":
            cfg = obj["config"]
            tree = VpTree(
                root=_node_from_jsonable(obj["tree"]),
                dataset=ds,
                leaf_capacity=int(cfg["leaf_capacity"]),
                seed=int(cfg["seed"]),
            )
            return tree, ds
        if obj["kind"] == "laesa":
            pt = PivotTable(
                pivot_ids=[int(p) for p in obj["pivot_ids"]],
                table=np.array(obj["table"], dtype=np.float64),
                seed=int(obj["config"]["seed"]),
            )
            return pt, ds
        raise DataFormatError(f"{path}: unknown index kind {obj['kind']!r}")
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise DataFormatError(f"{path}: malformed index file: {e}") from None

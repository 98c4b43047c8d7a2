"""Shared test helpers."""

import math

import numpy as np

from cosbound import DenseVector, SparseVector, UnitVector, normalize


def planar_unit(deg: float) -> UnitVector:
    rad = math.radians(deg)
    return normalize(DenseVector([math.cos(rad), math.sin(rad)]))


def planar_dataset(degrees=(0.0, 30.0, 60.0, 90.0)) -> list[UnitVector]:
    return [planar_unit(d) for d in degrees]


def random_unit_vectors(n: int, dim: int, rng: np.random.Generator) -> list[UnitVector]:
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return [UnitVector(DenseVector(row)) for row in g]


def random_sparse_vectors(n: int, dim: int, nnz: int, rng: np.random.Generator) -> list[UnitVector]:
    out = []
    for _ in range(n):
        idx = np.sort(rng.choice(dim, size=nnz, replace=False))
        val = rng.standard_normal(nnz)
        out.append(normalize(SparseVector(zip(idx.tolist(), val.tolist()))))
    return out

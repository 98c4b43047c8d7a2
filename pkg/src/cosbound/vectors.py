"""Vector representations and cosine similarity.

Dense and sparse vectors with validation, L2 normalization, similarity
computation (two-cursor merge for sparse inputs), and conversions from
similarity to distance. Similarities are plain floats in [-1, 1]; raw
cosine values are clamped at the point where they become similarities,
because dot products of near-parallel unit vectors can drift past 1 by a
few ulps and poison downstream arccos calls.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NonFinite, ZeroVector


def clamp_similarity(value: float) -> float:
    """Clamp a raw cosine value into [-1, 1]. NaN propagates unchanged."""
    if value > 1.0:
        return 1.0
    if value < -1.0:
        return -1.0
    return float(value)


class DenseVector:
    """An immutable 1-D array of finite components, dimensionality >= 1."""

    __slots__ = ("values",)

    def __init__(self, values: Union[Sequence[float], np.ndarray]):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a dense vector needs one axis and at least one component")
        if not np.isfinite(arr).all():
            raise NonFinite("dense vector has NaN or infinite components")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("DenseVector is immutable")

    def __len__(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"DenseVector({self.values.tolist()!r})"


class SparseVector:
    """Sorted (index, value) pairs; indices strictly ascending, values non-zero.

    An empty entry list is allowed and denotes the zero vector; it cannot be
    normalized, only represented.
    """

    __slots__ = ("indices", "values")

    def __init__(self, entries: Iterable[tuple[int, float]]):
        pairs = list(entries)
        idx = np.array([p[0] for p in pairs], dtype=np.int64)
        val = np.array([p[1] for p in pairs], dtype=np.float64)
        if idx.size and (idx[0] < 0 or np.any(np.diff(idx) <= 0)):
            raise ValueError("sparse indices must be non-negative and strictly ascending")
        if not np.isfinite(val).all():
            raise NonFinite("sparse vector has NaN or infinite values")
        if np.any(val == 0.0):
            raise ValueError("sparse vectors must not store explicit zeros")
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    def __setattr__(self, name, value):
        raise AttributeError("SparseVector is immutable")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def dim(self) -> int:
        """Smallest dense dimensionality that can hold this vector."""
        return int(self.indices[-1]) + 1 if len(self) else 0

    def to_dense(self, dim: int | None = None) -> DenseVector:
        d = self.dim if dim is None else dim
        if d < self.dim:
            raise DimensionMismatch(f"dim {d} cannot hold index {self.dim - 1}")
        out = np.zeros(max(d, 1))
        if len(self):
            out[self.indices] = self.values
        return DenseVector(out)

    def __repr__(self) -> str:
        pairs = list(zip(self.indices.tolist(), self.values.tolist()))
        return f"SparseVector({pairs!r})"


RawVector = Union[DenseVector, SparseVector]

_UNIT_NORM_TOL = 1e-9


class UnitVector:
    """A dense or sparse vector certified to have L2 norm 1 within 1e-9."""

    __slots__ = ("inner",)

    def __init__(self, inner: RawVector):
        if not isinstance(inner, (DenseVector, SparseVector)):
            raise TypeError(f"expected DenseVector or SparseVector, got {type(inner).__name__}")
        nrm = float(np.linalg.norm(inner.values))
        if abs(nrm - 1.0) > _UNIT_NORM_TOL:
            raise ValueError(f"not a unit vector: |norm - 1| = {abs(nrm - 1.0):.3e}")
        object.__setattr__(self, "inner", inner)

    def __setattr__(self, name, value):
        raise AttributeError("UnitVector is immutable")

    @property
    def is_sparse(self) -> bool:
        return isinstance(self.inner, SparseVector)

    def __repr__(self) -> str:
        return f"UnitVector({self.inner!r})"


def normalize(v: Union[RawVector, UnitVector]) -> UnitVector:
    """Scale a vector to unit L2 norm.

    Components are pre-scaled by the max magnitude so that the norm cannot
    overflow for extreme inputs. Already-certified unit vectors pass through.
    """
    if isinstance(v, UnitVector):
        return v
    if not isinstance(v, (DenseVector, SparseVector)):
        raise TypeError(f"expected a vector, got {type(v).__name__}")
    vals = v.values
    if vals.size == 0:
        raise ZeroVector("cannot normalize the zero vector")
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    scaled = vals / scale
    out = scaled / float(np.linalg.norm(scaled))
    if isinstance(v, DenseVector):
        return UnitVector(DenseVector(out))
    # pre-scaling can underflow extreme tiny-vs-huge mixes to exact zero;
    # dropping those entries keeps the no-explicit-zeros invariant
    keep = out != 0.0
    return UnitVector(SparseVector(zip(v.indices[keep].tolist(), out[keep].tolist())))


def _merge_dot(x: SparseVector, y: SparseVector) -> float:
    """Dot product over the index intersection via a two-cursor merge."""
    xi = x.indices
    yi = y.indices
    xv = x.values
    yv = y.values
    i = j = 0
    nx, ny = len(xi), len(yi)
    total = 0.0
    while i < nx and j < ny:
        a, b = xi[i], yi[j]
        if a == b:
            total += float(xv[i]) * float(yv[j])
            i += 1
            j += 1
        elif a < b:
            i += 1
        else:
            j += 1
    return total


def cosine_similarity(x: Union[RawVector, UnitVector], y: Union[RawVector, UnitVector]) -> float:
    """Cosine of the angle between x and y, clamped into [-1, 1].

    Both operands must be of the same representation family. Unit vectors
    skip normalization; raw vectors are normalized on the fly, which raises
    ZeroVector for zero input. Dense operands must have equal length.
    """
    xu = normalize(x)
    yu = normalize(y)
    xi, yi = xu.inner, yu.inner
    if isinstance(xi, DenseVector) != isinstance(yi, DenseVector):
        raise DimensionMismatch("cannot mix dense and sparse operands")
    if isinstance(xi, DenseVector):
        if len(xi) != len(yi):
            raise DimensionMismatch(f"dense lengths differ: {len(xi)} vs {len(yi)}")
        return clamp_similarity(float(xi.values @ yi.values))
    return clamp_similarity(_merge_dot(xi, yi))


class DistanceKind(Enum):
    COSINE = "cosine"
    SQRT_COSINE = "sqrt_cosine"
    ARCCOS = "arccos"


def similarity_to_distance(kind: DistanceKind, s: float) -> float:
    """Convert a similarity to a distance; all kinds decrease monotonically in s.

    The input is clamped into [-1, 1] first, matching how similarities are
    constructed everywhere else.
    """
    s = clamp_similarity(float(s))
    if kind is DistanceKind.COSINE:
        return 1.0 - s
    if kind is DistanceKind.SQRT_COSINE:
        return math.sqrt(2.0 - 2.0 * s)
    if kind is DistanceKind.ARCCOS:
        return math.acos(s)
    raise TypeError(f"unknown distance kind: {kind!r}")

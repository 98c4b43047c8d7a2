"""Transitive bounds on cosine similarity.

Given s1 = sim(x, z) and s2 = sim(z, y), each lower-bound kind guarantees
lower_bound(kind, s1, s2) <= sim(x, y), and upper_bound(s1, s2) >= sim(x, y),
for every consistent vector triple. Bound functions accept scalars or numpy
arrays (broadcast together) and return raw, unclamped values: the weaker
formulas legitimately fall below -1 (the Euclidean form reaches -7 at
(-1, -1)) and analysis code needs those raw values. Callers that compare
against similarity thresholds clamp at the point of use;
best_case_similarity and worst_case_similarity already do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import DomainError
from .vectors import clamp_similarity


class BoundKind(Enum):
    EUCLIDEAN = "euclidean"
    EUCL_LB = "eucl_lb"
    ARCCOS = "arccos"
    MULT = "mult"
    MULT_VARIANT = "mult_variant"
    MULT_LB1 = "mult_lb1"
    MULT_LB2 = "mult_lb2"


ArrayOrFloat = Union[float, np.ndarray]


def _checked(s: ArrayOrFloat, name: str) -> np.ndarray:
    # floating dtypes pass through unchanged so extended-precision arrays
    # stay extended; scalars and integer arrays become float64
    arr = np.asarray(s)
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float64)
    # NaN fails both comparisons, so it lands here too
    if not np.all((arr >= -1.0) & (arr <= 1.0)):
        raise DomainError(f"{name} outside [-1, 1]")
    return arr


def _finish(out: np.ndarray) -> ArrayOrFloat:
    return float(out) if out.ndim == 0 else out


def lower_bound(kind: BoundKind, s1: ArrayOrFloat, s2: ArrayOrFloat) -> ArrayOrFloat:
    """Raw lower bound on sim(x, y) from s1 = sim(x, z) and s2 = sim(z, y).

    MULT and ARCCOS agree to float precision; ARCCOS goes through trig while
    MULT is closed-form. MULT_VARIANT is MULT with the radicand factored as
    (1+s)(1-s) per operand; the factors are grouped per operand so the result
    is exactly symmetric in s1, s2.
    """
    a = _checked(s1, "s1")
    b = _checked(s2, "s2")
    if kind is BoundKind.EUCLIDEAN:
        out = a + b - 1.0 - 2.0 * np.sqrt((1.0 - a) * (1.0 - b))
    elif kind is BoundKind.EUCL_LB:
        out = a + b + 2.0 * np.minimum(a, b) - 3.0
    elif kind is BoundKind.ARCCOS:
        # inputs are validated, but clip anyway so float drift can never
        # push arccos out of its domain
        out = np.cos(np.arccos(np.clip(a, -1.0, 1.0)) + np.arccos(np.clip(b, -1.0, 1.0)))
    elif kind is BoundKind.MULT:
        out = a * b - np.sqrt((1.0 - a * a) * (1.0 - b * b))
    elif kind is BoundKind.MULT_VARIANT:
        u = (1.0 + a) * (1.0 - a)
        v = (1.0 + b) * (1.0 - b)
        out = a * b - np.sqrt(u * v)
    elif kind is BoundKind.MULT_LB1:
        out = a * b + np.minimum(a * a, b * b) - 1.0
    elif kind is BoundKind.MULT_LB2:
        out = 2.0 * a * b - np.abs(a - b) - 1.0
    else:
        raise TypeError(f"unknown bound kind: {kind!r}")
    return _finish(out)


def upper_bound(s1: ArrayOrFloat, s2: ArrayOrFloat) -> ArrayOrFloat:
    """Upper bound s1*s2 + sqrt((1-s1^2)(1-s2^2)) = cos(arccos s1 - arccos s2)."""
    a = _checked(s1, "s1")
    b = _checked(s2, "s2")
    return _finish(a * b + np.sqrt((1.0 - a * a) * (1.0 - b * b)))


@dataclass(frozen=True)
class SimInterval:
    """Closed range [lo, hi] of similarities of a point set to a routing object.

    Endpoints are clamped into [-1, 1] at construction.
    """

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("interval endpoints must be finite")
        lo = clamp_similarity(lo)
        hi = clamp_similarity(hi)
        if lo > hi:
            raise DomainError(f"invalid interval: lo {lo} > hi {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, s: float) -> bool:
        return self.lo <= s <= self.hi


def _checked_scalar(s: float, name: str) -> float:
    s = float(s)
    if not (-1.0 <= s <= 1.0):
        raise DomainError(f"{name} outside [-1, 1]")
    return s


def best_case_similarity(s_qz: float, iv: SimInterval) -> float:
    """Highest similarity any point y with sim(z, y) in iv can have to q.

    Equals 1 when s_qz lies inside the interval (the query's angle to z is
    within the band, so some admissible y can coincide with q); otherwise the
    upper bound against the nearest endpoint. Trig-free; result in [-1, 1].
    """
    s = _checked_scalar(s_qz, "s_qz")
    if iv.lo <= s <= iv.hi:
        return 1.0
    edge = iv.hi if s > iv.hi else iv.lo
    return clamp_similarity(upper_bound(s, edge))


def worst_case_similarity(s_qz: float, iv: SimInterval) -> float:
    """Lowest similarity any point y with sim(z, y) in iv can have to q.

    Equals -1 when -s_qz lies inside the interval (the angle sum can reach
    pi); otherwise the smaller of the two endpoint lower bounds. Trig-free;
    result in [-1, 1].
    """
    s = _checked_scalar(s_qz, "s_qz")
    if iv.lo <= -s <= iv.hi:
        return -1.0
    at_lo = lower_bound(BoundKind.MULT, s, iv.lo)
    at_hi = lower_bound(BoundKind.MULT, s, iv.hi)
    return clamp_similarity(min(at_lo, at_hi))

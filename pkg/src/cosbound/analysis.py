"""Grid evaluation of the bound formulas: surfaces, averages, stability.

All reductions run in fixed (row-major) order over materialized grids, so
reports are reproducible run to run.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np

from .bounds import BoundKind, lower_bound

# The lattice inequalities are exact in real arithmetic; evaluated in floats
# they can be off by an ulp where two chains touch, so a comparison gets this
# much slack before it counts as a violation.
ORDERING_SLACK = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Inclusive square grid over (s1, s2)."""

    lo: float = -1.0
    hi: float = 1.0
    steps: int = 2001

    def __post_init__(self):
        if not (-1.0 <= self.lo < self.hi <= 1.0):
            raise ValueError(f"grid range [{self.lo}, {self.hi}] must satisfy -1 <= lo < hi <= 1")
        if self.steps < 2:
            raise ValueError(f"grid needs at least 2 steps, got {self.steps}")

    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


def surface(kind: BoundKind, spec: GridSpec) -> np.ndarray:
    """Matrix of raw bound values; cell (i, j) = lower_bound(kind, axis[i], axis[j])."""
    a = spec.axis()
    return lower_bound(kind, a[:, None], a[None, :])


def difference_surface(kind_a: BoundKind, kind_b: BoundKind, spec: GridSpec) -> np.ndarray:
    """Cell-wise difference of the effective (clamped) bounds.

    A bound below -1 prunes exactly as hard as -1, so each surface is clamped
    into [-1, 1] before subtracting; otherwise the comparison is dominated by
    the regions where the weaker formulas dive far below -1.
    """
    a = np.clip(surface(kind_a, spec), -1.0, 1.0)
    b = np.clip(surface(kind_b, spec), -1.0, 1.0)
    return a - b


def ordering_violation_count(s1, s2) -> int:
    """Violations of the lower-bound ordering lattice on the given inputs.

    Checks EuclLB <= Euclidean <= Mult and EuclLB <= MultLB2 <= MultLB1
    <= Mult, each with ORDERING_SLACK of float tolerance.
    """
    e = lower_bound(BoundKind.EUCLIDEAN, s1, s2)
    el = lower_bound(BoundKind.EUCL_LB, s1, s2)
    m = lower_bound(BoundKind.MULT, s1, s2)
    m1 = lower_bound(BoundKind.MULT_LB1, s1, s2)
    m2 = lower_bound(BoundKind.MULT_LB2, s1, s2)
    total = 0
    for low, high in ((el, e), (e, m), (el, m2), (m2, m1), (m1, m)):
        total += int(np.count_nonzero(np.asarray(low) > np.asarray(high) + ORDERING_SLACK))
    return total


@dataclass(frozen=True)
class GridReport:
    """Average bound quality over the pruning-relevant region, plus checks.

    Means are taken over grid cells with s1 >= 0, s2 >= 0, and a non-negative
    tight bound; that is the regime where a lower bound can prune at all.
    arccos_gain is arccos_mean / euclidean_mean - 1.
    """

    spec: GridSpec
    euclidean_mean: float
    arccos_mean: float
    arccos_gain: float
    max_abs_mult_arccos: float
    ordering_violations: int


def average_report(spec: GridSpec = GridSpec()) -> GridReport:
    a = spec.axis()
    s1 = a[:, None]
    s2 = a[None, :]
    euclid = lower_bound(BoundKind.EUCLIDEAN, s1, s2)
    arccos = lower_bound(BoundKind.ARCCOS, s1, s2)
    mult = lower_bound(BoundKind.MULT, s1, s2)
    mask = (s1 >= 0.0) & (s2 >= 0.0) & (arccos >= 0.0)
    euclidean_mean = float(euclid[mask].mean())
    arccos_mean = float(arccos[mask].mean())
    return GridReport(
        spec=spec,
        euclidean_mean=euclidean_mean,
        arccos_mean=arccos_mean,
        arccos_gain=arccos_mean / euclidean_mean - 1.0,
        max_abs_mult_arccos=float(np.abs(mult - arccos).max()),
        ordering_violations=ordering_violation_count(s1, s2),
    )


@dataclass(frozen=True)
class StabilityReport:
    """Numerical agreement of the closed-form bounds with the trig form."""

    spec: GridSpec
    max_abs_mult_arccos: float
    max_abs_variant_mult: float


def stability_report(spec: GridSpec = GridSpec()) -> StabilityReport:
    a = spec.axis()
    s1 = a[:, None]
    s2 = a[None, :]
    arccos = lower_bound(BoundKind.ARCCOS, s1, s2)
    mult = lower_bound(BoundKind.MULT, s1, s2)
    variant = lower_bound(BoundKind.MULT_VARIANT, s1, s2)
    return StabilityReport(
        spec=spec,
        max_abs_mult_arccos=float(np.abs(mult - arccos).max()),
        max_abs_variant_mult=float(np.abs(variant - mult).max()),
    )


# ---------------------------------------------------------------------------
# CSV emission; floats go through repr so parsing an output reproduces the
# values bit-exactly (and always carries more than 15 significant digits).


def _open_for(target: Union[str, Path, IO[str]], mode: str):
    if hasattr(target, "write") or hasattr(target, "read"):
        return target, False
    return open(target, mode, encoding="ascii", newline=""), True


def write_surface_csv(target: Union[str, Path, IO[str]], spec: GridSpec, matrix: np.ndarray) -> None:
    f, owned = _open_for(target, "w")
    try:
        a = spec.axis()
        f.write("s1,s2,value\n")
        for i in range(spec.steps):
            s1 = repr(float(a[i]))
            row = matrix[i]
            for j in range(spec.steps):
                f.write(f"{s1},{float(a[j])!r},{float(row[j])!r}\n")
    finally:
        if owned:
            f.close()


def read_surface_csv(target: Union[str, Path, IO[str]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a surface CSV back into (s1, s2, value) columns."""
    f, owned = _open_for(target, "r")
    try:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["s1", "s2", "value"]:
            raise ValueError(f"unexpected surface header: {header}")
        cols = ([], [], [])
        for row in reader:
            for c, x in zip(cols, row):
                c.append(float(x))
        return tuple(np.array(c) for c in cols)
    finally:
        if owned:
            f.close()


def write_report_csv(target: Union[str, Path, IO[str]], pairs: list[tuple[str, object]]) -> None:
    """key,value rows; floats via repr, everything else via str."""
    f, owned = _open_for(target, "w")
    try:
        f.write("key,value\n")
        for key, value in pairs:
            text = repr(float(value)) if isinstance(value, float) else str(value)
            f.write(f"{key},{text}\n")
    finally:
        if owned:
            f.close()

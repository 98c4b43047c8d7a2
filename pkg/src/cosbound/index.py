"""Exact cosine-similarity search: VP tree, pivot-table filter, linear scan.

Every query path returns results sorted by descending similarity with ties
broken by ascending id, so the strategies are comparable entry by entry.
QueryStats counts exact similarity evaluations only; bound evaluations are
not counted since they are the savings being measured.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix

from .bounds import SimInterval, best_case_similarity
from .errors import BadK, BadPivotCount, DimensionMismatch, DomainError, EmptyDataset
from .vectors import DenseVector, SparseVector, UnitVector, clamp_similarity, normalize


@dataclass
class QueryStats:
    """Work accounting for one query.

    sims_computed: exact similarity evaluations (routing objects, leaf
    members, surviving candidates). nodes_pruned: subtrees skipped by the
    best-case test. candidates_filtered: points excluded without an exact
    evaluation.
    """

    sims_computed: int = 0
    nodes_pruned: int = 0
    candidates_filtered: int = 0


class Dataset:
    """Unit vectors with stable integer ids, stacked for fast dot products.

    Dense vectors require a common dimensionality and are stacked into one
    matrix; sparse vectors go into a CSR matrix over the union of their
    supports.
    """

    def __init__(self, vectors: Sequence[UnitVector]):
        vectors = list(vectors)
        if not vectors:
            raise EmptyDataset("dataset is empty")
        for i, v in enumerate(vectors):
            if not isinstance(v, UnitVector):
                raise TypeError(f"vector {i}: expected UnitVector, got {type(v).__name__}")
        self.is_sparse = vectors[0].is_sparse
        if any(v.is_sparse != self.is_sparse for v in vectors):
            raise DimensionMismatch("cannot mix dense and sparse vectors in one dataset")
        self.vectors = vectors
        if self.is_sparse:
            self.dim = max(v.inner.dim for v in vectors)
            indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
            for i, v in enumerate(vectors):
                indptr[i + 1] = indptr[i] + len(v.inner)
            indices = np.concatenate([v.inner.indices for v in vectors]) if indptr[-1] else np.zeros(0, np.int64)
            data = np.concatenate([v.inner.values for v in vectors]) if indptr[-1] else np.zeros(0)
            self.matrix = csr_matrix((data, indices, indptr), shape=(len(vectors), self.dim))
        else:
            dims = {len(v.inner) for v in vectors}
            if len(dims) != 1:
                raise DimensionMismatch(f"dense vectors have mixed lengths: {sorted(dims)}")
            self.dim = dims.pop()
            self.matrix = np.vstack([v.inner.values for v in vectors])

    def __len__(self) -> int:
        return len(self.vectors)

    def prepare_query(self, q: Union[UnitVector, DenseVector, SparseVector]) -> np.ndarray:
        """Normalize and densify a query, aligned to this dataset's dimensionality."""
        inner = normalize(q).inner
        if self.is_sparse:
            if not isinstance(inner, SparseVector):
                raise DimensionMismatch("dense query against a sparse dataset")
            out = np.zeros(self.dim)
            keep = inner.indices < self.dim  # indices beyond the dataset's support cannot interact
            out[inner.indices[keep]] = inner.values[keep]
            return out
        if not isinstance(inner, DenseVector):
            raise DimensionMismatch("sparse query against a dense dataset")
        if len(inner) != self.dim:
            raise DimensionMismatch(f"query length {len(inner)} vs dataset dimensionality {self.dim}")
        return inner.values

    def similarity_one(self, i: int, qd: np.ndarray) -> float:
        """Similarity of point i to a prepared query."""
        if self.is_sparse:
            m = self.matrix
            lo, hi = m.indptr[i], m.indptr[i + 1]
            return clamp_similarity(float(m.data[lo:hi] @ qd[m.indices[lo:hi]]))
        return clamp_similarity(float(self.matrix[i] @ qd))

    def similarities_all(self, qd: np.ndarray) -> np.ndarray:
        """Similarities of every point to a prepared query."""
        return np.clip(self.matrix @ qd, -1.0, 1.0)

    def similarities_among(self, ids: np.ndarray, j: int) -> np.ndarray:
        """Similarities of the rows in ids to row j (build-time helper)."""
        if self.is_sparse:
            row = self.matrix[j].toarray().ravel()
            return np.clip(self.matrix[ids] @ row, -1.0, 1.0)
        return np.clip(self.matrix[ids] @ self.matrix[j], -1.0, 1.0)


def ensure_dataset(data: Union[Dataset, Sequence[UnitVector]]) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset(data)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not (-1.0 <= tau <= 1.0):
        raise DomainError(f"tau {tau} outside [-1, 1]")
    return tau


def _sort_results(results: list[tuple[int, float]]) -> list[tuple[int, float]]:
    results.sort(key=lambda r: (-r[1], r[0]))
    return results


class _TopK:
    """Fixed-capacity best-results collector: max similarity, ties to low id."""

    __slots__ = ("k", "heap")

    def __init__(self, k: int):
        self.k = k
        self.heap: list[tuple[float, int]] = []  # min-heap of (sim, -id); worst at root

    def offer(self, i: int, s: float) -> None:
        entry = (s, -i)
        if len(self.heap) < self.k:
            heapq.heappush(self.heap, entry)
        elif entry > self.heap[0]:
            heapq.heapreplace(self.heap, entry)

    @property
    def full(self) -> bool:
        return len(self.heap) == self.k

    @property
    def threshold(self) -> float:
        """Current kth-best similarity, or below any similarity when not full."""
        return self.heap[0][0] if len(self.heap) == self.k else -2.0

    def ranked(self) -> list[tuple[int, float]]:
        return _sort_results([(-ni, s) for s, ni in self.heap])


# ---------------------------------------------------------------------------
# VP tree


@dataclass
class VpNode:
    """Tree node: a leaf holds ids, an internal node holds a routing object
    and (interval, child) pairs ordered inner (high similarity) first."""

    routing_id: Optional[int] = None
    children: list[tuple[SimInterval, "VpNode"]] = field(default_factory=list)
    leaf_ids: list[int] = field(default_factory=list)
    size: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.routing_id is None


@dataclass
class VpTree:
    root: VpNode
    dataset: Dataset
    leaf_capacity: int
    seed: int


def subtree_ids(node: VpNode) -> list[int]:
    """All ids under a node, routing objects included."""
    out: list[int] = []
    stack = [node]
    while stack:
        n = stack.pop()
        if n.is_leaf:
            out.extend(n.leaf_ids)
        else:
            out.append(n.routing_id)
            stack.extend(child for _, child in n.children)
    return out


def vp_build(data: Union[Dataset, Sequence[UnitVector]], leaf_capacity: int = 16, seed: int = 0) -> VpTree:
    """Build a VP tree; deterministic for a fixed seed.

    Routing objects are drawn uniformly from the partition. Points split at
    the median similarity to the routing object, ties to the low-similarity
    child; the high-similarity child is listed first. Child intervals are the
    exact min/max member similarities. A partition needs a routing object
    plus two non-empty children, so leaves may hold up to
    max(leaf_capacity, 2) points.
    """
    ds = ensure_dataset(data)
    if leaf_capacity < 1:
        raise ValueError(f"leaf_capacity must be >= 1, got {leaf_capacity}")
    rng = np.random.default_rng(seed)
    min_split = max(leaf_capacity, 2)

    def build(ids: np.ndarray) -> VpNode:
        if len(ids) <= min_split:
            return VpNode(leaf_ids=sorted(int(i) for i in ids), size=len(ids))
        pos = int(rng.integers(len(ids)))
        vp = int(ids[pos])
        rest = np.delete(ids, pos)
        sims = ds.similarities_among(rest, vp)
        med = float(np.median(sims))
        hi_mask = sims > med  # ties go to the low-similarity child
        if not hi_mask.any() or hi_mask.all():
            # every member sits at the median; cut the sorted order in half
            order = np.lexsort((rest, sims))
            half = len(rest) // 2
            parts = ((rest[order[half:]], sims[order[half:]]),
                     (rest[order[:half]], sims[order[:half]]))
        else:
            parts = ((rest[hi_mask], sims[hi_mask]),
                     (rest[~hi_mask], sims[~hi_mask]))
        children = []
        for part_ids, part_sims in parts:
            child = build(part_ids)
            children.append((SimInterval(float(part_sims.min()), float(part_sims.max())), child))
        return VpNode(routing_id=vp, children=children, size=len(ids))

    root = build(np.arange(len(ds)))
    return VpTree(root=root, dataset=ds, leaf_capacity=leaf_capacity, seed=seed)


def vp_range_query(
    tree: VpTree,
    q: Union[UnitVector, DenseVector, SparseVector],
    tau: float,
    trace: Optional[list] = None,
) -> tuple[list[tuple[int, float]], QueryStats]:
    """All points with sim(q, x) >= tau, with exact similarities.

    A child is skipped when best_case_similarity(s_qz, interval) < tau. When
    a trace list is given, each prune appends ("pruned", s_qz, interval,
    subtree ids) for auditing.
    """
    tau = _check_tau(tau)
    ds = tree.dataset
    qd = ds.prepare_query(q)
    stats = QueryStats()
    out: list[tuple[int, float]] = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            for i in node.leaf_ids:
                s = ds.similarity_one(i, qd)
                stats.sims_computed += 1
                if s >= tau:
                    out.append((i, s))
            continue
        s_qz = ds.similarity_one(node.routing_id, qd)
        stats.sims_computed += 1
        if s_qz >= tau:
            out.append((node.routing_id, s_qz))
        for iv, child in node.children:
            if best_case_similarity(s_qz, iv) < tau:
                stats.nodes_pruned += 1
                stats.candidates_filtered += child.size
                if trace is not None:
                    trace.append(("pruned", s_qz, iv, subtree_ids(child)))
            else:
                stack.append(child)
    return _sort_results(out), stats


def vp_knn_query(
    tree: VpTree,
    q: Union[UnitVector, DenseVector, SparseVector],
    k: int,
) -> tuple[list[tuple[int, float]], QueryStats]:
    """The k highest-similarity points, best-first search by best-case priority.

    A subtree is skipped only when its best case falls strictly below the
    current kth-best similarity; at equality it is still explored, because it
    may hold an equal-similarity point with a smaller id that wins the tie.
    """
    ds = tree.dataset
    n = len(ds)
    k = int(k)
    if not 1 <= k <= n:
        raise BadK(f"k {k} outside 1..{n}")
    qd = ds.prepare_query(q)
    stats = QueryStats()
    best = _TopK(k)
    tie = itertools.count()  # keeps heap comparisons away from VpNode
    pq: list[tuple[float, int, VpNode]] = [(-1.0, next(tie), tree.root)]
    while pq:
        neg_prio, _, node = heapq.heappop(pq)
        prio = -neg_prio
        if best.full and prio < best.threshold:
            stats.nodes_pruned += 1
            stats.candidates_filtered += node.size
            continue
        if node.is_leaf:
            for i in node.leaf_ids:
                s = ds.similarity_one(i, qd)
                stats.sims_computed += 1
                best.offer(i, s)
            continue
        s_qz = ds.similarity_one(node.routing_id, qd)
        stats.sims_computed += 1
        best.offer(node.routing_id, s_qz)
        for iv, child in node.children:
            # the parent's priority already bounds the whole subtree
            child_prio = min(prio, best_case_similarity(s_qz, iv))
            if best.full and child_prio < best.threshold:
                stats.nodes_pruned += 1
                stats.candidates_filtered += child.size
            else:
                heapq.heappush(pq, (-child_prio, next(tie), child))
    return best.ranked(), stats


def audit_vp_tree(tree: VpTree) -> int:
    """Recheck structural invariants; returns the number of violations.

    Checks that every id appears exactly once (as a leaf member or routing
    object), that subtree sizes add up, that internal nodes have at least two
    children, and that every child interval equals the exact min/max of its
    members' recomputed similarities within 1e-12.
    """
    ds = tree.dataset
    violations = 0
    seen: list[int] = []

    def walk(node: VpNode) -> int:
        nonlocal violations
        if node.is_leaf:
            seen.extend(node.leaf_ids)
            if node.size != len(node.leaf_ids):
                violations += 1
            return len(node.leaf_ids)
        if len(node.children) < 2:
            violations += 1
        seen.append(node.routing_id)
        total = 1
        for iv, child in node.children:
            members = np.array(subtree_ids(child), dtype=np.int64)
            sims = ds.similarities_among(members, node.routing_id)
            if abs(float(sims.min()) - iv.lo) > 1e-12 or abs(float(sims.max()) - iv.hi) > 1e-12:
                violations += 1
            total += walk(child)
        if node.size != total:
            violations += 1
        return total

    walk(tree.root)
    if sorted(seen) != list(range(len(ds))):
        violations += 1
    return violations


# ---------------------------------------------------------------------------
# LAESA-style pivot table


@dataclass
class PivotTable:
    """Pivot ids plus the full n-by-m object-to-pivot similarity table."""

    pivot_ids: list[int]
    table: np.ndarray
    seed: int


def laesa_build(data: Union[Dataset, Sequence[UnitVector]], m: int, seed: int = 0) -> PivotTable:
    """Choose m pivots farthest-first and materialize the similarity table.

    The first pivot is drawn uniformly at random (seeded); each further pivot
    is the point whose maximum similarity to the chosen pivots is smallest
    (ties to the smallest id), spreading pivots over the sphere.
    """
    ds = ensure_dataset(data)
    n = len(ds)
    m = int(m)
    if not 1 <= m <= n:
        raise BadPivotCount(f"pivot count {m} outside 1..{n}")
    rng = np.random.default_rng(seed)
    all_ids = np.arange(n)
    first = int(rng.integers(n))
    pivot_ids = [first]
    columns = [ds.similarities_among(all_ids, first)]
    closest = columns[0].copy()
    closest[first] = np.inf  # chosen pivots are never re-selected
    while len(pivot_ids) < m:
        nxt = int(np.argmin(closest))  # argmin resolves ties to the smallest id
        pivot_ids.append(nxt)
        col = ds.similarities_among(all_ids, nxt)
        columns.append(col)
        np.maximum(closest, col, out=closest)
        closest[nxt] = np.inf
    return PivotTable(pivot_ids=pivot_ids, table=np.column_stack(columns), seed=seed)


def audit_pivot_table(pt: PivotTable, data: Union[Dataset, Sequence[UnitVector]]) -> int:
    """Recompute every table entry; returns the count of entries off by > 1e-12."""
    ds = ensure_dataset(data)
    all_ids = np.arange(len(ds))
    bad = 0
    for j, p in enumerate(pt.pivot_ids):
        col = ds.similarities_among(all_ids, p)
        bad += int(np.count_nonzero(np.abs(col - pt.table[:, j]) > 1e-12))
    return bad


def _pivot_upper_bounds(pt: PivotTable, s_qp: np.ndarray) -> np.ndarray:
    """Per-object upper bound: min over pivots of upper_bound(sim(q,p), table[i][p])."""
    t = pt.table
    ub = t * s_qp + np.sqrt((1.0 - t * t) * (1.0 - s_qp * s_qp))
    return ub.min(axis=1)


def laesa_range_query(
    pt: PivotTable,
    data: Union[Dataset, Sequence[UnitVector]],
    q: Union[UnitVector, DenseVector, SparseVector],
    tau: float,
) -> tuple[list[tuple[int, float]], QueryStats]:
    """Range query: filter by pivot upper bounds, then verify survivors.

    Every object is treated as a candidate, pivots included, so
    sims_computed is exactly m plus the number of survivors.
    """
    tau = _check_tau(tau)
    ds = ensure_dataset(data)
    n, m = pt.table.shape
    if n != len(ds):
        raise DimensionMismatch(f"table rows {n} vs dataset size {len(ds)}")
    qd = ds.prepare_query(q)
    stats = QueryStats()
    s_qp = np.array([ds.similarity_one(p, qd) for p in pt.pivot_ids])
    stats.sims_computed += m
    survivors = np.flatnonzero(_pivot_upper_bounds(pt, s_qp) >= tau)
    stats.candidates_filtered = n - len(survivors)
    out: list[tuple[int, float]] = []
    for i in survivors:
        s = ds.similarity_one(int(i), qd)
        stats.sims_computed += 1
        if s >= tau:
            out.append((int(i), s))
    return _sort_results(out), stats


def laesa_knn_query(
    pt: PivotTable,
    data: Union[Dataset, Sequence[UnitVector]],
    q: Union[UnitVector, DenseVector, SparseVector],
    k: int,
) -> tuple[list[tuple[int, float]], QueryStats]:
    """kNN query: evaluate candidates in decreasing upper-bound order.

    Stops at the first candidate whose bound falls strictly below the current
    kth-best similarity; candidates at equality are still evaluated so that
    equal-similarity ties resolve to the smallest id, as in the oracle.
    """
    ds = ensure_dataset(data)
    n, m = pt.table.shape
    if n != len(ds):
        raise DimensionMismatch(f"table rows {n} vs dataset size {len(ds)}")
    k = int(k)
    if not 1 <= k <= n:
        raise BadK(f"k {k} outside 1..{n}")
    qd = ds.prepare_query(q)
    stats = QueryStats()
    s_qp = np.array([ds.similarity_one(p, qd) for p in pt.pivot_ids])
    stats.sims_computed += m
    bounds = _pivot_upper_bounds(pt, s_qp)
    order = np.lexsort((np.arange(n), -bounds))
    best = _TopK(k)
    evaluated = 0
    for i in order:
        if best.full and bounds[i] < best.threshold:
            break
        s = ds.similarity_one(int(i), qd)
        stats.sims_computed += 1
        evaluated += 1
        best.offer(int(i), s)
    stats.candidates_filtered = n - evaluated
    return best.ranked(), stats


# ---------------------------------------------------------------------------
# Oracle


def linear_scan(
    data: Union[Dataset, Sequence[UnitVector]],
    q: Union[UnitVector, DenseVector, SparseVector],
    tau: Optional[float] = None,
    k: Optional[int] = None,
) -> list[tuple[int, float]]:
    """Brute-force exact answer with the same ordering and tie rules as the indexes."""
    if (tau is None) == (k is None):
        raise ValueError("give exactly one of tau, k")
    ds = ensure_dataset(data)
    qd = ds.prepare_query(q)
    sims = ds.similarities_all(qd)
    ids = np.arange(len(ds))
    if tau is not None:
        tau = _check_tau(tau)
        keep = sims >= tau
        ids, sims = ids[keep], sims[keep]
    else:
        k = int(k)
        if not 1 <= k <= len(ds):
            raise BadK(f"k {k} outside 1..{len(ds)}")
    order = np.lexsort((ids, -sims))
    if k is not None:
        order = order[:k]
    return [(int(ids[o]), float(sims[o])) for o in order]


@dataclass
class OracleCheckReport:
    """Outcome of an index-versus-oracle equivalence run."""

    n: int
    dim: int
    queries: int
    k: int
    mismatches: int
    mean_tau: float
    mean_matches: float
    mean_sims: dict[str, float]

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def _results_differ(got: list[tuple[int, float]], want: list[tuple[int, float]], tol: float = 1e-12) -> bool:
    if len(got) != len(want):
        return True
    for (gi, gs), (wi, ws) in zip(got, want):
        if gi != wi or abs(gs - ws) > tol:
            return True
    return False


def oracle_check(
    data: Union[Dataset, Sequence[UnitVector]],
    queries: int = 50,
    seed: int = 0,
    k: int = 10,
    leaf_capacity: int = 16,
    pivots: int = 16,
    selectivity: float = 0.01,
) -> OracleCheckReport:
    """Compare VP-tree and pivot-table answers against the linear scan.

    Runs range and kNN queries; the range threshold is the per-query
    similarity quantile selecting about `selectivity` of the points. Dense
    datasets get fresh random unit queries; sparse datasets reuse their own
    vectors as queries. A mismatch is any difference in ids, order, or
    similarity beyond 1e-12.
    """
    queries = int(queries)
    if queries < 1:
        raise ValueError(f"queries must be >= 1, got {queries}")
    ds = ensure_dataset(data)
    n = len(ds)
    tree = vp_build(ds, leaf_capacity=leaf_capacity, seed=seed)
    pt = laesa_build(ds, pivots, seed=seed)
    rng = np.random.default_rng(seed + 1)
    mismatches = 0
    sims_sums = {"vp_range": 0.0, "vp_knn": 0.0, "laesa_range": 0.0, "laesa_knn": 0.0}
    tau_sum = 0.0
    match_sum = 0.0
    for _ in range(queries):
        if ds.is_sparse:
            q: UnitVector = ds.vectors[int(rng.integers(n))]
        else:
            g = rng.standard_normal(ds.dim)
            q = normalize(DenseVector(g))
        sims = ds.similarities_all(ds.prepare_query(q))
        tau = float(np.quantile(sims, 1.0 - selectivity))
        tau_sum += tau
        want_range = linear_scan(ds, q, tau=tau)
        want_knn = linear_scan(ds, q, k=k)
        match_sum += len(want_range)
        got, st = vp_range_query(tree, q, tau)
        sims_sums["vp_range"] += st.sims_computed
        mismatches += _results_differ(got, want_range)
        got, st = vp_knn_query(tree, q, k)
        sims_sums["vp_knn"] += st.sims_computed
        mismatches += _results_differ(got, want_knn)
        got, st = laesa_range_query(pt, ds, q, tau)
        sims_sums["laesa_range"] += st.sims_computed
        mismatches += _results_differ(got, want_range)
        got, st = laesa_knn_query(pt, ds, q, k)
        sims_sums["laesa_knn"] += st.sims_computed
        mismatches += _results_differ(got, want_knn)
    mean_sims = {key: total / queries for key, total in sims_sums.items()}
    return OracleCheckReport(
        n=n,
        dim=ds.dim,
        queries=queries,
        k=k,
        mismatches=mismatches,
        mean_tau=tau_sum / queries,
        mean_matches=match_sum / queries,
        mean_sims=mean_sims,
    )

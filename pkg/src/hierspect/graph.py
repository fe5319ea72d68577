"""Sparse symmetric graphs and the partition algebra built on them.

Provides the graph container plus the operations everything else is built
from: combinatorial Laplacian, uniform random-walk matrix, aggregated and
quotient graphs, external-equitability checks, and group-affinity
estimation.

Conventions
-----------
* Node ids are dense integers ``0..n-1``.
* The adjacency is symmetric by construction: every input edge ``(u, v, w)``
  contributes ``w`` to both ``A[u, v]`` and ``A[v, u]``.  A self-loop of
  weight ``w`` therefore stores ``2w`` on the diagonal and contributes
  ``2w`` to its node's degree (symmetric-sum convention).
* Degrees are weighted row sums of the adjacency, ``d = A @ 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateGraphError, EdgeListError

__all__ = [
    "Graph",
    "Partition",
    "AffinityMatrix",
    "QuotientGraph",
    "laplacian",
    "uniform_random_walk",
    "aggregate",
    "quotient",
    "is_exact_eep",
    "estimate_affinity",
    "coarse_affinity_update",
    "relative_partition",
    "read_edge_list",
    "write_edge_list",
]

# Scale-aware default tolerance for equitability checks.
EEP_TOL_FACTOR = 1e-9


@dataclass(frozen=True)
class Partition:
    """Surjective assignment of ``n`` items onto ``k`` non-empty groups.

    ``assignment[i]`` is the group label of item ``i``; labels are dense in
    ``0..k-1`` and every group is non-empty.
    """

    assignment: np.ndarray
    k: int
    group_sizes: np.ndarray

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("assignment must be a non-empty 1-d array")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("group labels must be integers")
        labels = labels.astype(np.int64)
        if labels.min() < 0:
            raise ValueError("group labels must be non-negative")
        k = int(labels.max()) + 1
        sizes = np.bincount(labels, minlength=k)
        if np.any(sizes == 0):
            missing = np.flatnonzero(sizes == 0)
            raise ValueError(f"labels are not dense: empty group(s) {missing.tolist()}")
        labels.setflags(write=False)
        sizes.setflags(write=False)
        return cls(assignment=labels, k=k, group_sizes=sizes)

    @classmethod
    def single_group(cls, n: int) -> "Partition":
        return cls.from_labels(np.zeros(n, dtype=np.int64))

    @classmethod
    def identity(cls, n: int) -> "Partition":
        """One singleton group per item."""
        return cls.from_labels(np.arange(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    def indicator(self) -> np.ndarray:
        """Dense n-by-k 0/1 group indicator matrix."""
        h = np.zeros((self.n, self.k))
        h[np.arange(self.n), self.assignment] = 1.0
        return h

    def indicator_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (np.ones(self.n), (np.arange(self.n), self.assignment)),
            shape=(self.n, self.k),
        )

    def compose(self, coarser: "Partition") -> "Partition":
        """Apply a partition of this partition's groups to the items.

        ``coarser`` must partition ``self.k`` items (the groups);
        the result partitions the original ``n`` items.
        """
        if coarser.n != self.k:
            raise ValueError(
                f"coarser partition covers {coarser.n} items, expected {self.k} groups"
            )
        return Partition.from_labels(coarser.assignment[self.assignment])

    def group_means(self, x: np.ndarray) -> np.ndarray:
        """Group-wise means of the rows of ``x`` (this is ``H^+ x``)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[0] != self.n:
            raise ValueError(f"expected {self.n} rows, got {x.shape[0]}")
        sums = np.zeros((self.k, x.shape[1]))
        np.add.at(sums, self.assignment, x)
        return sums / self.group_sizes[:, None]


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric k-by-k matrix of estimated inter-group connection densities.

    ``group_sizes`` records the sizes of the partition the estimate
    summarizes.  Entries lie in [0, 1] when estimated from a simple
    unweighted graph; perturbation workflows may introduce negative entries.
    """

    values: np.ndarray
    group_sizes: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("affinity matrix must be square")
        if not np.allclose(values, values.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(values).max())):
            raise ValueError("affinity matrix must be symmetric")
        sizes = np.asarray(self.group_sizes, dtype=np.int64)
        if sizes.shape != (values.shape[0],):
            raise ValueError("group_sizes must have one entry per group")
        values.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "group_sizes", sizes)

    @property
    def k(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class QuotientGraph:
    """Group-level graph: per-node-normalized adjacency and its Laplacian."""

    a_pi: np.ndarray
    l_pi: np.ndarray
    group_sizes: np.ndarray


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph stored as a symmetric CSR adjacency."""

    adjacency: sp.csr_matrix
    degrees: np.ndarray

    @classmethod
    def from_arrays(cls, u, v, w=None, n=None) -> "Graph":
        """Build a graph from parallel edge arrays.

        Duplicate undirected edges have their weights summed.  ``n`` is
        inferred as ``max id + 1`` when absent.
        """
        u = np.asarray(u)
        v = np.asarray(v)
        if u.shape != v.shape or u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")
        if u.size and not (
            np.issubdtype(u.dtype, np.integer) and np.issubdtype(v.dtype, np.integer)
        ):
            raise ValueError("node ids must be integers")
        if u.size and (u.min() < 0 or v.min() < 0):
            raise ValueError("node ids must be non-negative")
        if w is None:
            w = np.ones(u.shape[0])
        else:
            w = np.asarray(w, dtype=np.float64)
            if w.shape != u.shape:
                raise ValueError("weights must match the edge arrays")
            if not np.all(np.isfinite(w)):
                raise ValueError("edge weights must be finite")
            if w.size and w.min() < 0:
                raise ValueError("edge weights must be non-negative")
        max_id = int(max(u.max(), v.max())) if u.size else -1
        if n is None:
            n = max_id + 1
        elif max_id >= n:
            raise ValueError(f"node id {max_id} out of range for n={n}")
        if n <= 0:
            raise ValueError("graph must have at least one node")
        adjacency = sp.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(n, n),
        ).tocsr()
        adjacency.sum_duplicates()
        return cls._from_csr(adjacency)

    @classmethod
    def from_edges(cls, edges, n=None) -> "Graph":
        """Build a graph from an iterable of ``(u, v)`` or ``(u, v, w)`` tuples."""
        us, vs, ws = [], [], []
        for edge in edges:
            if len(edge) == 2:
                eu, ev = edge
                ew = 1.0
            elif len(edge) == 3:
                eu, ev, ew = edge
            else:
                raise ValueError(f"edges must be (u, v) or (u, v, w), got {edge!r}")
            if not isinstance(eu, (int, np.integer)) or not isinstance(ev, (int, np.integer)):
                raise ValueError(f"node ids must be integers, got {edge!r}")
            us.append(int(eu))
            vs.append(int(ev))
            ws.append(float(ew))
        if not us:
            if n is None:
                raise ValueError("cannot infer node count from an empty edge list")
            return cls._from_csr(sp.csr_matrix((n, n)))
        return cls.from_arrays(
            np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64), np.array(ws), n=n
        )

    @classmethod
    def from_dense(cls, matrix) -> "Graph":
        """Wrap a dense symmetric adjacency (weights taken as given)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(matrix, matrix.T):
            raise ValueError("adjacency must be symmetric")
        return cls._from_csr(sp.csr_matrix(matrix))

    @classmethod
    def _from_csr(cls, adjacency: sp.csr_matrix) -> "Graph":
        # matvec with ones, matching the accumulation order of A @ H so the
        # equitability check cancels exactly on structured inputs
        degrees = adjacency @ np.ones(adjacency.shape[0])
        degrees.setflags(write=False)
        return cls(adjacency=adjacency, degrees=degrees)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def total_weight(self) -> float:
        """Sum of all adjacency entries (twice the edge weight for simple graphs)."""
        return float(self.degrees.sum())

    @property
    def max_degree(self) -> float:
        return float(self.degrees.max()) if self.n else 0.0


def laplacian(graph: Graph) -> sp.csr_matrix:
    """Combinatorial Laplacian ``L = D - A``; rows sum to zero."""
    return (sp.diags(graph.degrees) - graph.adjacency).tocsr()


def uniform_random_walk(graph: Graph) -> sp.csr_matrix:
    """Symmetric doubly-stochastic walk matrix ``W = I - L / d_max``.

    Shares eigenvectors with the Laplacian; eigenvalues lie in [-1, 1]
    with the constant vector at eigenvalue 1.
    """
    d_max = graph.max_degree
    if d_max <= 0:
        raise DegenerateGraphError("graph has no edges (max degree is zero)")
    shift = sp.diags((d_max - graph.degrees) / d_max)
    return (graph.adjacency / d_max + shift).tocsr()


def _check_partition(graph: Graph, partition: Partition) -> None:
    if partition.n != graph.n:
        raise ValueError(
            f"partition covers {partition.n} items but the graph has {graph.n} nodes"
        )


def aggregate(graph: Graph, partition: Partition) -> np.ndarray:
    """Group-aggregated adjacency ``H^T A H`` (within-group weight counted twice)."""
    _check_partition(graph, partition)
    h = partition.indicator_sparse()
    return (h.T @ graph.adjacency @ h).toarray()


def quotient(graph: Graph, partition: Partition) -> QuotientGraph:
    """Quotient graph: aggregated weights normalized per source-group node.

    ``a_pi[r, s]`` is the mean total weight a node of group ``r`` sends to
    group ``s``; ``l_pi`` is the Laplacian of that weighted group graph.
    """
    agg = aggregate(graph, partition)
    a_pi = agg / partition.group_sizes[:, None]
    d_pi = a_pi.sum(axis=1)
    l_pi = np.diag(d_pi) - a_pi
    return QuotientGraph(a_pi=a_pi, l_pi=l_pi, group_sizes=partition.group_sizes)


def is_exact_eep(graph: Graph, partition: Partition, tol: float | None = None) -> bool:
    """Check whether the partition is externally equitable.

    True iff ``L H = H L_pi`` entrywise within ``tol`` (default
    ``1e-9 * max degree``), i.e. every node in group ``r`` has the same
    total link weight to each other group ``s != r``.
    """
    _check_partition(graph, partition)
    if tol is None:
        tol = EEP_TOL_FACTOR * graph.max_degree
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    h = partition.indicator()
    # D H - A H keeps the same float summation order as the degree vector,
    # so structured cases cancel exactly
    lh = graph.degrees[:, None] * h - graph.adjacency @ h
    hl = quotient(graph, partition).l_pi[partition.assignment]
    return bool(np.abs(lh - hl).max() <= tol)


def estimate_affinity(graph: Graph, partition: Partition) -> AffinityMatrix:
    """Estimate the inter-group connection density matrix ``H^+ A (H^+)^T``.

    Each entry is the aggregated weight between two groups divided by the
    product of their sizes (diagonal included, so self-pairs count in the
    denominator).
    """
    agg = aggregate(graph, partition)
    sizes = partition.group_sizes.astype(np.float64)
    values = agg / np.outer(sizes, sizes)
    return AffinityMatrix(values=values, group_sizes=partition.group_sizes)


def coarse_affinity_update(omega: AffinityMatrix, coarser: Partition) -> AffinityMatrix:
    """Aggregate an affinity estimate one level up a hierarchy.

    ``coarser`` partitions the current groups; sizes are weighted by the
    number of original nodes per group, which makes this identical to
    re-estimating the affinity from the original adjacency with the
    composed partition.
    """
    if coarser.n != omega.k:
        raise ValueError(
            f"coarser partition covers {coarser.n} items, expected {omega.k} groups"
        )
    fine_sizes = omega.group_sizes.astype(np.float64)
    h = np.zeros((omega.k, coarser.k))
    h[np.arange(omega.k), coarser.assignment] = 1.0
    weighted = fine_sizes[:, None] * omega.values * fine_sizes[None, :]
    agg = h.T @ weighted @ h
    coarse_sizes = np.zeros(coarser.k)
    np.add.at(coarse_sizes, coarser.assignment, fine_sizes)
    values = agg / np.outer(coarse_sizes, coarse_sizes)
    return AffinityMatrix(values=values, group_sizes=coarse_sizes.astype(np.int64))


def relative_partition(fine: Partition, coarse: Partition) -> Partition:
    """Express a nested coarse partition as a partition of the fine groups.

    Raises if ``coarse`` is not an exact merge of ``fine``'s groups.
    """
    if fine.n != coarse.n:
        raise ValueError("partitions must cover the same items")
    rel = np.full(fine.k, -1, dtype=np.int64)
    rel[fine.assignment] = coarse.assignment
    if not np.array_equal(rel[fine.assignment], coarse.assignment):
        raise ValueError("coarse partition does not merge the fine one")
    result = Partition.from_labels(rel)
    return result


def read_edge_list(path) -> Graph:
    """Read a graph from a text edge list.

    One edge per line, ``u v [w]``, whitespace-separated 0-based integer
    ids; blank lines and lines starting with ``#`` are ignored.
    """
    us, vs, ws = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise EdgeListError(
                    f"line {line_no}: expected 'u v [w]', got {line!r}", line_no=line_no
                )
            try:
                u = int(parts[0])
                v = int(parts[1])
            except ValueError:
                raise EdgeListError(
                    f"line {line_no}: node ids must be integers, got {line!r}",
                    line_no=line_no,
                ) from None
            if u < 0 or v < 0:
                raise EdgeListError(
                    f"line {line_no}: node ids must be non-negative", line_no=line_no
                )
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(
                        f"line {line_no}: weight must be a number, got {parts[2]!r}",
                        line_no=line_no,
                    ) from None
                if not np.isfinite(w) or w < 0:
                    raise EdgeListError(
                        f"line {line_no}: weight must be finite and non-negative",
                        line_no=line_no,
                    )
            else:
                w = 1.0
            us.append(u)
            vs.append(v)
            ws.append(w)
    if not us:
        raise EdgeListError("edge list contains no edges")
    return Graph.from_arrays(
        np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64), np.array(ws)
    )


def write_edge_list(graph: Graph, path) -> None:
    """Write the upper triangle as ``u v w`` lines (round-trips self-loops)."""
    coo = sp.triu(graph.adjacency, k=0).tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={graph.n}\n")
        for u, v, w in zip(coo.row, coo.col, coo.data):
            u, v, w = int(u), int(v), float(w)
            if u == v:
                w = w / 2.0  # stored diagonal is twice the loop weight
            if w == 1.0:
                fh.write(f"{u} {v}\n")
            else:
                fh.write(f"{u} {v} {w!r}\n")

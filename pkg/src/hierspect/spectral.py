"""Symmetric eigensolver contract, the Bethe Hessian operator, and
finest-partition detection.

The finest level of a hierarchy is found by spectral clustering with the
Bethe Hessian ``B_r = (r^2 - 1) I + D - r A``, evaluated at plus and minus
the square root of the average degree.  The number of non-positive
eigenvalues of the two operators estimates the number of assortative and
disassortative groups respectively, and their eigenvectors feed a k-means
step that assigns nodes to groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import DegenerateGraphError, SolverError
from .graph import Graph, Partition
from .partition_search import kmeans
from .rng import substream, substream_seed

__all__ = [
    "EigsResult",
    "BetheHessian",
    "BetheClustering",
    "eigs_symmetric",
    "bethe_hessian",
    "cluster_bethe_hessian",
]

# Eigenvalues within this (relative to the operator's diagonal scale)
# of zero count as non-positive when estimating group counts.
COUNT_TOL_FACTOR = 1e-10

# Bound on how many small eigenvalues the doubling search will request.
COUNT_CAP = 256

# Below this size a full dense decomposition beats iterative solves.
_DENSE_CUTOFF = 1024


@dataclass(frozen=True)
class EigsResult:
    """Eigenpairs of a symmetric matrix.

    ``eigenvalues`` are sorted ascending; ``eigenvectors`` columns are
    orthonormal and aligned with the eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class BetheHessian:
    """The operator ``(r^2 - 1) I + D - r A`` for a regularization ``r``."""

    matrix: sp.csr_matrix
    r: float


@dataclass(frozen=True)
class BetheClustering:
    """Finest-level clustering: estimated group count and node assignment.

    ``k_plus``/``k_minus`` are the non-positive eigenvalue counts of the
    positively and negatively regularized operators; ``fallback`` flags the
    degenerate no-non-positive-eigenvalue case where a single group is
    returned.
    """

    k_hat: int
    partition: Partition
    r: float
    k_plus: int
    k_minus: int
    fallback: bool = False


def _residual_norms(matrix, eigenvalues, eigenvectors) -> np.ndarray:
    return np.linalg.norm(matrix @ eigenvectors - eigenvectors * eigenvalues, axis=0)


def eigs_symmetric(
    matrix,
    m: int,
    which: str = "smallest-algebraic",
    seed: int = 0,
) -> EigsResult:
    """Compute ``m`` eigenpairs of a symmetric matrix.

    ``which`` selects ``smallest-algebraic`` or ``largest-magnitude``
    eigenvalues.  Sparse inputs above the dense cutoff use ARPACK with a
    seeded starting vector, so results are deterministic for a fixed seed.

    Raises
    ------
    SolverError
        If the iterative solver fails to converge; carries the residual
        norms of the eigenpairs available at that point.
    """
    if which not in ("smallest-algebraic", "largest-magnitude"):
        raise ValueError(f"unknown eigenvalue selection {which!r}")
    n = matrix.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m={m} must be between 1 and n={n}")
    sym_err = abs(matrix - matrix.T)
    max_asym = sym_err.max() if isinstance(sym_err, np.ndarray) else (
        sym_err.max() if sym_err.nnz else 0.0
    )
    scale = abs(matrix).max() if isinstance(matrix, np.ndarray) else abs(matrix).max()
    if max_asym > 1e-10 * max(1.0, scale):
        raise ValueError("matrix is not symmetric")

    dense_input = isinstance(matrix, np.ndarray)
    if dense_input or n <= _DENSE_CUTOFF or m > n // 2 or m >= n - 1:
        dense = matrix if dense_input else matrix.toarray()
        values, vectors = scipy.linalg.eigh(dense)
        if which == "smallest-algebraic":
            idx = np.arange(m)
        else:
            idx = np.argsort(np.abs(values), kind="stable")[::-1][:m]
            idx = idx[np.argsort(values[idx], kind="stable")]
        return EigsResult(eigenvalues=values[idx], eigenvectors=vectors[:, idx])

    v0 = substream(seed, "eigs-start").standard_normal(n)
    arpack_which = "SA" if which == "smallest-algebraic" else "LM"
    try:
        values, vectors = eigsh(matrix, k=m, which=arpack_which, v0=v0)
    except ArpackNoConvergence as exc:
        residuals = None
        if exc.eigenvalues is not None and len(exc.eigenvalues):
            residuals = _residual_norms(matrix, exc.eigenvalues, exc.eigenvectors)
        raise SolverError(
            f"eigensolver did not converge ({m} pairs requested, "
            f"{0 if residuals is None else len(residuals)} available)",
            residual_norms=residuals,
        ) from exc
    order = np.argsort(values, kind="stable")
    return EigsResult(eigenvalues=values[order], eigenvectors=vectors[:, order])


def bethe_hessian(graph: Graph, r: float) -> BetheHessian:
    """Assemble ``(r^2 - 1) I + D - r A``; sparsity matches A plus diagonal."""
    n = graph.n
    matrix = (
        sp.diags(np.full(n, r * r - 1.0) + graph.degrees) - r * graph.adjacency
    ).tocsr()
    return BetheHessian(matrix=matrix, r=float(r))


def _count_nonpositive(matrix: sp.csr_matrix, seed: int) -> tuple[int, np.ndarray]:
    """Count eigenvalues <= 0 (within tolerance) and return their eigenvectors.

    Requests smallest-algebraic eigenpairs in doubling batches until a
    strictly positive eigenvalue shows up or the cap is reached, which
    avoids a full decomposition on large graphs.
    """
    n = matrix.shape[0]
    tau = COUNT_TOL_FACTOR * float(np.abs(matrix.diagonal()).max())
    cap = min(n, COUNT_CAP)
    m = min(8, cap)
    while True:
        res = eigs_symmetric(matrix, m, "smallest-algebraic", seed=seed)
        count = int(np.sum(res.eigenvalues <= tau))
        if count < m or m >= cap:
            return count, res.eigenvectors[:, :count]
        m = min(2 * m, cap)


def cluster_bethe_hessian(
    graph: Graph, seed: int = 0, restarts: int = 10
) -> BetheClustering:
    """Estimate the number of groups and cluster nodes at the finest scale.

    Sets ``r`` to the square root of the average degree, counts the
    non-positive eigenvalues of the positively and negatively regularized
    operators, and k-means-clusters nodes on the concatenated eigenvectors.
    Returns a single-group clustering (flagged) if no non-positive
    eigenvalue exists.
    """
    if graph.max_degree <= 0:
        raise DegenerateGraphError("graph has no edges (max degree is zero)")
    r = float(np.sqrt(graph.total_weight / graph.n))
    blocks = []
    counts = []
    for sign, name in ((1.0, "pos"), (-1.0, "neg")):
        op = bethe_hessian(graph, sign * r)
        count, vectors = _count_nonpositive(op.matrix, seed=substream_seed(seed, name))
        counts.append(count)
        if count:
            blocks.append(vectors)
    k_plus, k_minus = counts
    # the two counts can overlap below average degree 1; never exceed n
    k_hat = min(k_plus + k_minus, graph.n)
    if k_hat == 0:
        return BetheClustering(
            k_hat=1,
            partition=Partition.single_group(graph.n),
            r=r,
            k_plus=0,
            k_minus=0,
            fallback=True,
        )
    q = np.hstack(blocks)[:, :k_hat]
    if k_hat == 1:
        partition = Partition.single_group(graph.n)
    else:
        partition = kmeans(
            q, k_hat, restarts=restarts, seed=substream_seed(seed, "bh-kmeans")
        ).partition
    return BetheClustering(
        k_hat=k_hat, partition=partition, r=r, k_plus=k_plus, k_minus=k_minus
    )


"""Partition-similarity scoring: adjusted mutual information, pairwise score
matrices between partition lists, and hierarchy precision/recall.

AMI is chance-corrected under the permutation (fixed-marginals) null:
``(I - E[I]) / ((Ent1 + Ent2)/2 - E[I])``.  The expectation is computed
analytically from the hypergeometric distribution of contingency cells; a
Monte Carlo permutation estimator is provided for validation.  All
information quantities use natural logarithms (AMI itself is
base-invariant).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .graph import Partition
from .rng import substream

__all__ = [
    "ami",
    "mutual_information",
    "entropy",
    "expected_mutual_information",
    "mc_expected_mutual_information",
    "score_matrix",
    "score_hierarchy",
    "ScoreReport",
]


def _labels(partition) -> np.ndarray:
    if isinstance(partition, Partition):
        return partition.assignment
    return Partition.from_labels(np.asarray(partition)).assignment


def _contingency(labels1: np.ndarray, labels2: np.ndarray) -> np.ndarray:
    k1 = int(labels1.max()) + 1
    k2 = int(labels2.max()) + 1
    return np.bincount(labels1 * k2 + labels2, minlength=k1 * k2).reshape(k1, k2)


def entropy(labels) -> float:
    """Shannon entropy (nats) of a label assignment."""
    labels = _labels(labels)
    p = np.bincount(labels) / labels.size
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def mutual_information(labels1, labels2) -> float:
    """Mutual information (nats) between two assignments of the same items."""
    labels1, labels2 = _labels(labels1), _labels(labels2)
    if labels1.size != labels2.size:
        raise ValueError("partitions must cover the same number of items")
    n = labels1.size
    cont = _contingency(labels1, labels2)
    a = cont.sum(axis=1)
    b = cont.sum(axis=0)
    nz = cont > 0
    nij = cont[nz].astype(np.float64)
    outer = np.outer(a, b)[nz].astype(np.float64)
    return float(np.sum(nij / n * (np.log(nij * n) - np.log(outer))))


def expected_mutual_information(row_sums, col_sums, n: int) -> float:
    """Analytic expected MI under the permutation null with fixed marginals.

    For each contingency cell the count follows a hypergeometric law; the
    expectation sums the MI contribution weighted by that law.
    """
    a = np.asarray(row_sums, dtype=np.int64)
    b = np.asarray(col_sums, dtype=np.int64)
    if a.sum() != n or b.sum() != n:
        raise ValueError("marginals must sum to the number of items")
    log_n = np.log(n)
    # hypergeometric log-probability pieces independent of the cell count
    gln_a = gammaln(a + 1)
    gln_na = gammaln(n - a + 1)
    gln_b = gammaln(b + 1)
    gln_nb = gammaln(n - b + 1)
    gln_n = gammaln(n + 1)
    total = 0.0
    for i in range(a.size):
        ai = a[i]
        for j in range(b.size):
            bj = b[j]
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1)
            log_p = (
                gln_a[i]
                + gln_b[j]
                + gln_na[i]
                + gln_nb[j]
                - gln_n
                - gammaln(nij + 1)
                - gammaln(ai - nij + 1)
                - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            contrib = nij / n * (np.log(nij) + log_n - np.log(ai) - np.log(bj))
            total += float(np.sum(np.exp(log_p) * contrib))
    return total


def mc_expected_mutual_information(
    labels1, labels2, samples: int = 1000, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo permutation estimate of E[MI]; returns (mean, std error)."""
    labels1, labels2 = _labels(labels1), _labels(labels2)
    rng = substream(seed, "emi-permutation")
    values = np.empty(samples)
    for t in range(samples):
        values[t] = mutual_information(labels1, rng.permutation(labels2))
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(samples))


def _identical_up_to_relabeling(cont: np.ndarray) -> bool:
    if cont.shape[0] != cont.shape[1]:
        return False
    nz = cont > 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def ami(p1, p2) -> float:
    """Adjusted mutual information between two partitions of the same items.

    Returns 1 for partitions identical up to relabeling and 0 against a
    single-group partition; values can be slightly negative due to the
    chance adjustment.  Two single-group partitions are identical by
    convention (returned as 1 with a warning).
    """
    labels1, labels2 = _labels(p1), _labels(p2)
    if labels1.size != labels2.size:
        raise ValueError("partitions must cover the same number of items")
    n = labels1.size
    cont = _contingency(labels1, labels2)
    if cont.shape == (1, 1):
        warnings.warn(
            "both partitions are trivial (one group); AMI defined as 1",
            stacklevel=2,
        )
        return 1.0
    if _identical_up_to_relabeling(cont):
        return 1.0
    mi = mutual_information(labels1, labels2)
    emi = expected_mutual_information(cont.sum(axis=1), cont.sum(axis=0), n)
    denom = (entropy(labels1) + entropy(labels2)) / 2.0 - emi
    if denom <= 0.0:
        # chance-level agreement is the best the marginals allow
        return 0.0
    return (mi - emi) / denom


@dataclass(frozen=True)
class ScoreReport:
    """Pairwise AMI score matrix with hierarchy precision and recall.

    ``xi[i, j]`` compares true level ``i`` against inferred level ``j``;
    precision averages the column maxima (every inferred level should match
    some true level) and recall the row maxima (every true level should be
    recovered).
    """

    xi: np.ndarray
    precision: float
    recall: float
    n_levels_true: int
    n_levels_inferred: int


def score_matrix(truth, inferred) -> np.ndarray:
    truth = [_labels(p) for p in truth]
    inferred = [_labels(p) for p in inferred]
    if not truth or not inferred:
        raise ValueError("partition lists must be non-empty")
    sizes = {p.size for p in truth} | {p.size for p in inferred}
    if len(sizes) != 1:
        raise ValueError(f"all partitions must cover the same items, got sizes {sorted(sizes)}")
    xi = np.empty((len(truth), len(inferred)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # trivial-vs-trivial convention
        for i, t in enumerate(truth):
            for j, p in enumerate(inferred):
                xi[i, j] = ami(t, p)
    return xi


def score_hierarchy(truth, inferred) -> ScoreReport:
    """Score an inferred hierarchy against planted partitions.

    Raw AMI values are used throughout (no clamping of slightly negative
    scores).
    """
    xi = score_matrix(truth, inferred)
    return ScoreReport(
        xi=xi,
        precision=float(xi.max(axis=0).mean()),
        recall=float(xi.max(axis=1).mean()),
        n_levels_true=xi.shape[0],
        n_levels_inferred=xi.shape[1],
    )

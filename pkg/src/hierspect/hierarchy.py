"""Level significance testing and agglomerative hierarchy assembly.

Coarser levels are proposed by clustering the rows of random-walk
eigenvectors of the current group-affinity matrix.  A proposed level count
is accepted only if conditioning the analytic null curve of expected
projection errors on it improves the fit to the observed (perturbation-
averaged) error curve; this rejects degenerate hierarchies, whose
eigenvectors scramble under small affinity perturbations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import (
    AffinityMatrix,
    Graph,
    Partition,
    estimate_affinity,
)
from .partition_search import best_eep_partition, projection_error
from .rng import substream, substream_seed
from .spectral import BetheClustering, cluster_bethe_hessian

__all__ = [
    "expected_error",
    "expected_error_conditional",
    "NullErrorCurve",
    "perturb_affinity",
    "bootstrap_perturb_affinity",
    "structural_eigenvectors",
    "LevelCandidates",
    "identify_partitions_and_errors",
    "MsleFit",
    "fit_msle",
    "find_relevant_minima",
    "DetectionConfig",
    "Level",
    "HierarchyResult",
    "infer_hierarchy",
]

SIGMA_BRACKET = (1e-6, 1e2)
SIGMA_TOL = 1e-8

# Default perturbation: noise-calibrated bootstrap at sqrt(2) standard
# errors per entry, the scale at which two independent estimates of the
# same affinity matrix differ.  A level that survives it would be found
# again on a fresh sample; a degenerate level would not.
BOOTSTRAP_SCALE = float(np.sqrt(2.0))


def expected_error(n: int, r: int) -> float:
    """Expected projection error of a random orthonormal block: (n-r)(r-1)/(n-1).

    This is the mean squared residual of ``r`` random orthonormal columns
    (the constant vector always included) after removing the group means of
    an independent partition into ``r`` groups.  Vanishes at ``r = 1`` and
    ``r = n``.
    """
    if n < 2:
        raise ValueError("ambient dimension must be at least 2")
    if not 1 <= r <= n:
        raise ValueError(f"r={r} out of range 1..{n}")
    return (n - r) * (r - 1) / (n - 1)


def expected_error_conditional(n: int, r: int, kappas=()) -> float:
    """Expected projection error conditioned on known equitable levels.

    ``kappas`` are the accepted level sizes, strictly increasing within
    ``1 < kappa < n``.  Within each segment between consecutive conditioning
    points ``a < r < b`` the value is ``(b - r)(r - a)/(b - a)``; the curve
    is continuous, non-negative and vanishes at 1, n and every kappa.
    Reduces to the unconditional curve when ``kappas`` is empty.
    """
    if n < 2:
        raise ValueError("ambient dimension must be at least 2")
    if not 1 <= r <= n:
        raise ValueError(f"r={r} out of range 1..{n}")
    kappas = tuple(int(k) for k in kappas)
    if any(k2 <= k1 for k1, k2 in zip(kappas, kappas[1:])):
        raise ValueError("conditioning sizes must be strictly increasing")
    if kappas and (kappas[0] <= 1 or kappas[-1] >= n):
        raise ValueError("conditioning sizes must lie strictly between 1 and n")
    knots = (1,) + kappas + (n,)
    for lo, hi in zip(knots, knots[1:]):
        if lo <= r <= hi:
            return (hi - r) * (r - lo) / (hi - lo)
    raise AssertionError("unreachable: r inside 1..n")


@dataclass(frozen=True)
class NullErrorCurve:
    """Expected projection errors for r = 1..n under given conditioning."""

    n: int
    conditioning: tuple
    values: np.ndarray

    @classmethod
    def build(cls, n: int, kappas=()) -> "NullErrorCurve":
        kappas = tuple(int(k) for k in kappas)
        values = np.array(
            [expected_error_conditional(n, r, kappas) for r in range(1, n + 1)]
        )
        values.setflags(write=False)
        return cls(n=n, conditioning=kappas, values=values)


def perturb_affinity(
    omega: AffinityMatrix, gamma_rel: float, seed: int = 0
) -> AffinityMatrix:
    """Add a symmetric random perturbation of fixed relative spectral norm.

    The perturbation is i.i.d. standard normal on the upper triangle
    (mirrored) and rescaled so that the spectral-norm ratio of change to
    original is exactly ``gamma_rel``.  Entries of the result may be
    negative; only eigenvectors are consumed downstream.
    """
    if gamma_rel < 0:
        raise ValueError("relative perturbation strength must be non-negative")
    if gamma_rel == 0.0:
        return omega
    k = omega.k
    rng = substream(seed, "affinity-perturbation")
    gamma = np.zeros((k, k))
    iu = np.triu_indices(k)
    gamma[iu] = rng.standard_normal(iu[0].size)
    gamma = gamma + np.triu(gamma, k=1).T
    omega_norm = np.linalg.norm(omega.values, 2)
    gamma_norm = np.linalg.norm(gamma, 2)
    if omega_norm == 0.0 or gamma_norm == 0.0:
        return omega
    scale = gamma_rel * omega_norm / gamma_norm
    return AffinityMatrix(
        values=omega.values + scale * gamma, group_sizes=omega.group_sizes
    )


def bootstrap_perturb_affinity(
    omega: AffinityMatrix, scale: float = BOOTSTRAP_SCALE, seed: int = 0
) -> AffinityMatrix:
    """Perturb each entry at the scale of its own estimation noise.

    Treats entries as connection densities estimated from ``n_r * n_s``
    node pairs, giving per-entry standard errors
    ``sqrt(p (1 - p) / (n_r n_s))`` (with add-one smoothing so exact 0/1
    estimates keep a one-pair floor).  A symmetric standard-normal draw
    scaled by ``scale`` standard errors is added; at the default sqrt(2)
    this simulates the disagreement between two independent estimates of
    the same affinity matrix.
    """
    if scale < 0:
        raise ValueError("bootstrap scale must be non-negative")
    if scale == 0.0:
        return omega
    k = omega.k
    sizes = omega.group_sizes.astype(np.float64)
    pairs = np.outer(sizes, sizes)
    p = np.clip(omega.values, 0.0, 1.0)
    p_smooth = (p * pairs + 1.0) / (pairs + 2.0)
    stderr = np.sqrt(p_smooth * (1.0 - p_smooth) / pairs)
    rng = substream(seed, "affinity-bootstrap")
    gamma = np.zeros((k, k))
    iu = np.triu_indices(k)
    gamma[iu] = rng.standard_normal(iu[0].size)
    gamma = gamma + np.triu(gamma, k=1).T
    return AffinityMatrix(
        values=omega.values + scale * gamma * stderr, group_sizes=omega.group_sizes
    )


def structural_eigenvectors(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the uniform random-walk matrix of a dense weighted graph.

    Returns eigenvalues and eigenvectors ordered with the constant
    (eigenvalue-1) eigenvector first, then by descending eigenvalue
    magnitude.  Positive eigenvalues signal assortative structure,
    negative disassortative, so this ordering surfaces both.
    """
    weights = np.asarray(weights, dtype=np.float64)
    k = weights.shape[0]
    degrees = weights.sum(axis=1)
    lap = np.diag(degrees) - weights
    d_max = float(np.abs(degrees).max())
    if d_max <= 0:
        # all-zero degrees: W degenerates to the identity
        d_max = 1.0
    walk = np.eye(k) - lap / d_max
    values, vectors = np.linalg.eigh(walk)
    overlap = np.abs(vectors.sum(axis=0))
    first = int(np.argmax(overlap))
    rest = np.argsort(-np.abs(values), kind="stable")
    rest = rest[rest != first]
    order = np.concatenate(([first], rest))
    return values[order], vectors[:, order]


@dataclass(frozen=True)
class LevelCandidates:
    """Candidate sub-partitions of the current groups and their mean errors.

    ``partitions[r - 1]`` partitions the ``k`` current groups into ``r``
    groups; ``mean_errors[r - 1]`` is the mean perturbed projection error
    for that size.  The single-group and identity candidates project
    exactly, so the first and last errors are zero.
    """

    partitions: list
    mean_errors: np.ndarray


def identify_partitions_and_errors(
    omega: AffinityMatrix,
    z: int = 100,
    gamma_rel: float | None = None,
    seed: int = 0,
    restarts: int = 10,
) -> LevelCandidates:
    """Propose one sub-partition per size and score each against perturbations.

    Treats the affinity matrix as a weighted graph on its ``k`` groups.
    For every size ``r`` in ``2..k-1`` the rows of the first ``r``
    random-walk eigenvectors are clustered; the single-group and identity
    partitions cover ``r = 1`` and ``r = k``.  Each candidate's projection
    error is then averaged over ``z`` randomly perturbed affinity matrices:
    robust (non-degenerate) partitions keep small errors under
    perturbation.

    ``gamma_rel=None`` (the default) perturbs at the entries' estimation-
    noise scale (see ``bootstrap_perturb_affinity``); passing a number uses
    a fixed relative spectral-norm perturbation of that strength instead.
    """
    if z < 1:
        raise ValueError("number of perturbation samples must be >= 1")
    k = omega.k
    partitions = [Partition.single_group(k)]
    if k >= 2:
        if k >= 3:
            _, vectors = structural_eigenvectors(omega.values)
            for r in range(2, k):
                partitions.append(
                    best_eep_partition(
                        vectors[:, :r],
                        r,
                        restarts=restarts,
                        seed=substream_seed(seed, "subpartition", r),
                    )
                )
        partitions.append(Partition.identity(k))
    if k < 3:
        return LevelCandidates(
            partitions=partitions, mean_errors=np.zeros(len(partitions))
        )
    errors = np.zeros(k)
    for zeta in range(z):
        sample_seed = substream_seed(seed, "sample", zeta)
        if gamma_rel is None:
            perturbed = bootstrap_perturb_affinity(omega, seed=sample_seed)
        else:
            perturbed = perturb_affinity(omega, gamma_rel, seed=sample_seed)
        _, pert_vectors = structural_eigenvectors(perturbed.values)
        for r in range(1, k + 1):
            errors[r - 1] += projection_error(partitions[r - 1], pert_vectors[:, :r])
    errors /= z
    return LevelCandidates(partitions=partitions, mean_errors=errors)


@dataclass(frozen=True)
class MsleFit:
    """Result of fitting a scale to a null curve: optimal sigma and the MSLE."""

    sigma: float
    msle: float
    identifiable: bool = True


def _msle(mean_errors: np.ndarray, null_values: np.ndarray, sigma: float) -> float:
    diff = np.log(mean_errors + 1.0) - np.log(sigma * null_values + 1.0)
    return float(np.mean(diff * diff))


def fit_msle(mean_errors: np.ndarray, null_curve: NullErrorCurve) -> MsleFit:
    """Fit the scale of a null error curve by minimizing the mean squared
    logistic error between observed and scaled expected errors.

    Uses golden-section search on the bracket ``[1e-6, 1e2]``.  If the null
    curve is identically zero the scale is unidentifiable and sigma = 1 is
    returned with ``identifiable=False``.
    """
    mean_errors = np.asarray(mean_errors, dtype=np.float64)
    null_values = null_curve.values
    if mean_errors.shape != null_values.shape:
        raise ValueError(
            f"{mean_errors.shape[0]} errors vs curve of length {null_values.shape[0]}"
        )
    if np.all(null_values == 0.0):
        return MsleFit(
            sigma=1.0,
            msle=_msle(mean_errors, null_values, 1.0),
            identifiable=not np.any(mean_errors > 0.0),
        )
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = SIGMA_BRACKET
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _msle(mean_errors, null_values, c)
    fd = _msle(mean_errors, null_values, d)
    while b - a > SIGMA_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _msle(mean_errors, null_values, c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _msle(mean_errors, null_values, d)
    sigma = (a + b) / 2.0
    return MsleFit(sigma=sigma, msle=_msle(mean_errors, null_values, sigma))


def find_relevant_minima(mean_errors) -> list[int]:
    """Greedily select level sizes whose conditioning improves the null fit.

    Forward selection over candidate sizes ``2..k-1``: each round fits every
    remaining candidate added to the accepted conditioning set (each curve
    independently sigma-fitted) and accepts the best one iff it strictly
    lowers the MSLE; stops when no candidate improves.  Best-improvement
    order matters: explaining the deepest trough first stops shallower
    candidates from free-riding on an unexplained neighbour.  An empty
    result means no valid coarser level exists.
    """
    mean_errors = np.asarray(mean_errors, dtype=np.float64)
    k = mean_errors.shape[0]
    if k < 3:
        return []
    best = fit_msle(mean_errors, NullErrorCurve.build(k)).msle
    accepted: list[int] = []
    remaining = list(range(2, k))
    while remaining:
        scored = min(
            (
                fit_msle(
                    mean_errors,
                    NullErrorCurve.build(k, tuple(sorted(accepted + [kappa]))),
                ).msle,
                kappa,
            )
            for kappa in remaining
        )
        if scored[0] >= best:
            break
        best = scored[0]
        accepted.append(scored[1])
        remaining.remove(scored[1])
    return sorted(accepted)


@dataclass(frozen=True)
class DetectionConfig:
    """Tunable parameters of hierarchy detection.

    ``gamma_rel=None`` uses the noise-calibrated bootstrap perturbation;
    a number switches to a fixed relative spectral-norm perturbation.
    """

    z: int = 100
    gamma_rel: float | None = None
    kmeans_restarts: int = 10


@dataclass(frozen=True)
class Level:
    """One hierarchy level, fine to coarse.

    ``relative_partition`` partitions the previous level's groups;
    ``composed_partition`` maps original nodes to this level's groups.
    """

    k: int
    relative_partition: Partition
    composed_partition: Partition
    affinity: AffinityMatrix


@dataclass(frozen=True)
class HierarchyResult:
    """Ordered fine-to-coarse list of detected levels plus diagnostics.

    ``diagnostics`` holds one record per agglomeration attempt with the
    mean-error curve, the unconditional fit, and the accepted sizes with
    their conditional fit.  ``bethe`` records the finest-level clustering.
    """

    n: int
    levels: list
    bethe: BetheClustering
    diagnostics: list = field(default_factory=list)


def infer_hierarchy(
    graph: Graph, config: DetectionConfig | None = None, seed: int = 0
) -> HierarchyResult:
    """Detect the full community hierarchy of a graph.

    The finest level comes from Bethe Hessian clustering.  Each subsequent
    level re-estimates the group affinity from the original adjacency,
    proposes sub-partitions of the current groups, and keeps the finest
    size accepted by the null-curve significance test; the loop stops when
    no size is accepted.  Deterministic for fixed seed and input.
    """
    if config is None:
        config = DetectionConfig()
    bethe = cluster_bethe_hessian(
        graph, seed=substream_seed(seed, "bethe"), restarts=config.kmeans_restarts
    )
    finest = bethe.partition
    levels = [
        Level(
            k=bethe.k_hat,
            relative_partition=finest,
            composed_partition=finest,
            affinity=estimate_affinity(graph, finest),
        )
    ]
    diagnostics: list[dict] = []
    while levels[-1].k >= 3:
        current = levels[-1]
        candidates = identify_partitions_and_errors(
            current.affinity,
            z=config.z,
            gamma_rel=config.gamma_rel,
            seed=substream_seed(seed, "identify", len(levels)),
            restarts=config.kmeans_restarts,
        )
        accepted = find_relevant_minima(candidates.mean_errors)
        base_fit = fit_msle(
            candidates.mean_errors, NullErrorCurve.build(current.k)
        )
        record = {
            "k": current.k,
            "mean_errors": candidates.mean_errors.tolist(),
            "sigma_unconditional": base_fit.sigma,
            "msle_unconditional": base_fit.msle,
            "accepted": list(accepted),
        }
        if accepted:
            cond_fit = fit_msle(
                candidates.mean_errors,
                NullErrorCurve.build(current.k, tuple(accepted)),
            )
            record["sigma_conditional"] = cond_fit.sigma
            record["msle_conditional"] = cond_fit.msle
        diagnostics.append(record)
        if not accepted:
            break
        kappa = accepted[-1]  # finest accepted agglomeration
        relative = candidates.partitions[kappa - 1]
        composed = current.composed_partition.compose(relative)
        levels.append(
            Level(
                k=kappa,
                relative_partition=relative,
                composed_partition=composed,
                affinity=estimate_affinity(graph, composed),
            )
        )
    return HierarchyResult(n=graph.n, levels=levels, bethe=bethe, diagnostics=diagnostics)

"""
Gaussian Partition Function Utilities.

Euclidean (Wick-rotated) Gaussian path integral on a graph, restricted to the
row space of K:

    Z = sqrt((2 pi)^(N-1) / prod_j a_j) * prod_j exp(Jt_j^2 / (2 a_j))

where a_j are the nonzero eigenvalues of K and Jt_j the components of J in
K's eigenbasis. From Z follow the per-mode outcome densities and the most
probable (classical) field K . Q0 = J.

The unrestricted integral over all N vertex coordinates diverges along the
gauge direction, so unrestricted_partition_function only exists as an error
path for singular K.
"""
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.special import logsumexp
from tqdm import tqdm

from basic_capabilities.graph_path_integral_toolbox import config
from basic_capabilities.graph_path_integral_toolbox.errors import (
    EigensolverError,
    EstimateOverflowError,
    NonPositiveEigenvalueError,
    NullModeError,
    SingularActionalError,
    SourceNotInRowSpaceError,
    TheoryXError,
)
from basic_capabilities.graph_path_integral_toolbox.scc_engine import Actional, validate_actional

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
LOG_FLOAT_MAX = math.log(sys.float_info.max)


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of K, eigenvalues descending, null modes last."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    row_space_indices: Tuple[int, ...]
    null_indices: Tuple[int, ...]

    @property
    def row_space_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[list(self.row_space_indices)]

    @property
    def row_space_basis(self) -> np.ndarray:
        return self.eigenvectors[:, list(self.row_space_indices)]

    def to_eigenbasis(self, vector: np.ndarray) -> np.ndarray:
        return self.eigenvectors.T @ vector


@dataclass(frozen=True)
class ModeFactor:
    eigenvalue: float
    source_component: float
    # log of sqrt(2 pi / a_j) * exp(Jt_j^2 / (2 a_j))
    log_contribution: float

    @property
    def contribution(self) -> float:
        return math.exp(self.log_contribution)


@dataclass(frozen=True)
class PartitionResult:
    log_Z: float
    modes: Tuple[ModeFactor, ...]

    @property
    def Z(self) -> float:
        # log_Z stays finite where Z itself overflows
        try:
            return math.exp(self.log_Z)
        except OverflowError:
            return math.inf


def spectrum(K: np.ndarray, rtol: float = config.ZERO_EIGENVALUE_RTOL) -> Spectrum:
    """
    Full eigen-decomposition of symmetric K with row-space/null separation.

    Args:
        K: Real symmetric matrix.
        rtol (float): |a| < rtol * a_max marks a null (gauge) mode.

    Returns:
        Spectrum with eigenvalues in descending order.
    """
    K = np.asarray(K, dtype=float)
    if not np.all(np.isfinite(K)):
        raise EigensolverError("K contains non-finite entries")
    try:
        eigenvalues, eigenvectors = linalg.eigh(K)
    except linalg.LinAlgError as e:
        raise EigensolverError(f"eigendecomposition failed: {e}") from e

    order = np.argsort(eigenvalues, kind='stable')[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    is_null = np.abs(eigenvalues) < rtol * scale if scale > 0 else np.ones(eigenvalues.shape, dtype=bool)
    row_space = tuple(int(i) for i in np.flatnonzero(~is_null))
    null = tuple(int(i) for i in np.flatnonzero(is_null))
    return Spectrum(eigenvalues, eigenvectors, row_space, null)


def _checked_modes(actional: Actional) -> Tuple[Spectrum, np.ndarray]:
    try:
        validate_actional(actional)
    except SourceNotInRowSpaceError:
        logger.error("Source vector leaves the row space of K; the actional is inconsistent")
        raise
    spec = spectrum(actional.K)
    a = spec.row_space_eigenvalues
    if np.any(a <= 0):
        raise NonPositiveEigenvalueError(f"row-space eigenvalue {a.min():.3e} is not positive")
    return spec, spec.to_eigenbasis(actional.J)


def partition_function(actional: Actional) -> PartitionResult:
    """
    Row-space restricted Z, accumulated in log space.

    Raises:
        SourceNotInRowSpaceError: J has a component along the gauge null space.
        NonPositiveEigenvalueError: a row-space eigenvalue is not positive.
    """
    spec, J_tilde = _checked_modes(actional)
    modes = []
    for j in spec.row_space_indices:
        a_j = float(spec.eigenvalues[j])
        Jt_j = float(J_tilde[j])
        log_contribution = 0.5 * (LOG_2PI - math.log(a_j)) + Jt_j * Jt_j / (2.0 * a_j)
        modes.append(ModeFactor(a_j, Jt_j, log_contribution))
    log_Z = math.fsum(m.log_contribution for m in modes)
    return PartitionResult(log_Z=log_Z, modes=tuple(modes))


def partition_function_product(actional: Actional) -> float:
    """Z from the literal product form; overflows long before the log path does."""
    spec, J_tilde = _checked_modes(actional)
    a = spec.row_space_eigenvalues
    Jt = J_tilde[list(spec.row_space_indices)]
    prefactor = math.sqrt((2.0 * math.pi) ** len(a) / float(np.prod(a)))
    return prefactor * float(np.prod(np.exp(Jt ** 2 / (2.0 * a))))


def unrestricted_partition_function(actional: Actional) -> float:
    """
    Z over all N coordinates: sqrt((2 pi)^N / det K) * exp(J . K^-1 . J / 2).

    Raises:
        SingularActionalError: K has a zero eigenvalue (always the case for a
            graph Laplacian, whose all-ones gauge mode makes the integral diverge).
    """
    spec = spectrum(actional.K)
    if spec.null_indices:
        raise SingularActionalError(
            f"K has {len(spec.null_indices)} zero eigenvalue(s); det K = 0 and the unrestricted "
            "integral diverges along the gauge direction. Use partition_function instead."
        )
    a = spec.eigenvalues
    if np.any(a <= 0):
        raise NonPositiveEigenvalueError(f"eigenvalue {a.min():.3e} is not positive")
    log_det = float(np.sum(np.log(a)))
    quadratic = float(actional.J @ linalg.solve(actional.K, actional.J, assume_a='sym'))
    return math.exp(0.5 * (len(a) * LOG_2PI - log_det) + 0.5 * quadratic)


def outcome_probability(actional: Actional, k: int, q0: float) -> float:
    """
    Probability density of eigenmode coordinate Qt_k taking the value q0.

    sqrt(a_k / 2 pi) * exp(-q0^2 a_k / 2 + Jt_k q0 - Jt_k^2 / (2 a_k)),
    a normal density with mean Jt_k / a_k and variance 1 / a_k.

    Args:
        k (int): 0-based index into the descending spectrum.
        q0 (float): Outcome value.

    Raises:
        NullModeError: k indexes a gauge mode (or is out of range).
    """
    spec, J_tilde = _checked_modes(actional)
    if k not in spec.row_space_indices:
        raise NullModeError(
            f"mode {k} is not a row-space mode (row-space modes: {list(spec.row_space_indices)})"
        )
    a_k = float(spec.eigenvalues[k])
    Jt_k = float(J_tilde[k])
    exponent = -0.5 * q0 * q0 * a_k + Jt_k * q0 - Jt_k * Jt_k / (2.0 * a_k)
    return math.sqrt(a_k / (2.0 * math.pi)) * math.exp(exponent)


def most_probable_mode_value(actional: Actional, k: int) -> float:
    """Stationary point Jt_k / a_k of the mode-k density."""
    spec, J_tilde = _checked_modes(actional)
    if k not in spec.row_space_indices:
        raise NullModeError(f"mode {k} is not a row-space mode")
    return float(J_tilde[k] / spec.eigenvalues[k])


def most_probable_field(actional: Actional) -> np.ndarray:
    """
    Minimum-norm solution Q0 of K . Q0 = J.

    Row-space coordinates are Jt_k / a_k; null-space coordinates are zero, so
    Q0 has no component along the gauge direction. Any Q0 + c * n with n in
    the null space (all-ones on a connected graph) solves the same equation.
    """
    spec, J_tilde = _checked_modes(actional)
    coordinates = np.zeros_like(J_tilde)
    idx = list(spec.row_space_indices)
    coordinates[idx] = J_tilde[idx] / spec.eigenvalues[idx]
    if spec.null_indices:
        logger.debug("Q0 is fixed up to %d gauge direction(s)", len(spec.null_indices))
    return spec.eigenvectors @ coordinates


def vertex_probability(actional: Actional, vertex: int, q0: float) -> float:
    """
    Marginal density of the field at one vertex under the restricted Gaussian.

    Mean (K^+ J)_i, variance (K^+)_ii. This depends on the choice of the
    row-space slice, so unlike outcome_probability it is a convenience view,
    not a gauge-invariant quantity.
    """
    spec, J_tilde = _checked_modes(actional)
    if not 0 <= vertex < actional.size:
        raise TheoryXError(f"vertex index {vertex} out of range 0..{actional.size - 1}")
    basis = spec.row_space_basis
    a = spec.row_space_eigenvalues
    mean = float(most_probable_field(actional)[vertex])
    variance = float(np.sum(basis[vertex] ** 2 / a))
    if variance <= 0:
        raise NullModeError(f"vertex {vertex} has no row-space fluctuation")
    return math.exp(-0.5 * (q0 - mean) ** 2 / variance) / math.sqrt(2.0 * math.pi * variance)


def mode_table(actional: Actional) -> pd.DataFrame:
    """Per-mode report rows: eigenvalue, Jt, most probable value, log contribution."""
    spec, J_tilde = _checked_modes(actional)
    rows = []
    for j, a_j in enumerate(spec.eigenvalues):
        is_null = j in spec.null_indices
        rows.append({
            'mode': j + 1,
            'eigenvalue': float(a_j),
            'J_tilde': float(J_tilde[j]),
            'most_probable': float('nan') if is_null else float(J_tilde[j] / a_j),
            'log_contribution': float('nan') if is_null else
                0.5 * (LOG_2PI - math.log(a_j)) + J_tilde[j] ** 2 / (2.0 * a_j),
            'is_null': is_null,
        })
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Importance-sampling estimate of Z kept in log space."""
    log_estimate: float
    relative_standard_error: float
    samples: int
    chunks: int

    @property
    def estimate(self) -> float:
        try:
            return math.exp(self.log_estimate)
        except OverflowError:
            raise EstimateOverflowError(
                f"MC estimate exp({self.log_estimate:.6g}) overflows; compare in log space"
            ) from None

    @property
    def standard_error(self) -> float:
        return self.relative_standard_error * self.estimate

    def z_score(self, log_reference: float) -> float:
        """(estimate - reference) / standard_error, evaluated without leaving log space."""
        if self.relative_standard_error <= 0.0:
            return 0.0
        gap = log_reference - self.log_estimate
        if gap > LOG_FLOAT_MAX:
            return -math.inf
        return -math.expm1(gap) / self.relative_standard_error


def _mc_chunk(a: np.ndarray, Jt: np.ndarray, scale: float, n: int, seed_seq: np.random.SeedSequence):
    """Log-sum of importance weights and squared weights for one chunk."""
    rng = np.random.default_rng(seed_seq)
    centre = Jt / a
    sigma = np.sqrt(scale / a)
    q = centre + sigma * rng.standard_normal((n, a.shape[0]))
    log_target = np.sum(-0.5 * a * q ** 2 + Jt * q, axis=1)
    z = (q - centre) / sigma
    log_proposal = np.sum(-0.5 * z ** 2 - np.log(sigma) - 0.5 * LOG_2PI, axis=1)
    log_w = log_target - log_proposal
    return logsumexp(log_w), logsumexp(2.0 * log_w), n


def mc_oracle_log_partition(
    actional: Actional,
    samples: int,
    seed: int,
    max_workers: int = config.MC_MAX_WORKERS,
    chunk_size: int = config.MC_CHUNK_SIZE,
    proposal_scale: float = config.MC_PROPOSAL_SCALE,
    show_progress: bool = False,
) -> MonteCarloEstimate:
    """
    Importance-sampled Monte-Carlo estimate of the restricted integral, in log space.

    Samples the N-1 row-space coordinates from independent normals with
    variance proposal_scale / a_j and weights each draw by
    exp(sum_j(-a_j q_j^2 / 2 + Jt_j q_j)) / proposal density. Samples are
    split into fixed-size chunks whose seeds are spawned from `seed`, so the
    estimate does not depend on max_workers.

    The relative standard error is sqrt((n sum w^2 / (sum w)^2 - 1) / (n - 1)),
    which never leaves log space, so sources large enough to overflow Z
    still give a finite log estimate.
    """
    if samples < config.MC_MIN_SAMPLES:
        raise TheoryXError(f"samples must be >= {config.MC_MIN_SAMPLES}, got {samples}")
    spec, J_tilde = _checked_modes(actional)
    idx = list(spec.row_space_indices)
    a = spec.eigenvalues[idx]
    Jt = J_tilde[idx]

    chunk_sizes: List[int] = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        chunk_sizes.append(samples % chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(chunk_sizes))

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = [executor.submit(_mc_chunk, a, Jt, proposal_scale, n, s) for n, s in zip(chunk_sizes, seeds)]
        results = [f.result() for f in tqdm(futures, desc="MC oracle chunks", disable=not show_progress)]

    log_sum_w = logsumexp([r[0] for r in results])
    log_sum_w2 = logsumexp([r[1] for r in results])
    n = sum(r[2] for r in results)
    # n * sum(w^2) / sum(w)^2 lies in [1, n]
    spread = math.exp(log_sum_w2 + math.log(n) - 2.0 * log_sum_w)
    relative_standard_error = math.sqrt(max(spread - 1.0, 0.0) / (n - 1))
    result = MonteCarloEstimate(
        log_estimate=float(log_sum_w - math.log(n)),
        relative_standard_error=relative_standard_error,
        samples=n,
        chunks=len(results),
    )
    logger.debug(
        "MC oracle: %d samples in %d chunks, log estimate %.10g (relative error %.2g)",
        n, len(results), result.log_estimate, relative_standard_error,
    )
    return result


def mc_oracle_partition(actional: Actional, samples: int, seed: int, **kwargs) -> Tuple[float, float]:
    """
    Monte-Carlo estimate of Z on the linear scale.

    Returns:
        (estimate, standard_error)

    Raises:
        EstimateOverflowError: the estimate does not fit in a float; use
            mc_oracle_log_partition instead.
    """
    result = mc_oracle_log_partition(actional, samples, seed, **kwargs)
    return result.estimate, result.standard_error

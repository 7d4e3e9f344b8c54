"""
Self-Consistency Criterion (SCC) Engine.

Builds the actional of a chain complex, the difference matrix
K = beta * d1 . d1^T and the source vector J = alpha * d1 . e, and checks
the criterion K . v = (beta / alpha) J for J built from e = d1^T . v.

Because every link leaves one vertex and enters another, sum_i J_i = 0
for any link values e, and J is orthogonal to the gauge null space of K.
"""
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
import pandas as pd
from scipy import linalg

from basic_capabilities.graph_path_integral_toolbox import config
from basic_capabilities.graph_path_integral_toolbox.chain_complex import ChainComplex, boundary_1
from basic_capabilities.graph_path_integral_toolbox.errors import (
    DataFormatError,
    DimensionMismatchError,
    InvalidComplexError,
    SourceNotInRowSpaceError,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, list, tuple]


@dataclass(frozen=True)
class Actional:
    """K/2 + J: the core of the discrete action, with its scale factors."""
    K: np.ndarray
    J: np.ndarray
    alpha: float = 1.0
    beta: float = 1.0

    @property
    def size(self) -> int:
        return self.J.shape[0]


def _as_vector(values: ArrayLike, expected_length: int, what: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float).reshape(-1)
    if vector.shape[0] != expected_length:
        raise DimensionMismatchError(f"{what} has length {vector.shape[0]}, expected {expected_length}")
    if not np.all(np.isfinite(vector)):
        raise DimensionMismatchError(f"{what} contains non-finite entries")
    return vector


def build_K(cc: ChainComplex, beta: float = 1.0) -> np.ndarray:
    """
    Difference matrix K = beta * d1 . d1^T, the weighted graph Laplacian.

    Args:
        cc: Chain complex supplying d1.
        beta (float): Positive scale.

    Returns:
        Symmetric PSD float array of shape (vertex_count, vertex_count).
    """
    if not beta > 0:
        raise InvalidComplexError(f"beta must be positive, got {beta}")
    d1 = boundary_1(cc)
    return beta * (d1 @ d1.T).astype(float)


def build_J(cc: ChainComplex, e: ArrayLike, alpha: float = 1.0) -> np.ndarray:
    """Source vector J = alpha * d1 . e, divergence-free by construction."""
    e = _as_vector(e, cc.link_count, "link value vector")
    return alpha * (boundary_1(cc) @ e)


def link_values_from_vertices(cc: ChainComplex, v: ArrayLike) -> np.ndarray:
    """Link values e = d1^T . v, i.e. head value minus tail value for each link."""
    v = _as_vector(v, cc.vertex_count, "vertex vector")
    return boundary_1(cc).T @ v


def divergence(J: ArrayLike) -> float:
    return float(np.sum(np.asarray(J, dtype=float)))


def verify_scc(cc: ChainComplex, v: ArrayLike, alpha: float = 1.0, beta: float = 1.0) -> float:
    """
    Residual of the SCC identity for a vertex vector v.

    Computes ||K . v - (beta/alpha) J||_inf with K = build_K(cc, beta) and
    J = build_J(cc, d1^T v, alpha). Zero analytically; round-off in practice.
    """
    if alpha == 0:
        raise InvalidComplexError("alpha must be nonzero for the SCC ratio beta/alpha")
    v = _as_vector(v, cc.vertex_count, "vertex vector")
    K = build_K(cc, beta)
    J = build_J(cc, link_values_from_vertices(cc, v), alpha)
    residual = K @ v - (beta / alpha) * J
    return float(np.max(np.abs(residual))) if residual.size else 0.0


def gauge_null_space(K: np.ndarray, rtol: float = config.ZERO_EIGENVALUE_RTOL) -> np.ndarray:
    """
    Orthonormal basis of K's zero-eigenvalue eigenspace.

    An eigenvalue counts as zero when |lambda| < rtol * lambda_max. For a
    connected graph the result is a single column proportional to all-ones;
    a disconnected graph has one column per component.

    Returns:
        Array of shape (n, k), k possibly 0.
    """
    K = np.asarray(K, dtype=float)
    eigenvalues, eigenvectors = linalg.eigh(K)
    scale = np.max(np.abs(eigenvalues)) if eigenvalues.size else 0.0
    if scale == 0.0:
        return eigenvectors
    mask = np.abs(eigenvalues) < rtol * scale
    return eigenvectors[:, mask]


def build_actional(cc: ChainComplex, e: ArrayLike, alpha: float = 1.0, beta: float = 1.0) -> Actional:
    """Builds the (K, J) pair for a complex and link values, then validates it."""
    actional = Actional(K=build_K(cc, beta), J=build_J(cc, e, alpha), alpha=float(alpha), beta=float(beta))
    validate_actional(actional)
    return actional


def validate_actional(actional: Actional) -> float:
    """
    Checks the Actional invariants.

    Returns:
        Norm of J's projection onto the null space of K.

    Raises:
        DimensionMismatchError: K and J shapes disagree.
        InvalidComplexError: K is not symmetric.
        SourceNotInRowSpaceError: J has a divergence or a null-space component.
    """
    K, J = actional.K, actional.J
    if K.shape != (J.shape[0], J.shape[0]):
        raise DimensionMismatchError(f"K has shape {K.shape} but J has length {J.shape[0]}")
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(K)))):
        raise InvalidComplexError("K is not symmetric")

    J_norm = float(np.linalg.norm(J))
    null_basis = gauge_null_space(K)
    null_component = float(np.linalg.norm(null_basis.T @ J)) if null_basis.size else 0.0
    if null_component > config.ROW_SPACE_RTOL * max(J_norm, 1e-300):
        raise SourceNotInRowSpaceError(
            f"J has a null-space component of norm {null_component:.3e} (|J| = {J_norm:.3e}); "
            f"sum(J) = {divergence(J):.3e}"
        )
    return null_component


def action_value(actional: Actional, Q: ArrayLike) -> float:
    """Euclidean discrete action 1/2 Q.K.Q - J.Q for a field configuration Q."""
    Q = _as_vector(Q, actional.size, "field vector")
    return float(0.5 * Q @ actional.K @ Q - actional.J @ Q)


def _load_indexed_values(path: str, key_column: str, labels) -> np.ndarray:
    try:
        df = pd.read_csv(path, dtype={key_column: str})
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"{path}: file is empty, expected header '{key_column},value'") from e
    except pd.errors.ParserError as e:
        raise DataFormatError(f"{path}: not a readable CSV ({e})") from e
    except UnicodeDecodeError as e:
        raise DataFormatError(f"{path}: not UTF-8 text (byte {e.start})") from e
    if list(df.columns[:2]) != [key_column, 'value']:
        raise DataFormatError(f"{path}: expected header '{key_column},value', got {','.join(df.columns)}")
    position = {label: i for i, label in enumerate(labels)}
    values = np.full(len(labels), np.nan)
    seen = set()
    for row_number, (key, value) in enumerate(zip(df[key_column], df['value']), start=2):
        key = str(key).strip()
        if key.isdigit() and 0 < int(key) <= len(labels):
            key = labels[int(key) - 1]
        if key not in position:
            raise DataFormatError(f"{path}: unknown {key_column} '{key}'", row_number)
        if key in seen:
            raise DataFormatError(f"{path}: {key_column} '{key}' listed more than once", row_number)
        seen.add(key)
        try:
            values[position[key]] = float(value)
        except ValueError as e:
            raise DataFormatError(f"{path}: {key_column} '{key}' has non-numeric value '{value}'", row_number) from e
    if np.isnan(values).any():
        missing = [labels[i] for i in np.flatnonzero(np.isnan(values))]
        raise DataFormatError(f"{path}: missing values for {', '.join(missing)}")
    return values


def load_link_values(path: str, cc: ChainComplex) -> np.ndarray:
    """Reads a 'link,value' CSV (labels like e3 or 1-based integers) in the complex's link order."""
    return _load_indexed_values(path, 'link', cc.link_labels())


def load_vertex_values(path: str, cc: ChainComplex) -> np.ndarray:
    """Reads a 'vertex,value' CSV (labels like v2 or 1-based integers)."""
    return _load_indexed_values(path, 'vertex', cc.vertex_labels())

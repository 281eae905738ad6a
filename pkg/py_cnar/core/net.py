"""Block-structured networks and their spectral embeddings.

Provides the stochastic block model generator, the planted-partition
parameterization, the top-K spectral embedding of an adjacency matrix and the
Procrustes subspace distance used to measure how well the embedding recovers
the population eigenvectors.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigh, orthogonal_procrustes

from ..constants import ORTHONORMAL_TOL
from ..exceptions import CnarValidationError

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]


@dataclass(frozen=True)
class SbmSpec:
    """Membership matrix ``theta`` (N x K, one-hot rows) and connectivity ``q`` (K x K)."""

    theta: Matrix
    q: Matrix

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if theta.ndim != 2 or q.ndim != 2:
            raise CnarValidationError("theta and q must be 2-d matrices")
        if q.shape != (theta.shape[1], theta.shape[1]):
            raise CnarValidationError(
                f"q has shape {q.shape}, expected ({theta.shape[1]}, {theta.shape[1]})"
            )
        if not (np.isin(theta, (0.0, 1.0)).all() and (theta.sum(axis=1) == 1).all()):
            raise CnarValidationError("every row of theta must be one-hot")
        if not np.allclose(q, q.T, atol=1e-12):
            raise CnarValidationError("connectivity matrix q must be symmetric")
        if (q < 0).any() or (q > 1).any():
            raise CnarValidationError("connectivity probabilities must lie in [0, 1]")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_labels(cls, labels: Any, q: Any, k: int | None = None) -> "SbmSpec":
        """Build the one-hot membership matrix from integer community labels."""
        labels = np.asarray(labels, dtype=int)
        k = int(k if k is not None else labels.max() + 1)
        if labels.min() < 0 or labels.max() >= k:
            raise CnarValidationError(f"community labels must lie in [0, {k})")
        theta = np.zeros((labels.size, k))
        theta[np.arange(labels.size), labels] = 1.0
        return cls(theta=theta, q=np.asarray(q, dtype=float))

    @property
    def n(self) -> int:
        return int(self.theta.shape[0])

    @property
    def k(self) -> int:
        return int(self.theta.shape[1])

    @property
    def labels(self) -> NDArray[np.int64]:
        return np.argmax(self.theta, axis=1)

    @property
    def block_sizes(self) -> NDArray[np.int64]:
        return self.theta.sum(axis=0).astype(np.int64)

    def require_nonempty_blocks(self) -> None:
        empty = np.flatnonzero(self.block_sizes == 0)
        if empty.size:
            raise CnarValidationError(f"communities {empty.tolist()} have no members")

    def probability_matrix(self) -> Matrix:
        """P = theta q theta^T (diagonal included)."""
        return self.theta @ self.q @ self.theta.T


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric binary adjacency matrix with zero diagonal."""

    a: Matrix

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise CnarValidationError(f"adjacency must be square, got shape {a.shape}")
        if not np.isin(a, (0.0, 1.0)).all():
            raise CnarValidationError("adjacency entries must be 0 or 1")
        if not np.array_equal(a, a.T):
            raise CnarValidationError("adjacency must be symmetric")
        if np.diag(a).any():
            raise CnarValidationError("adjacency must have a zero diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_edges(cls, n: int, edges: Any) -> "AdjacencyMatrix":
        """Undirected graph on ``n`` nodes; duplicate edges and self-loops are ignored."""
        a = np.zeros((n, n))
        pairs = np.asarray(list(edges), dtype=int).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise CnarValidationError(f"edge endpoints must lie in [0, {n})")
        keep = pairs[:, 0] != pairs[:, 1]
        a[pairs[keep, 0], pairs[keep, 1]] = 1.0
        a[pairs[keep, 1], pairs[keep, 0]] = 1.0
        return cls(a)

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def degrees(self) -> NDArray[np.float64]:
        return self.a.sum(axis=1)

    def edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.a, k=1))
        return list(zip(rows.tolist(), cols.tolist(), strict=True))


@dataclass(frozen=True)
class SpectralEmbedding:
    """Top-K eigenvectors (by absolute eigenvalue) of a symmetric matrix."""

    u_hat: Matrix
    eigvals: NDArray[np.float64]
    full_spectrum: NDArray[np.float64] = field(repr=False)

    @property
    def k(self) -> int:
        return int(self.u_hat.shape[1])

    @property
    def n(self) -> int:
        return int(self.u_hat.shape[0])


def planted_partition_spec(n_per_block: list[int], alpha_n: float, rho: float) -> SbmSpec:
    """Q = alpha_n * (rho I + (1 - rho) 1 1^T); blocks assigned contiguously."""
    if not n_per_block or min(n_per_block) < 1:
        raise CnarValidationError("block sizes must be a non-empty list of positive integers")
    if not 0.0 < alpha_n <= 1.0:
        raise CnarValidationError(f"alpha_n must lie in (0, 1], got {alpha_n}")
    if not 0.0 <= rho <= 1.0:
        raise CnarValidationError(f"rho must lie in [0, 1], got {rho}")
    k = len(n_per_block)
    q = alpha_n * (rho * np.eye(k) + (1.0 - rho) * np.ones((k, k)))
    labels = np.repeat(np.arange(k), n_per_block)
    return SbmSpec.from_labels(labels, q, k=k)


def equal_blocks(n: int, k: int) -> list[int]:
    """Split ``n`` nodes into ``k`` contiguous blocks; earlier blocks take the remainder."""
    if k < 1 or n < k:
        raise CnarValidationError(f"cannot split n={n} nodes into k={k} non-empty blocks")
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def generate_sbm(spec: SbmSpec, rng: np.random.Generator) -> AdjacencyMatrix:
    """Sample a_ij ~ Bernoulli(q[k_i, k_j]) independently for i < j."""
    spec.require_nonempty_blocks()
    p = spec.probability_matrix()
    draws = rng.random((spec.n, spec.n))
    upper = np.triu(draws < p, k=1).astype(float)
    return AdjacencyMatrix(upper + upper.T)


def _as_symmetric(a: "AdjacencyMatrix | Matrix") -> Matrix:
    mat = a.a if isinstance(a, AdjacencyMatrix) else np.asarray(a, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise CnarValidationError(f"expected a square matrix, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12):
        raise CnarValidationError("spectral embedding requires a symmetric matrix")
    return mat


def fix_column_signs(vectors: Matrix) -> Matrix:
    """Flip columns so that each column's entry of largest magnitude is positive."""
    out = np.array(vectors, dtype=float, copy=True)
    if out.size == 0:
        return out
    pivots = np.argmax(np.abs(out), axis=0)
    signs = np.sign(out[pivots, np.arange(out.shape[1])])
    signs[signs == 0] = 1.0
    return out * signs


def _sorted_eigh(mat: Matrix) -> tuple[NDArray[np.float64], Matrix]:
    vals, vecs = eigh(mat)
    # |lambda| descending, then signed value descending, then original index
    abs_key = np.round(np.abs(vals), 10)
    signed_key = np.round(vals, 10)
    order = np.lexsort((np.arange(vals.size), -signed_key, -abs_key))
    return vals[order], vecs[:, order]


def spectral_embed(a: "AdjacencyMatrix | Matrix", k: int) -> SpectralEmbedding:
    """Eigenvectors for the ``k`` largest-|lambda| eigenvalues, with deterministic signs."""
    mat = _as_symmetric(a)
    n = mat.shape[0]
    if not 1 <= k <= n:
        raise CnarValidationError(f"k must lie in [1, {n}], got {k}")
    vals, vecs = _sorted_eigh(mat)
    u_hat = fix_column_signs(vecs[:, :k])
    gram_err = np.abs(u_hat.T @ u_hat - np.eye(k)).max()
    if gram_err > ORTHONORMAL_TOL:
        # eigh returns orthonormal vectors; re-orthonormalize if a degenerate cluster drifted
        q, _ = np.linalg.qr(u_hat)
        u_hat = fix_column_signs(q)
    logger.debug("spectral_embed n=%d k=%d leading |eigvals|=%s", n, k, np.abs(vals[:k]))
    return SpectralEmbedding(u_hat=u_hat, eigvals=vals[:k].copy(), full_spectrum=vals)


def subspace_distance(u1: Matrix, u2: Matrix) -> float:
    """min over orthogonal H of ||u1 - u2 H||_F (orthogonal Procrustes)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != u2.shape or u1.ndim != 2:
        raise CnarValidationError(f"shape mismatch: {u1.shape} vs {u2.shape}")
    h, _ = orthogonal_procrustes(u2, u1)
    return float(max(np.linalg.norm(u1 - u2 @ h, "fro"), 0.0))


def row_normalize(a: "AdjacencyMatrix | Matrix") -> Matrix:
    """a_ij / n_i with n_i the out-degree; isolated nodes keep an all-zero row."""
    mat = a.a if isinstance(a, AdjacencyMatrix) else np.asarray(a, dtype=float)
    degrees = mat.sum(axis=1)
    scale = np.divide(1.0, degrees, out=np.zeros_like(degrees), where=degrees > 0)
    isolated = int((degrees == 0).sum())
    if isolated:
        logger.debug("row_normalize: %d isolated nodes left as zero rows", isolated)
    return mat * scale[:, None]


@dataclass(frozen=True)
class ScreeResult:
    abs_eigvals: NDArray[np.float64]
    ratios: NDArray[np.float64]
    suggested_k: int


def scree(a: "AdjacencyMatrix | Matrix", k_max: int) -> ScreeResult:
    """Full |lambda| sequence and the advisory argmax_k |lambda_k| / |lambda_{k+1}|."""
    mat = _as_symmetric(a)
    n = mat.shape[0]
    if not 1 <= k_max < n:
        raise CnarValidationError(f"k_max must lie in [1, {n - 1}], got {k_max}")
    vals, _ = _sorted_eigh(mat)
    abs_vals = np.abs(vals)
    ratios = eigenvalue_ratios(abs_vals, k_max)
    return ScreeResult(
        abs_eigvals=abs_vals, ratios=ratios, suggested_k=int(np.argmax(ratios)) + 1
    )


def eigenvalue_ratios(values: NDArray[np.float64], k_max: int) -> NDArray[np.float64]:
    """values[k] / values[k+1] for k < k_max; a zero denominator gives +inf (0/0 gives 1)."""
    num = values[:k_max]
    den = values[1 : k_max + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    ratios[(num == 0) & (den == 0)] = 1.0
    return ratios


def membership_basis(spec: SbmSpec) -> Matrix:
    """Orthonormal basis theta D^{-1/2} of the membership column space."""
    spec.require_nonempty_blocks()
    return spec.theta / np.sqrt(spec.block_sizes.astype(float))

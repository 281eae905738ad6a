"""Factor-structured error covariance from regression residuals.

A simplified POET estimator: principal components of the residual panel give
the factors and loadings (normalized so that F^T F / T = I), and the
idiosyncratic part is kept diagonal. The inverse covariance is never formed
densely for estimation; ``PrecisionOperator`` applies it through the
Sherman-Morrison-Woodbury identity, which only needs an M x M solve.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh

from ..constants import VARIANCE_FLOOR
from ..exceptions import CnarValidationError, EstimationError
from .model import FactorNoiseSpec
from .net import eigenvalue_ratios, fix_column_signs

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]


@dataclass(frozen=True)
class ErrCov:
    """Sigma_eps = lambda_hat lambda_hat^T + diag(sigma_e_diag), with Sigma_f = I."""

    lambda_hat: Matrix
    sigma_e_diag: NDArray[np.float64]
    factors_hat: Matrix
    eigvals_resid: NDArray[np.float64]

    def __post_init__(self) -> None:
        if (np.asarray(self.sigma_e_diag) <= 0).any():
            raise CnarValidationError("idiosyncratic variances must be positive")
        if self.lambda_hat.shape[0] != self.sigma_e_diag.size:
            raise CnarValidationError("loadings and variances disagree on N")

    @property
    def n(self) -> int:
        return int(self.sigma_e_diag.size)

    @property
    def m(self) -> int:
        return int(self.lambda_hat.shape[1])

    @classmethod
    def identity(cls, n: int) -> "ErrCov":
        """Unit idiosyncratic variance and no factors (weighted LS reduces to OLS)."""
        return cls(
            lambda_hat=np.zeros((n, 0)),
            sigma_e_diag=np.ones(n),
            factors_hat=np.zeros((0, 0)),
            eigvals_resid=np.zeros(0),
        )

    def covariance(self) -> Matrix:
        """Dense Sigma_eps; intended for small-N checks only."""
        return self.lambda_hat @ self.lambda_hat.T + np.diag(self.sigma_e_diag)


def _leading_eigs(residuals: Matrix, count: int) -> tuple[NDArray[np.float64], Matrix]:
    """Leading eigenvalues of E E^T / (TN) and the matching factor matrix sqrt(T) * eigvecs."""
    t_len, n = residuals.shape
    scale = 1.0 / (t_len * n)
    if t_len <= n:
        vals, vecs = eigh(scale * residuals @ residuals.T)
        order = np.argsort(vals)[::-1]
        vals = np.clip(vals[order], 0.0, None)
        return vals, np.sqrt(t_len) * vecs[:, order[:count]]

    # dual problem on the N x N matrix shares the non-zero spectrum
    vals, vecs = eigh(scale * residuals.T @ residuals)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    lead = vals[:count]
    if count and lead.min() <= 1e-14 * max(vals[0], 1e-300):
        _, factors = _leading_eigs_primal(residuals, count)
        return vals, factors
    factors = residuals @ vecs[:, order[:count]] / np.sqrt(n * lead)
    return vals, factors


def _leading_eigs_primal(residuals: Matrix, count: int) -> tuple[NDArray[np.float64], Matrix]:
    t_len, n = residuals.shape
    vals, vecs = eigh(residuals @ residuals.T / (t_len * n))
    order = np.argsort(vals)[::-1]
    return np.clip(vals[order], 0.0, None), np.sqrt(t_len) * vecs[:, order[:count]]


def fit_poet(residuals: Matrix, m: int) -> ErrCov:
    """Estimate loadings, factors and diagonal idiosyncratic variances from residuals."""
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 2:
        raise CnarValidationError("residuals must be a T x N matrix")
    t_len, n = residuals.shape
    if not 1 <= m < min(t_len, n):
        raise CnarValidationError(f"factor count m must lie in [1, {min(t_len, n) - 1}], got {m}")
    if not np.isfinite(residuals).all():
        raise CnarValidationError("residuals contain non-finite values")

    eigvals, factors = _leading_eigs(residuals, m)
    factors = fix_column_signs(factors)
    loadings = residuals.T @ factors / t_len
    idio = residuals - factors @ loadings.T
    sigma_e = np.mean(idio**2, axis=0)

    floored = sigma_e < VARIANCE_FLOOR
    if floored.any():
        logger.warning(
            "Idiosyncratic variance below %.0e for %d of %d nodes; flooring",
            VARIANCE_FLOOR, int(floored.sum()), n,
        )
        sigma_e = np.maximum(sigma_e, VARIANCE_FLOOR)

    logger.debug("fit_poet t=%d n=%d m=%d leading eigvals=%s", t_len, n, m, eigvals[: m + 1])
    return ErrCov(
        lambda_hat=loadings,
        sigma_e_diag=sigma_e,
        factors_hat=factors,
        eigvals_resid=eigvals,
    )


class PrecisionOperator:
    """Sigma_eps^{-1} = D^{-1} - D^{-1} L (I + L^T D^{-1} L)^{-1} L^T D^{-1}.

    Example:
        >>> op = precision_smw(ErrCov.identity(3))
        >>> op.apply(np.ones(3))
        array([1., 1., 1.])
    """

    def __init__(self, sigma_e_diag: NDArray[np.float64], loadings: Matrix) -> None:
        sigma_e_diag = np.asarray(sigma_e_diag, dtype=float)
        if (sigma_e_diag <= 0).any():
            raise CnarValidationError("idiosyncratic variances must be positive")
        self.d_inv = 1.0 / sigma_e_diag
        self.loadings = np.asarray(loadings, dtype=float)
        # D^{-1} L, reused by every application
        self.scaled_loadings = self.loadings * self.d_inv[:, None]
        self._inner: tuple[Matrix, bool] | None = None
        if self.m:
            inner = np.eye(self.m) + self.loadings.T @ self.scaled_loadings
            try:
                self._inner = cho_factor(inner, lower=True)
            except LinAlgError as e:
                raise EstimationError("SMW inner matrix is not positive definite") from e

    @property
    def n(self) -> int:
        return int(self.d_inv.size)

    @property
    def m(self) -> int:
        return int(self.loadings.shape[1])

    def solve_inner(self, rhs: NDArray[np.float64]) -> NDArray[np.float64]:
        """(I + L^T D^{-1} L)^{-1} rhs for an M-leading array."""
        if self._inner is None:
            return np.zeros_like(rhs)
        return np.asarray(cho_solve(self._inner, rhs))

    def apply(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        """Omega x for a vector or an N x k block."""
        x = np.asarray(x, dtype=float)
        scaled = self.d_inv.reshape((-1,) + (1,) * (x.ndim - 1)) * x
        correction = self.scaled_loadings @ self.solve_inner(self.scaled_loadings.T @ x)
        return np.asarray(scaled - correction)

    def to_dense(self) -> Matrix:
        return self.apply(np.eye(self.n))


def precision_smw(cov: ErrCov) -> PrecisionOperator:
    """Precision operator of the factor covariance; only an M x M system is factorized."""
    return PrecisionOperator(cov.sigma_e_diag, cov.lambda_hat)


@dataclass(frozen=True)
class FactorSelection:
    eigvals: NDArray[np.float64]
    ratios: NDArray[np.float64]
    suggested_m: int


def select_num_factors(residuals: Matrix, m_max: int) -> FactorSelection:
    """Eigenvalue-ratio choice argmax_{k <= m_max} lambda_k / lambda_{k+1}."""
    residuals = np.asarray(residuals, dtype=float)
    t_len, n = residuals.shape
    if not 1 <= m_max < min(t_len, n) / 2:
        raise CnarValidationError(
            f"m_max must satisfy 1 <= m_max < min(T, N)/2 = {min(t_len, n) / 2}, got {m_max}"
        )
    vals, _ = _leading_eigs(residuals, 0)
    lead = vals[: m_max + 1]
    if np.allclose(lead, lead[0], rtol=1e-9, atol=0.0):
        logger.warning("Residual eigenvalues are all equal; defaulting to one factor")
        return FactorSelection(eigvals=lead, ratios=np.ones(m_max), suggested_m=1)
    ratios = eigenvalue_ratios(lead, m_max)
    return FactorSelection(eigvals=lead, ratios=ratios, suggested_m=int(np.argmax(ratios)) + 1)


def precision_deviation(estimated: ErrCov, truth: FactorNoiseSpec) -> float:
    """Spectral-norm distance between estimated and true precision matrices (dense)."""
    omega_hat = precision_smw(estimated).to_dense()
    omega = np.linalg.inv(truth.covariance())
    return float(np.linalg.norm(omega_hat - omega, 2))

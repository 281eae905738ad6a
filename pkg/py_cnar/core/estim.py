"""Two-step CNAR estimation and the NAR baseline.

The first step is ordinary least squares on the stacked designs
X_{t-1} = ((y_{t-1}^T U) kron U, y_{t-1}, Z_{t-1}). The second step reweights the
same normal equations with the precision operator of a factor-structured
error covariance estimated from the first-step residuals.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular

from ..constants import MAX_GRAM_CONDITION
from ..exceptions import CnarValidationError, EstimationError
from .model import CnarParams, PanelSeries, pack_theta, stack_designs, unpack_theta
from .net import AdjacencyMatrix, SpectralEmbedding, row_normalize
from .poet import ErrCov, PrecisionOperator, fit_poet, precision_smw

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]

THETA_LAYOUT = "vec(B1) column-major, then beta2, then gamma"


class FitStep(str, Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class FitResult:
    """Estimated CNAR coefficients with the residuals of rows t = 2..T."""

    theta_hat: NDArray[np.float64]
    params: CnarParams
    residuals: Matrix
    step: FitStep
    gram_condition: float

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def p(self) -> int:
        return self.params.p


@dataclass(frozen=True)
class NarFit:
    beta1: float
    beta2: float
    gamma: NDArray[np.float64]
    residuals: Matrix
    gram_condition: float
    weighted: bool

    @property
    def theta_hat(self) -> NDArray[np.float64]:
        return np.concatenate([[self.beta1, self.beta2], self.gamma])


def _basis_of(embedding: "SpectralEmbedding | Matrix") -> Matrix:
    if isinstance(embedding, SpectralEmbedding):
        return embedding.u_hat
    return np.asarray(embedding, dtype=float)


def _solve_normal_equations(gram: Matrix, rhs: NDArray[np.float64]) -> tuple[NDArray, float]:
    """Solve gram @ theta = rhs by Cholesky, falling back to QR.

    Raises:
        EstimationError: If the Gram matrix is singular or its condition exceeds 1e12
    """
    gram = (gram + gram.T) / 2.0
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition > MAX_GRAM_CONDITION:
        raise EstimationError(
            f"Gram matrix is ill-conditioned (condition {condition:.3e} > "
            f"{MAX_GRAM_CONDITION:.0e}); the design does not identify the coefficients",
            condition=condition,
        )
    try:
        factor = cho_factor(gram, lower=True)
        theta = cho_solve(factor, rhs)
    except LinAlgError:
        logger.debug("Cholesky failed (condition %.3e); solving by QR", condition)
        q, r = np.linalg.qr(gram)
        theta = solve_triangular(r, q.T @ rhs)
    return np.asarray(theta, dtype=float), condition


def _weighted_least_squares(
    x: NDArray[np.float64],
    y: Matrix,
    precision: PrecisionOperator | None,
) -> tuple[NDArray[np.float64], float, Matrix]:
    """Minimize sum_t (y_t - X_t b)^T W (y_t - X_t b) over stacked (T-1) x N x d designs."""
    t1, n, d = x.shape
    if d > n * t1:
        raise CnarValidationError(
            f"{d} coefficients cannot be identified from N*(T-1) = {n * t1} observations"
        )
    if precision is None:
        wx, wy = x, y
    else:
        if precision.n != n:
            raise CnarValidationError(
                f"weighting covariance has N={precision.n}, panel has N={n}"
            )
        # Omega applied to every column of every X_t in one N x ((T-1) d) block
        block = x.transpose(1, 0, 2).reshape(n, t1 * d)
        wx = precision.apply(block).reshape(n, t1, d).transpose(1, 0, 2)
        wy = precision.apply(y.T).T
    gram = np.einsum("tni,tnj->ij", x, wx)
    rhs = np.einsum("tni,tn->i", x, wy)
    theta, condition = _solve_normal_equations(gram, rhs)
    residuals = y - np.einsum("tnd,d->tn", x, theta)
    return theta, condition, residuals


def _require_lag(panel: PanelSeries) -> None:
    if panel.t_len < 2:
        raise CnarValidationError(f"need at least two time points for a lag, got T={panel.t_len}")


def _fit_cnar(
    panel: PanelSeries,
    embedding: "SpectralEmbedding | Matrix",
    precision: PrecisionOperator | None,
    step: FitStep,
) -> FitResult:
    _require_lag(panel)
    u = _basis_of(embedding)
    x, y = stack_designs(panel, u)
    theta, condition, residuals = _weighted_least_squares(x, y, precision)
    if not np.isfinite(theta).all():
        raise EstimationError("least-squares solution is not finite", condition=condition)
    k = u.shape[1]
    params = unpack_theta(theta, k, panel.p)
    logger.debug(
        "CNAR %s step: N=%d T=%d K=%d p=%d cond=%.3e", step.value, panel.n, panel.t_len, k,
        panel.p, condition,
    )
    return FitResult(
        theta_hat=theta, params=params, residuals=residuals, step=step, gram_condition=condition
    )


def fit_first_step(panel: PanelSeries, embedding: "SpectralEmbedding | Matrix") -> FitResult:
    """Ordinary least squares over t = 2..T."""
    return _fit_cnar(panel, embedding, None, FitStep.FIRST)


def fit_second_step(
    panel: PanelSeries, embedding: "SpectralEmbedding | Matrix", cov: ErrCov
) -> FitResult:
    """Weighted least squares with Omega = Sigma_eps^{-1} applied through SMW."""
    return _fit_cnar(panel, embedding, precision_smw(cov), FitStep.SECOND)


def fit_nar(
    panel: PanelSeries,
    a_tilde: "AdjacencyMatrix | Matrix",
    weighting: ErrCov | None = None,
) -> NarFit:
    """(Weighted) least squares on the NAR design (A_tilde y, y, Z).

    An ``AdjacencyMatrix`` is row-normalized first; a plain matrix is used as given.
    """
    _require_lag(panel)
    if isinstance(a_tilde, AdjacencyMatrix):
        a_tilde = row_normalize(a_tilde)
    a_tilde = np.asarray(a_tilde, dtype=float)
    if a_tilde.shape != (panel.n, panel.n):
        raise CnarValidationError(
            f"a_tilde has shape {a_tilde.shape}, expected ({panel.n}, {panel.n})"
        )
    y_prev = panel.y[:-1]
    network = y_prev @ a_tilde.T
    x = np.concatenate([network[:, :, None], y_prev[:, :, None], panel.z[:-1]], axis=2)
    precision = precision_smw(weighting) if weighting is not None else None
    theta, condition, residuals = _weighted_least_squares(x, panel.y[1:], precision)
    return NarFit(
        beta1=float(theta[0]),
        beta2=float(theta[1]),
        gamma=theta[2:].copy(),
        residuals=residuals,
        gram_condition=condition,
        weighted=weighting is not None,
    )


@dataclass(frozen=True)
class TwoStepFit:
    first: FitResult
    errcov: ErrCov
    second: FitResult


class TwoStepEstimator:
    """First step, residual factor covariance, second step.

    Example:
        >>> estimator = TwoStepEstimator(k=2, m=3)
        >>> fit = estimator.fit(panel, spectral_embed(adjacency, 2))  # doctest: +SKIP
        >>> fit.second.params.b1.shape  # doctest: +SKIP
        (2, 2)
    """

    def __init__(self, k: int, m: int = 3):
        if k < 1:
            raise CnarValidationError(f"k must be positive, got {k}")
        if m < 1:
            raise CnarValidationError(f"factor count m must be positive, got {m}")
        self.k = k
        self.m = m

    def fit(self, panel: PanelSeries, embedding: "SpectralEmbedding | Matrix") -> TwoStepFit:
        u = _basis_of(embedding)
        if u.shape[1] != self.k:
            raise CnarValidationError(f"embedding has K={u.shape[1]}, estimator expects {self.k}")
        first = fit_first_step(panel, u)
        errcov = fit_poet(first.residuals, self.m)
        second = fit_second_step(panel, u, errcov)
        return TwoStepFit(first=first, errcov=errcov, second=second)


class FitRecord(BaseModel):
    """Flat JSON form of a FitResult; residuals are not serialized."""

    schema_version: Literal[1] = 1
    step: FitStep
    k: int = Field(ge=1)
    p: int = Field(ge=0)
    theta_layout: str = THETA_LAYOUT
    theta: list[float]
    b1: list[list[float]]
    beta2: float
    gamma: list[float]
    gram_condition: float
    provenance: dict[str, Any] = Field(default_factory=dict)


def fit_to_json(fit: FitResult, provenance: dict[str, Any] | None = None) -> str:
    record = FitRecord(
        step=fit.step,
        k=fit.k,
        p=fit.p,
        theta=pack_theta(fit.params).tolist(),
        b1=fit.params.b1.tolist(),
        beta2=fit.params.beta2,
        gamma=fit.params.gamma.tolist(),
        gram_condition=fit.gram_condition,
        provenance=provenance or {},
    )
    return record.model_dump_json(indent=2)


def fit_from_json(data: str | dict[str, Any]) -> FitResult:
    """Rebuild a FitResult (with an empty residual matrix) from ``fit_to_json`` output."""
    record = (
        FitRecord.model_validate_json(data)
        if isinstance(data, str)
        else FitRecord.model_validate(data)
    )
    params = unpack_theta(record.theta, record.k, record.p)
    return FitResult(
        theta_hat=pack_theta(params),
        params=params,
        residuals=np.zeros((0, 0)),
        step=record.step,
        gram_condition=record.gram_condition,
    )


def errcov_to_json(cov: ErrCov) -> str:
    return json.dumps(
        {
            "schema_version": 1,
            "n": cov.n,
            "m": cov.m,
            "lambda_hat": cov.lambda_hat.tolist(),
            "sigma_e_diag": cov.sigma_e_diag.tolist(),
            "factors_hat": cov.factors_hat.tolist(),
            "eigvals_resid": cov.eigvals_resid[: max(cov.m + 1, 20)].tolist(),
        },
        indent=2,
    )

"""Forecasts, relative error metrics and rolling-window backtests."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import CnarValidationError
from .estim import FitResult, NarFit, fit_first_step, fit_nar, fit_second_step
from .model import PanelSeries, build_design
from .net import AdjacencyMatrix, SpectralEmbedding, row_normalize
from .poet import fit_poet

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]


class BacktestMethod(str, Enum):
    CNAR1 = "cnar1"
    CNAR2 = "cnar2"
    NAR = "nar"


def _basis_of(embedding: "SpectralEmbedding | Matrix") -> Matrix:
    if isinstance(embedding, SpectralEmbedding):
        return embedding.u_hat
    return np.asarray(embedding, dtype=float)


def predict_one_step(
    fit: FitResult, embedding: "SpectralEmbedding | Matrix", y_last: Any, z_last: Any
) -> NDArray[np.float64]:
    """Signal forecast U B1 U^T y + beta2 y + Z gamma for the next time point."""
    u = _basis_of(embedding)
    y_last = np.asarray(y_last, dtype=float).reshape(-1)
    if u.shape != (y_last.size, fit.k):
        raise CnarValidationError(f"basis has shape {u.shape}, expected ({y_last.size}, {fit.k})")
    z_last = np.asarray(z_last, dtype=float).reshape(y_last.size, -1)
    if z_last.shape[1] != fit.p:
        raise CnarValidationError(f"z has {z_last.shape[1]} covariates, fit expects p={fit.p}")
    return np.asarray(build_design(y_last, z_last, u) @ fit.theta_hat)


def predict_nar(fit: NarFit, a_tilde: Any, y_last: Any, z_last: Any) -> NDArray[np.float64]:
    y_last = np.asarray(y_last, dtype=float).reshape(-1)
    a_tilde = np.asarray(a_tilde, dtype=float)
    z_last = np.asarray(z_last, dtype=float).reshape(y_last.size, -1)
    if a_tilde.shape != (y_last.size, y_last.size) or z_last.shape[1] != fit.gamma.size:
        raise CnarValidationError("NAR forecast inputs do not match the fitted model")
    return np.asarray(fit.beta1 * (a_tilde @ y_last) + fit.beta2 * y_last + z_last @ fit.gamma)


def remse(estimate: Any, truth: Any) -> float:
    """Relative Frobenius error ||estimate - truth||_F / ||truth||_F.

    Example:
        >>> remse(np.ones(4), 2 * np.ones(4))
        0.5
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise CnarValidationError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    scale = float(np.linalg.norm(truth))
    if scale == 0.0:
        raise CnarValidationError("relative error is undefined for an all-zero truth")
    return float(np.linalg.norm(estimate - truth)) / scale


def low_rank_remse(l_hat: Matrix, l_true: Matrix) -> float:
    """remse(L_hat L_hat^T, L L^T) computed from M x M products only."""
    l_hat = np.asarray(l_hat, dtype=float)
    l_true = np.asarray(l_true, dtype=float)
    if l_hat.shape[0] != l_true.shape[0]:
        raise CnarValidationError("loading matrices disagree on N")
    gram_hat = l_hat.T @ l_hat
    gram_true = l_true.T @ l_true
    cross = l_hat.T @ l_true
    truth_sq = float(np.sum(gram_true**2))
    if truth_sq == 0.0:
        raise CnarValidationError("relative error is undefined for all-zero loadings")
    diff_sq = float(np.sum(gram_hat**2)) - 2.0 * float(np.sum(cross**2)) + truth_sq
    return float(np.sqrt(max(diff_sq, 0.0) / truth_sq))


class RollingConfig(BaseModel):
    """Training window length, test horizon and the step between window starts."""

    model_config = ConfigDict(frozen=True)

    t_train: int = Field(default=150, ge=2)
    t_test: int = Field(default=25, ge=1)
    stride: int | None = Field(default=None, ge=1, description="Defaults to t_test")

    @property
    def step(self) -> int:
        return self.stride if self.stride is not None else self.t_test

    def window_count(self, t_len: int) -> int:
        """Windows that fit into a panel of length ``t_len`` (zero if none)."""
        span = self.t_train + self.t_test
        if t_len < span:
            return 0
        return (t_len - span) // self.step + 1


@dataclass(frozen=True)
class WindowScore:
    window: int
    method: BacktestMethod
    train_start: int
    test_start: int
    test_stop: int
    mspe: float
    mspe0: float
    remspe: float | None


def relative_mspe(mspe: float, mspe0: float) -> float | None:
    """MSPE / MSPE0, or None (with a warning) when the baseline error is zero."""
    if mspe0 == 0.0:
        logger.warning("Training-mean baseline predicts perfectly (MSPE0 = 0); ReMSPE is undefined")
        return None
    return mspe / mspe0


def _forecast_window(
    train: PanelSeries,
    lag_y: Matrix,
    lag_z: NDArray[np.float64],
    u: Matrix,
    a_tilde: Matrix | None,
    method: BacktestMethod,
    m: int,
) -> Matrix:
    """One-step forecasts of every test row from the observed previous row."""
    if method is BacktestMethod.NAR:
        assert a_tilde is not None
        nar = fit_nar(train, a_tilde)
        nar = fit_nar(train, a_tilde, weighting=fit_poet(nar.residuals, m))
        network = lag_y @ a_tilde.T
        return np.asarray(
            nar.beta1 * network + nar.beta2 * lag_y + np.einsum("tnp,p->tn", lag_z, nar.gamma)
        )

    fit = fit_first_step(train, u)
    if method is BacktestMethod.CNAR2:
        fit = fit_second_step(train, u, fit_poet(fit.residuals, m))
    b1, beta2, gamma = fit.params.b1, fit.params.beta2, fit.params.gamma
    network = (lag_y @ u) @ b1.T @ u.T
    return np.asarray(network + beta2 * lag_y + np.einsum("tnp,p->tn", lag_z, gamma))


def rolling_backtest(
    panel: PanelSeries,
    embedding: "SpectralEmbedding | Matrix",
    cfg: RollingConfig,
    method: BacktestMethod | str,
    m: int = 3,
    a_tilde: "AdjacencyMatrix | Matrix | None" = None,
) -> list[WindowScore]:
    """Fit on each training window and score one-step forecasts over its test window.

    Forecasts use the observed previous response, never an earlier forecast. The
    baseline predicts every test value by its node's training mean. ``a_tilde`` is
    required for the NAR method.
    """
    method = BacktestMethod(method)
    u = _basis_of(embedding)
    if u.shape[0] != panel.n:
        raise CnarValidationError(f"basis has {u.shape[0]} rows, panel has N={panel.n}")
    n_windows = cfg.window_count(panel.t_len)
    if n_windows == 0:
        raise CnarValidationError(
            f"panel length T={panel.t_len} is shorter than t_train + t_test = "
            f"{cfg.t_train + cfg.t_test}"
        )
    normalized: Matrix | None = None
    if method is BacktestMethod.NAR:
        if a_tilde is None:
            raise CnarValidationError("the NAR backtest needs the adjacency matrix")
        normalized = (
            row_normalize(a_tilde)
            if isinstance(a_tilde, AdjacencyMatrix)
            else np.asarray(a_tilde, dtype=float)
        )

    scores = []
    for w in range(n_windows):
        start = w * cfg.step
        test_start = start + cfg.t_train
        test_stop = test_start + cfg.t_test
        train_rows = np.arange(start, test_start)
        test_rows = np.arange(test_start, test_stop)
        assert train_rows.max() < test_rows.min(), "training rows overlap the test window"

        train = panel.window(start, test_start)
        test_y = panel.y[test_start:test_stop]
        lag_y = panel.y[test_start - 1 : test_stop - 1]
        lag_z = panel.z[test_start - 1 : test_stop - 1]
        forecast = _forecast_window(train, lag_y, lag_z, u, normalized, method, m)

        baseline = train.y.mean(axis=0)
        mspe = float(np.mean((forecast - test_y) ** 2))
        mspe0 = float(np.mean((baseline[None, :] - test_y) ** 2))
        scores.append(
            WindowScore(
                window=w,
                method=method,
                train_start=start,
                test_start=test_start,
                test_stop=test_stop,
                mspe=mspe,
                mspe0=mspe0,
                remspe=relative_mspe(mspe, mspe0),
            )
        )
        logger.debug("backtest %s window %d: mspe=%.4g mspe0=%.4g", method.value, w, mspe, mspe0)
    return scores


def backtest_frame(scores: dict[BacktestMethod, list[WindowScore]]) -> pd.DataFrame:
    """One row per window with ``mspe_<method>`` and ``remspe_<method>`` columns."""
    frame: pd.DataFrame | None = None
    for method, rows in scores.items():
        part = pd.DataFrame(
            {
                "window": [s.window for s in rows],
                "train_start": [s.train_start for s in rows],
                "test_start": [s.test_start for s in rows],
                "test_stop": [s.test_stop for s in rows],
                "mspe0": [s.mspe0 for s in rows],
                f"mspe_{method.value}": [s.mspe for s in rows],
                f"remspe_{method.value}": [s.remspe for s in rows],
            }
        )
        frame = part if frame is None else frame.merge(
            part, on=["window", "train_start", "test_start", "test_stop", "mspe0"]
        )
    if frame is None:
        raise CnarValidationError("no backtest scores to tabulate")
    return frame

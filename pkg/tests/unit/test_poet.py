"""Unit tests for the factor error covariance and its precision operator."""

import logging

import numpy as np
import pytest

from py_cnar.core.model import FactorNoiseSpec
from py_cnar.core.poet import (
    ErrCov,
    PrecisionOperator,
    fit_poet,
    precision_deviation,
    precision_smw,
    select_num_factors,
)
from py_cnar.core.rng import make_rng
from py_cnar.exceptions import CnarValidationError


def _exact_factor_panel(t_len: int, n: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Residuals F L^T with F^T F / T = I exactly, and the loadings L."""
    rng = make_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((t_len, m)))
    factors = np.sqrt(t_len) * q
    loadings = rng.standard_normal((n, m)) + 1.0
    return factors @ loadings.T, loadings


@pytest.mark.parametrize(("t_len", "n"), [(20, 30), (40, 10)])
def test_fit_poet_recovers_exact_low_rank(
    t_len: int, n: int, caplog: pytest.LogCaptureFixture
) -> None:
    """Test recovery of L L^T from noise-free factor residuals (primal and dual paths)."""
    residuals, loadings = _exact_factor_panel(t_len, n, 2, seed=t_len)

    with caplog.at_level(logging.WARNING, logger="py_cnar.core.poet"):
        cov = fit_poet(residuals, 2)

    np.testing.assert_allclose(
        cov.lambda_hat @ cov.lambda_hat.T, loadings @ loadings.T, atol=1e-8
    )
    np.testing.assert_allclose(cov.sigma_e_diag, 1e-8)
    assert "flooring" in caplog.text


def test_fit_poet_identification(rng: np.random.Generator) -> None:
    """Test F^T F / T = I and L = E^T F / T on random residuals."""
    residuals = rng.standard_normal((50, 30))

    cov = fit_poet(residuals, 3)

    np.testing.assert_allclose(cov.factors_hat.T @ cov.factors_hat / 50, np.eye(3), atol=1e-8)
    np.testing.assert_allclose(cov.lambda_hat, residuals.T @ cov.factors_hat / 50, atol=1e-12)
    assert cov.m == 3
    assert cov.n == 30
    assert np.all(np.diff(cov.eigvals_resid) <= 0)


def test_fit_poet_idiosyncratic_variance_of_white_noise() -> None:
    residuals = make_rng(21).standard_normal((200, 200))

    cov = fit_poet(residuals, 1)

    deviation = np.abs(cov.sigma_e_diag - 1.0)
    assert np.median(deviation) <= 0.1
    assert deviation.max() <= 0.5


def test_fit_poet_rejects_bad_factor_count(rng: np.random.Generator) -> None:
    residuals = rng.standard_normal((10, 8))

    with pytest.raises(CnarValidationError, match="factor count"):
        fit_poet(residuals, 0)
    with pytest.raises(CnarValidationError, match="factor count"):
        fit_poet(residuals, 8)


def test_fit_poet_rejects_non_finite(rng: np.random.Generator) -> None:
    residuals = rng.standard_normal((10, 8))
    residuals[2, 3] = np.nan

    with pytest.raises(CnarValidationError, match="non-finite"):
        fit_poet(residuals, 1)


def test_precision_without_loadings_is_diagonal_inverse() -> None:
    sigma = np.array([0.5, 2.0, 4.0])

    op = PrecisionOperator(sigma, np.zeros((3, 2)))

    np.testing.assert_allclose(op.to_dense(), np.diag(1.0 / sigma))


def test_precision_of_identity_covariance() -> None:
    op = precision_smw(ErrCov.identity(4))

    assert op.m == 0
    np.testing.assert_array_equal(op.to_dense(), np.eye(4))


def test_precision_single_unit_factor() -> None:
    """Test (I + e1 e1^T)^{-1} = I - e1 e1^T / 2."""
    loadings = np.zeros((3, 1))
    loadings[0, 0] = 1.0

    op = PrecisionOperator(np.ones(3), loadings)

    np.testing.assert_allclose(op.to_dense(), np.diag([0.5, 1.0, 1.0]), atol=1e-14)


def test_precision_matches_dense_inverse() -> None:
    """Test the Woodbury operator against the dense inverse on random instances."""
    rng = make_rng(31)
    for _ in range(50):
        loadings = rng.standard_normal((5, 2))
        sigma = rng.uniform(0.5, 2.0, size=5)
        cov = ErrCov(
            lambda_hat=loadings,
            sigma_e_diag=sigma,
            factors_hat=np.zeros((0, 2)),
            eigvals_resid=np.zeros(0),
        )

        omega = precision_smw(cov).to_dense()

        np.testing.assert_allclose(omega @ cov.covariance(), np.eye(5), atol=1e-8)
        np.testing.assert_allclose(omega, np.linalg.inv(cov.covariance()), atol=1e-10)


def test_precision_applies_to_blocks() -> None:
    rng = make_rng(5)
    op = PrecisionOperator(rng.uniform(1.0, 2.0, size=6), rng.standard_normal((6, 2)))
    block = rng.standard_normal((6, 4))

    np.testing.assert_allclose(op.apply(block), op.to_dense() @ block, atol=1e-12)
    np.testing.assert_allclose(op.apply(block[:, 0]), op.to_dense() @ block[:, 0], atol=1e-12)


def test_errcov_rejects_non_positive_variance() -> None:
    with pytest.raises(CnarValidationError, match="positive"):
        ErrCov(
            lambda_hat=np.zeros((2, 1)),
            sigma_e_diag=np.array([1.0, 0.0]),
            factors_hat=np.zeros((0, 1)),
            eigvals_resid=np.zeros(0),
        )


def test_select_num_factors_finds_rank() -> None:
    """Test the eigenvalue-ratio rule on two strong factors plus jitter."""
    rng = make_rng(41)
    t_len, n = 40, 30
    q, _ = np.linalg.qr(rng.standard_normal((t_len, 2)))
    basis, _ = np.linalg.qr(rng.standard_normal((n, 2)))
    loadings = basis * np.array([3.0, 2.0]) * np.sqrt(n)
    residuals = np.sqrt(t_len) * q @ loadings.T + 1e-6 * rng.standard_normal((t_len, n))

    selection = select_num_factors(residuals, m_max=5)

    assert selection.suggested_m == 2
    assert selection.ratios.size == 5
    assert select_num_factors(residuals, m_max=1).suggested_m == 1


def test_select_num_factors_equal_spectrum(caplog: pytest.LogCaptureFixture) -> None:
    """Test that a flat spectrum defaults to one factor with a warning."""
    q, _ = np.linalg.qr(make_rng(3).standard_normal((20, 10)))
    residuals = 2.0 * q

    with caplog.at_level(logging.WARNING, logger="py_cnar.core.poet"):
        selection = select_num_factors(residuals, m_max=3)

    assert selection.suggested_m == 1
    assert "all equal" in caplog.text


def test_select_num_factors_rejects_large_m_max(rng: np.random.Generator) -> None:
    with pytest.raises(CnarValidationError, match="m_max"):
        select_num_factors(rng.standard_normal((20, 10)), m_max=5)


def test_precision_deviation_of_exact_estimate() -> None:
    loadings = make_rng(8).standard_normal((6, 2))
    truth = FactorNoiseSpec(loadings, sigma_e=0.7)
    estimate = ErrCov(
        lambda_hat=loadings,
        sigma_e_diag=np.full(6, 0.7),
        factors_hat=np.zeros((0, 2)),
        eigvals_resid=np.zeros(0),
    )

    assert precision_deviation(estimate, truth) == pytest.approx(0.0, abs=1e-10)

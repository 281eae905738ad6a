"""Unit tests for the two-step CNAR estimator and the NAR baseline."""

import json

import numpy as np
import pytest

from py_cnar.core.estim import (
    THETA_LAYOUT,
    FitStep,
    TwoStepEstimator,
    errcov_to_json,
    fit_first_step,
    fit_from_json,
    fit_nar,
    fit_second_step,
    fit_to_json,
)
from py_cnar.core.model import PanelSeries, pack_theta, stack_designs
from py_cnar.core.net import spectral_embed
from py_cnar.core.poet import ErrCov, fit_poet
from py_cnar.core.rng import make_rng
from py_cnar.core.scenario import Scenario, ScenarioSpec, build_scenario
from py_cnar.exceptions import CnarValidationError, EstimationError


def test_first_step_recovers_noiseless_parameters(noiseless_scenario: Scenario) -> None:
    """Test exact recovery of theta when the data carry no noise."""
    embedding = spectral_embed(noiseless_scenario.adjacency, 2)

    fit = fit_first_step(noiseless_scenario.panel, embedding)

    np.testing.assert_allclose(
        fit.theta_hat, pack_theta(noiseless_scenario.params), rtol=0, atol=1e-8
    )
    assert fit.step is FitStep.FIRST
    assert fit.residuals.shape == (59, 40)
    assert np.abs(fit.residuals).max() < 1e-8


def test_first_step_matches_stacked_least_squares() -> None:
    """Test a three-node, four-period panel against an explicitly stacked OLS."""
    rng = make_rng(17)
    y = rng.standard_normal((4, 3))
    u = np.ones((3, 1)) / np.sqrt(3.0)
    panel = PanelSeries(y=y, z=np.zeros((4, 3, 0)))

    fit = fit_first_step(panel, u)

    rows, targets = [], []
    for t in range(1, 4):
        w = float(y[t - 1] @ u[:, 0])
        for i in range(3):
            rows.append([w * u[i, 0], y[t - 1, i]])
            targets.append(y[t, i])
    x, target = np.array(rows), np.array(targets)
    expected = np.linalg.solve(x.T @ x, x.T @ target)
    np.testing.assert_allclose(fit.theta_hat, expected, atol=1e-10)


def test_residuals_are_orthogonal_to_design(factor_scenario: Scenario) -> None:
    embedding = spectral_embed(factor_scenario.adjacency, 2)

    fit = fit_first_step(factor_scenario.panel, embedding)

    x, y = stack_designs(factor_scenario.panel, embedding.u_hat)
    np.testing.assert_allclose(
        fit.residuals, y - np.einsum("tnd,d->tn", x, fit.theta_hat), atol=1e-12
    )
    score = np.einsum("tnd,tn->d", x, fit.residuals)
    assert np.abs(score).max() < 1e-8 * np.abs(y).sum()


def test_identity_weighting_equals_first_step(factor_scenario: Scenario) -> None:
    embedding = spectral_embed(factor_scenario.adjacency, 2)
    panel = factor_scenario.panel

    first = fit_first_step(panel, embedding)
    second = fit_second_step(panel, embedding, ErrCov.identity(panel.n))

    assert second.step is FitStep.SECOND
    np.testing.assert_allclose(second.theta_hat, first.theta_hat, rtol=1e-9, atol=1e-12)


def test_second_step_matches_dense_gls() -> None:
    """Test the Woodbury-weighted fit against GLS with an explicit inverse covariance."""
    rng = make_rng(23)
    n, t_len = 4, 6
    y = rng.standard_normal((t_len, n))
    z = rng.standard_normal((t_len, n, 1))
    u = np.linalg.qr(rng.standard_normal((n, 1)))[0]
    cov = ErrCov(
        lambda_hat=rng.standard_normal((n, 1)),
        sigma_e_diag=rng.uniform(0.5, 1.5, size=n),
        factors_hat=np.zeros((0, 1)),
        eigvals_resid=np.zeros(0),
    )
    panel = PanelSeries(y=y, z=z)

    fit = fit_second_step(panel, u, cov)

    omega = np.linalg.inv(cov.covariance())
    x, target = stack_designs(panel, u)
    gram = sum(x[t].T @ omega @ x[t] for t in range(t_len - 1))
    rhs = sum(x[t].T @ omega @ target[t] for t in range(t_len - 1))
    np.testing.assert_allclose(fit.theta_hat, np.linalg.solve(gram, rhs), atol=1e-10)


def test_second_step_rejects_mismatched_covariance(factor_scenario: Scenario) -> None:
    embedding = spectral_embed(factor_scenario.adjacency, 2)

    with pytest.raises(CnarValidationError, match="weighting covariance has N=5"):
        fit_second_step(factor_scenario.panel, embedding, ErrCov.identity(5))


def test_collinear_covariates_raise_estimation_error() -> None:
    """Test that a duplicated covariate column makes the Gram matrix singular."""
    rng = make_rng(29)
    column = rng.standard_normal((30, 10, 1))
    panel = PanelSeries(y=rng.standard_normal((30, 10)), z=np.concatenate([column, column], 2))
    u = np.ones((10, 1)) / np.sqrt(10.0)

    with pytest.raises(EstimationError, match="ill-conditioned"):
        fit_first_step(panel, u)


def test_fit_requires_enough_observations() -> None:
    panel = PanelSeries(y=np.ones((2, 3)), z=np.zeros((2, 3, 0)))
    u = np.eye(3)[:, :2]

    with pytest.raises(CnarValidationError, match="cannot be identified"):
        fit_first_step(panel, u)


def test_fit_requires_a_lag() -> None:
    panel = PanelSeries(y=np.ones((1, 3)), z=np.zeros((1, 3, 0)))

    with pytest.raises(CnarValidationError, match="at least two time points"):
        fit_first_step(panel, np.eye(3)[:, :1])


def test_nar_recovers_noiseless_parameters() -> None:
    spec = ScenarioSpec(n=40, k=2, t_len=60, dgp="nar", gamma=(-0.1, 0.2), noiseless=True)
    scenario = build_scenario(spec, make_rng(13))

    fit = fit_nar(scenario.panel, scenario.a_tilde)

    assert fit.beta1 == pytest.approx(0.5, abs=1e-8)
    assert fit.beta2 == pytest.approx(0.3, abs=1e-8)
    np.testing.assert_allclose(fit.gamma, [-0.1, 0.2], atol=1e-8)
    assert not fit.weighted
    np.testing.assert_allclose(fit.theta_hat, [0.5, 0.3, -0.1, 0.2], atol=1e-8)


def test_nar_normalizes_adjacency(factor_scenario: Scenario) -> None:
    from_matrix = fit_nar(factor_scenario.panel, factor_scenario.a_tilde)
    from_adjacency = fit_nar(factor_scenario.panel, factor_scenario.adjacency)

    np.testing.assert_allclose(from_adjacency.theta_hat, from_matrix.theta_hat, atol=1e-12)


def test_nar_identity_weighting_equals_unweighted(factor_scenario: Scenario) -> None:
    panel = factor_scenario.panel

    plain = fit_nar(panel, factor_scenario.a_tilde)
    weighted = fit_nar(panel, factor_scenario.a_tilde, weighting=ErrCov.identity(panel.n))

    assert weighted.weighted
    np.testing.assert_allclose(weighted.theta_hat, plain.theta_hat, rtol=1e-9, atol=1e-12)


def test_nar_rejects_wrong_shape(factor_scenario: Scenario) -> None:
    with pytest.raises(CnarValidationError, match="a_tilde has shape"):
        fit_nar(factor_scenario.panel, np.eye(3))


def test_two_step_estimator(factor_scenario: Scenario) -> None:
    embedding = spectral_embed(factor_scenario.adjacency, 2)

    result = TwoStepEstimator(k=2, m=3).fit(factor_scenario.panel, embedding)

    assert result.first.step is FitStep.FIRST
    assert result.second.step is FitStep.SECOND
    assert result.errcov.m == 3
    assert result.errcov.n == factor_scenario.panel.n
    assert result.second.params.b1.shape == (2, 2)


def test_two_step_estimator_validates_arguments(factor_scenario: Scenario) -> None:
    with pytest.raises(CnarValidationError, match="k must be positive"):
        TwoStepEstimator(k=0)
    with pytest.raises(CnarValidationError, match="factor count"):
        TwoStepEstimator(k=2, m=0)
    with pytest.raises(CnarValidationError, match="estimator expects 3"):
        TwoStepEstimator(k=3).fit(
            factor_scenario.panel, spectral_embed(factor_scenario.adjacency, 2)
        )


def test_fit_json_round_trip(factor_scenario: Scenario) -> None:
    fit = fit_first_step(factor_scenario.panel, spectral_embed(factor_scenario.adjacency, 2))

    text = fit_to_json(fit, provenance={"seed": 12})
    record = json.loads(text)
    restored = fit_from_json(text)

    assert record["theta_layout"] == THETA_LAYOUT
    assert record["provenance"] == {"seed": 12}
    assert len(record["theta"]) == 4 + 1 + 5
    np.testing.assert_array_equal(restored.theta_hat, fit.theta_hat)
    assert restored.step is FitStep.FIRST
    assert restored.residuals.size == 0


def test_errcov_json_keeps_leading_eigenvalues(factor_scenario: Scenario) -> None:
    fit = fit_first_step(factor_scenario.panel, spectral_embed(factor_scenario.adjacency, 2))
    cov = fit_poet(fit.residuals, 3)

    record = json.loads(errcov_to_json(cov))

    assert record["m"] == 3
    assert record["n"] == 60
    assert len(record["lambda_hat"]) == 60
    assert len(record["eigvals_resid"]) == 20

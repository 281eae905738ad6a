"""CNAR / NAR parameters, stationarity checks and panel simulation.

The CNAR recursion in its spectral form is

    y_t = U B1 U^T y_{t-1} + beta2 y_{t-1} + Z_{t-1} gamma + Lambda f_t + e_t

and the NAR baseline replaces U B1 U^T by beta1 times the row-normalized
adjacency matrix. The coefficient vector theta stacks vec(B1) (column-major),
then beta2, then gamma.
"""

import logging
import os
import tempfile
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import cholesky

from ..constants import DEFAULT_BURN_IN, EXAMPLE_B1_SEQUENCE_STEP, ORTHONORMAL_TOL
from ..exceptions import CnarValidationError, StationarityError
from .net import SbmSpec
from .rng import make_rng

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]
Vector = NDArray[np.float64]

# Key for the fixed loading matrices; one draw per (N, M) pair.
LOADINGS_SEED = 20_231_017


@dataclass(frozen=True)
class CnarParams:
    """Community effects ``b1`` (K x K), momentum ``beta2`` and covariate effects ``gamma``."""

    b1: Matrix
    beta2: float
    gamma: Vector = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        b1 = np.atleast_2d(np.asarray(self.b1, dtype=float))
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        if b1.shape[0] != b1.shape[1] or b1.shape[0] < 1:
            raise CnarValidationError(f"b1 must be a non-empty square matrix, got {b1.shape}")
        if not (np.isfinite(b1).all() and np.isfinite(gamma).all() and np.isfinite(self.beta2)):
            raise CnarValidationError("CNAR parameters must be finite")
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "beta2", float(self.beta2))

    @property
    def k(self) -> int:
        return int(self.b1.shape[0])

    @property
    def p(self) -> int:
        return int(self.gamma.size)

    @property
    def dim(self) -> int:
        return self.k * self.k + self.p + 1


def pack_theta(params: CnarParams) -> Vector:
    """theta = (vec(B1)^T, beta2, gamma^T)^T with column-major vec."""
    return np.concatenate([params.b1.flatten(order="F"), [params.beta2], params.gamma])


def unpack_theta(theta: Any, k: int, p: int) -> CnarParams:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    expected = k * k + p + 1
    if theta.size != expected:
        raise CnarValidationError(
            f"theta has length {theta.size}, expected K^2 + p + 1 = {expected} (K={k}, p={p})"
        )
    b1 = theta[: k * k].reshape((k, k), order="F")
    return CnarParams(b1=b1, beta2=float(theta[k * k]), gamma=theta[k * k + 1 :].copy())


@dataclass(frozen=True)
class StationarityReport:
    spectral_radius: float
    singular_value: float
    spectral_radius_margin: float
    singular_value_margin: float
    is_stationary: bool
    meets_estimation_condition: bool


def check_stationarity(params: CnarParams) -> StationarityReport:
    """rho(B1) + |beta2| < 1 guarantees a stationary solution; sigma1(B1) + |beta2| < 1
    is the stronger condition the estimation theory assumes."""
    rho = float(np.max(np.abs(np.linalg.eigvals(params.b1))))
    sigma1 = float(np.linalg.norm(params.b1, 2))
    rho_margin = 1.0 - (rho + abs(params.beta2))
    sigma_margin = 1.0 - (sigma1 + abs(params.beta2))
    return StationarityReport(
        spectral_radius=rho,
        singular_value=sigma1,
        spectral_radius_margin=rho_margin,
        singular_value_margin=sigma_margin,
        is_stationary=rho_margin > 0,
        meets_estimation_condition=sigma_margin > 0,
    )


@dataclass(frozen=True)
class FactorNoiseSpec:
    """eps_t = loadings f_t + e_t with f_t ~ N(0, sigma_f) and e_t ~ N(0, sigma_e I)."""

    loadings: Matrix
    sigma_e: float = 1.0
    sigma_f: Matrix | None = None

    def __post_init__(self) -> None:
        loadings = np.asarray(self.loadings, dtype=float)
        if loadings.ndim != 2:
            raise CnarValidationError("loadings must be an N x M matrix")
        m = loadings.shape[1]
        sigma_f = np.eye(m) if self.sigma_f is None else np.asarray(self.sigma_f, dtype=float)
        if sigma_f.shape != (m, m):
            raise CnarValidationError(f"sigma_f has shape {sigma_f.shape}, expected ({m}, {m})")
        if not np.allclose(sigma_f, sigma_f.T):
            raise CnarValidationError("sigma_f must be symmetric")
        if m and np.linalg.eigvalsh(sigma_f).min() < -1e-10:
            raise CnarValidationError("sigma_f must be positive semidefinite")
        if not self.sigma_e > 0:
            raise CnarValidationError(f"sigma_e must be positive, got {self.sigma_e}")
        object.__setattr__(self, "loadings", loadings)
        object.__setattr__(self, "sigma_f", sigma_f)

    @property
    def n(self) -> int:
        return int(self.loadings.shape[0])

    @property
    def m(self) -> int:
        return int(self.loadings.shape[1])

    def covariance(self) -> Matrix:
        """Sigma_eps = Lambda Sigma_f Lambda^T + sigma_e I (dense, for small N)."""
        assert self.sigma_f is not None
        return self.loadings @ self.sigma_f @ self.loadings.T + self.sigma_e * np.eye(self.n)

    def factor_root(self) -> Matrix:
        """Lower factor L with L L^T = Sigma_f (PSD-safe)."""
        assert self.sigma_f is not None
        if self.m == 0:
            return np.zeros((0, 0))
        try:
            return np.asarray(cholesky(self.sigma_f, lower=True))
        except np.linalg.LinAlgError:
            vals, vecs = np.linalg.eigh(self.sigma_f)
            return np.asarray(vecs * np.sqrt(np.clip(vals, 0.0, None)))


@dataclass(frozen=True)
class PanelSeries:
    """Responses ``y`` (T x N), covariates ``z`` (T x N x p) and optional ``signal`` (T x N).

    Row t of ``z`` holds Z_t, which enters the prediction of y_{t+1}.
    """

    y: Matrix
    z: NDArray[np.float64]
    signal: Matrix | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 2:
            raise CnarValidationError(f"y must be T x N, got shape {y.shape}")
        z = np.asarray(self.z, dtype=float)
        if z.size == 0:
            z = np.zeros((y.shape[0], y.shape[1], 0))
        if z.ndim != 3 or z.shape[:2] != y.shape:
            raise CnarValidationError(f"z must be T x N x p aligned with y, got shape {z.shape}")
        if not (np.isfinite(y).all() and np.isfinite(z).all()):
            raise CnarValidationError("panel contains non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        if self.signal is not None:
            signal = np.asarray(self.signal, dtype=float)
            if signal.shape != y.shape:
                raise CnarValidationError("signal must have the same shape as y")
            object.__setattr__(self, "signal", signal)

    @property
    def t_len(self) -> int:
        return int(self.y.shape[0])

    @property
    def n(self) -> int:
        return int(self.y.shape[1])

    @property
    def p(self) -> int:
        return int(self.z.shape[2])

    def window(self, start: int, stop: int) -> "PanelSeries":
        """Rows ``start:stop`` as a new panel."""
        signal = None if self.signal is None else self.signal[start:stop]
        return PanelSeries(y=self.y[start:stop], z=self.z[start:stop], signal=signal)


def build_design(y_prev: Any, z_prev: Any, u: Any) -> Matrix:
    """X_{t-1} = ((y^T U) kron U, y, Z) so that X theta = U B1 U^T y + beta2 y + Z gamma."""
    y_prev = np.asarray(y_prev, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float)
    n = y_prev.size
    z_prev = np.asarray(z_prev, dtype=float).reshape(n, -1) if np.size(z_prev) else np.zeros((n, 0))
    if u.ndim != 2 or u.shape[0] != n:
        raise CnarValidationError(f"u has shape {u.shape}, expected ({n}, K)")
    if z_prev.shape[0] != n:
        raise CnarValidationError(f"z has {z_prev.shape[0]} rows, expected {n}")
    w = (y_prev @ u)[None, :]
    return np.hstack([np.kron(w, u), y_prev[:, None], z_prev])


def stack_designs(panel: PanelSeries, u: Any) -> tuple[NDArray[np.float64], Matrix]:
    """All designs X_{t-1} for t = 2..T as a (T-1) x N x d array, with responses y_2..y_T."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != panel.n:
        raise CnarValidationError(f"u has shape {u.shape}, expected ({panel.n}, K)")
    y_prev = panel.y[:-1]
    w = y_prev @ u
    t1, n, k = y_prev.shape[0], panel.n, u.shape[1]
    # column j*K + i holds (y^T U)_j * U[:, i]
    kron = np.einsum("tj,ni->tnji", w, u).reshape(t1, n, k * k)
    x = np.concatenate([kron, y_prev[:, :, None], panel.z[:-1]], axis=2)
    return x, panel.y[1:]


def _check_orthonormal(u: Matrix) -> None:
    err = np.abs(u.T @ u - np.eye(u.shape[1])).max()
    if err > 1e3 * ORTHONORMAL_TOL:
        raise CnarValidationError(f"basis columns are not orthonormal (max error {err:.2e})")


def _simulate(
    apply_phi: Callable[[Vector], Vector],
    beta2: float,
    gamma: Vector,
    noise: FactorNoiseSpec | None,
    n: int,
    t_len: int,
    burn_in: int,
    rng: np.random.Generator,
    y0: Vector | None,
) -> PanelSeries:
    if t_len < 1:
        raise CnarValidationError(f"t_len must be positive, got {t_len}")
    if burn_in < 0:
        raise CnarValidationError(f"burn_in must be non-negative, got {burn_in}")
    if noise is not None and noise.n != n:
        raise CnarValidationError(f"noise loadings have {noise.n} rows, expected {n}")
    p = gamma.size
    root = noise.factor_root() if noise is not None else None
    scale_e = np.sqrt(noise.sigma_e) if noise is not None else 0.0

    y_prev = np.zeros(n) if y0 is None else np.asarray(y0, dtype=float).reshape(n).copy()
    z_prev = rng.standard_normal((n, p))
    ys = np.empty((t_len, n))
    zs = np.empty((t_len, n, p))
    signals = np.empty((t_len, n))

    for step in range(burn_in + t_len):
        s = apply_phi(y_prev) + beta2 * y_prev + z_prev @ gamma
        if noise is not None and root is not None:
            f = root @ rng.standard_normal(noise.m)
            e = scale_e * rng.standard_normal(n)
            y = s + noise.loadings @ f + e
        else:
            y = s
        z_next = rng.standard_normal((n, p))
        if step >= burn_in:
            row = step - burn_in
            ys[row] = y
            zs[row] = z_next
            signals[row] = s
        y_prev, z_prev = y, z_next

    return PanelSeries(y=ys, z=zs, signal=signals)


def simulate_cnar(
    u: Any,
    params: CnarParams,
    noise: FactorNoiseSpec | None,
    t_len: int,
    rng: np.random.Generator,
    burn_in: int = DEFAULT_BURN_IN,
    y0: Any = None,
    allow_nonstationary: bool = False,
) -> PanelSeries:
    """Simulate the CNAR recursion with Phi = U B1 U^T.

    ``noise=None`` injects exactly zero noise. Non-stationary parameters are
    refused unless ``allow_nonstationary`` is set.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[1] != params.k:
        raise CnarValidationError(f"basis has shape {u.shape}, expected (N, {params.k})")
    _check_orthonormal(u)
    report = check_stationarity(params)
    if not report.is_stationary and not allow_nonstationary:
        raise StationarityError(
            f"rho(B1) + |beta2| = {report.spectral_radius + abs(params.beta2):.4f} >= 1; "
            "refusing to simulate a non-stationary CNAR process",
            margin=report.spectral_radius_margin,
        )
    b1 = params.b1

    def apply_phi(y: Vector) -> Vector:
        return np.asarray(u @ (b1 @ (y @ u)))

    logger.debug(
        "simulate_cnar n=%d k=%d p=%d t_len=%d burn_in=%d margin=%.3f",
        u.shape[0], params.k, params.p, t_len, burn_in, report.spectral_radius_margin,
    )
    return _simulate(apply_phi, params.beta2, params.gamma, noise, u.shape[0], t_len, burn_in,
                     rng, y0)


def simulate_nar(
    a_tilde: Any,
    beta1: float,
    beta2: float,
    gamma: Any,
    noise: FactorNoiseSpec | None,
    t_len: int,
    rng: np.random.Generator,
    burn_in: int = DEFAULT_BURN_IN,
    y0: Any = None,
    allow_nonstationary: bool = False,
) -> PanelSeries:
    """Simulate the NAR recursion with Phi = beta1 * A_tilde."""
    a_tilde = np.asarray(a_tilde, dtype=float)
    if a_tilde.ndim != 2 or a_tilde.shape[0] != a_tilde.shape[1]:
        raise CnarValidationError(f"a_tilde must be square, got shape {a_tilde.shape}")
    if abs(beta1) + abs(beta2) >= 1 and not allow_nonstationary:
        raise StationarityError(
            f"|beta1| + |beta2| = {abs(beta1) + abs(beta2):.4f} >= 1; "
            "refusing to simulate a non-stationary NAR process",
            margin=1.0 - (abs(beta1) + abs(beta2)),
        )
    gamma = np.asarray(gamma, dtype=float).reshape(-1)

    def apply_phi(y: Vector) -> Vector:
        return np.asarray(beta1 * (a_tilde @ y))

    return _simulate(apply_phi, float(beta2), gamma, noise, a_tilde.shape[0], t_len, burn_in,
                     rng, y0)


def _theta_of(membership: "SbmSpec | Matrix") -> Matrix:
    return membership.theta if isinstance(membership, SbmSpec) else np.asarray(membership, float)


def nar_equivalent_b(beta1: float, a_tilde: Any, membership: "SbmSpec | Matrix") -> Matrix:
    """B = beta1 D1^{-1} Theta^T A_tilde Theta D1^{-1}, with D1 = Theta^T Theta."""
    theta = _theta_of(membership)
    sizes = theta.sum(axis=0)
    if (sizes == 0).any():
        raise CnarValidationError(
            f"communities {np.flatnonzero(sizes == 0).tolist()} have no members"
        )
    d_inv = 1.0 / sizes
    inner = theta.T @ np.asarray(a_tilde, dtype=float) @ theta
    return np.asarray(beta1 * d_inv[:, None] * inner * d_inv[None, :])


def community_totals(y_t: Any, membership: "SbmSpec | Matrix") -> Vector:
    """eta_t = Theta^T y_t, the total response within each community."""
    return np.asarray(_theta_of(membership).T @ np.asarray(y_t, dtype=float))


def example_b1(k: int) -> Matrix:
    """diag of the first K numbers of 0.1, -0.1, 0.2, -0.2, 0.3, ..."""
    idx = np.arange(k)
    values = EXAMPLE_B1_SEQUENCE_STEP * (idx // 2 + 1) * np.where(idx % 2 == 0, 1.0, -1.0)
    return np.diag(values)


def loading_signs(n: int, m: int) -> Matrix:
    """+1/-1 pattern whose column j alternates over 2**j equal runs of the node order."""
    if n < 1 or m < 0:
        raise CnarValidationError(f"loading_signs needs n >= 1 and m >= 0, got n={n}, m={m}")
    runs = (np.arange(n)[:, None] * (2 ** np.arange(m))[None, :]) // n
    return np.where(runs % 2 == 0, 1.0, -1.0)


def example_loadings(n: int, m: int, cache_dir: str | Path | None = None) -> Matrix:
    """Loadings with N(1, 1) magnitudes under the :func:`loading_signs` pattern.

    Drawn once per (N, M) and optionally cached as .npy. The sign pattern spreads
    the factors over every community direction instead of piling them on the
    all-ones vector; the first column keeps the plain N(1, 1) draw.
    """
    path = Path(cache_dir) / f"signed_loadings_N{n}_M{m}.npy" if cache_dir is not None else None
    if path is not None and path.exists():
        cached = np.load(path)
        if cached.shape == (n, m):
            return np.asarray(cached, dtype=float)
        logger.warning("Ignoring cached loadings %s with shape %s", path, cached.shape)

    magnitudes = make_rng(LOADINGS_SEED, n, m).normal(1.0, 1.0, size=(n, m))
    loadings = loading_signs(n, m) * magnitudes
    if path is not None:
        _save_atomic(path, loadings)
    return loadings


def _save_atomic(path: Path, array: Matrix) -> None:
    # unique temp name per writer, so parallel workers never share a partial file
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.stem + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            np.save(f, array)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise

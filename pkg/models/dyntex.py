"""
Dynamic texture models: a linear dynamical system fitted to each cube.

    x_{t+1} = A x_t + v_t,   v_t ~ N(0, diag(state_noise_scale)^2)
    y_t     = C x_t + y_mean + w_t,   w_t ~ N(0, obs_noise_var I)

Fitting is closed-form subspace identification: SVD of the mean-centred
observation matrix gives C and the states, least squares gives A.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from utils.errors import ConfigurationError, DimensionMismatchError, NumericError
from utils.logger import Logger
from video.cubes import Cube, CubeGrid

logger = Logger.get_logger(__name__)

# slices closer than this to their temporal mean count as static
ZERO_VARIANCE_TOL = 1e-12
# singular values below this fraction of the largest are numerically zero
RANK_TOL = 1e-10
N_EXTRA_FEATURES = 4


@dataclass(frozen=True, eq=False)
class LdsParams:
    """
    Fitted dynamic-texture parameters.

    Attributes:
        A: (n, n) state transition matrix
        C: (d, n) observation matrix with orthonormal columns
        y_mean: (d,) temporal mean of the observations
        state_noise_scale: (n,) per-dimension innovation standard deviations
        obs_noise_var: scalar observation noise variance
        recon_error: RMS residual of the rank-n reconstruction
    """

    A: np.ndarray
    C: np.ndarray
    y_mean: np.ndarray
    state_noise_scale: np.ndarray
    obs_noise_var: float
    recon_error: float
    degenerate: bool = False

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def d(self) -> int:
        return int(self.C.shape[0])


def _check_state_dim(n: int, d: int, q: int) -> None:
    if n < 1:
        raise ConfigurationError(f"state dimension must be >= 1, got {n}")
    if n > min(d, q - 1):
        raise ConfigurationError(
            f"state dimension {n} exceeds min(p*p={d}, q-1={q - 1}); lower --state-dim or raise --cube-q"
        )


def degenerate_params(y_mean: np.ndarray, n: int) -> LdsParams:
    """Parameters for a cube whose slices never change."""
    d = y_mean.shape[0]
    return LdsParams(
        A=np.zeros((n, n)),
        C=np.eye(d, n),
        y_mean=y_mean,
        state_noise_scale=np.zeros(n),
        obs_noise_var=0.0,
        recon_error=0.0,
        degenerate=True,
    )


def fit_lds(cube: Cube, n: int) -> LdsParams:
    """
    Fit a dynamic texture to one cube.

    Each of the q slices is flattened to a d = p*p vector. The rank-n SVD of the
    centred d x q matrix gives C (left singular vectors) and the states
    X = S_n V_n^T. A is the least-squares map X[:, 1:] ~ A X[:, :-1]; because the
    states are centred over the whole window, the recursion carries a constant drift
    (A - I) x_mean, which the regression absorbs as an intercept. Only the states
    whose singular value exceeds RANK_TOL times the largest enter the regression;
    the rest keep zero rows and columns in A and zero state noise.

    Args:
        cube: Cube with data of shape (q, p, p)
        n: State dimension, n <= min(d, q - 1)

    Returns:
        LdsParams; a zero-variance cube yields the degenerate parameters
        (A = 0, C = first n identity columns, recon_error = 0)
    """
    q = cube.data.shape[0]
    Y = cube.data.reshape(q, -1).T
    d = Y.shape[0]
    _check_state_dim(n, d, q)

    y_mean = Y.mean(axis=1)
    Yc = Y - y_mean[:, None]
    if np.max(np.abs(Yc)) <= ZERO_VARIANCE_TOL:
        return degenerate_params(y_mean, n)

    try:
        U, s, Vt = scipy.linalg.svd(Yc, full_matrices=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"SVD failed for cube at {cube.origin}: {e}") from e

    C = U[:, :n]
    X = s[:n, None] * Vt[:n]

    # States past the numerical rank carry rounding noise only; they keep zero dynamics.
    rank = int(np.sum(s[:n] > RANK_TOL * s[0]))
    if rank < n:
        logger.debug(f"Cube at {cube.origin}: numerical rank {rank} below state dimension {n}")
    Xr = X[:rank]
    X0, X1 = Xr[:, :-1], Xr[:, 1:]
    X0c = X0 - X0.mean(axis=1, keepdims=True)
    X1c = X1 - X1.mean(axis=1, keepdims=True)
    try:
        A_T, *_ = scipy.linalg.lstsq(X0c.T, X1c.T, cond=RANK_TOL)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"state regression failed for cube at {cube.origin}: {e}") from e
    A = np.zeros((n, n))
    A[:rank, :rank] = A_T.T

    innovation = X1c - A[:rank, :rank] @ X0c
    state_noise_scale = np.zeros(n)
    state_noise_scale[:rank] = np.sqrt(np.mean(innovation ** 2, axis=1))

    residual = Yc - C @ X
    obs_noise_var = float(np.mean(residual ** 2))

    return LdsParams(
        A=A,
        C=C,
        y_mean=y_mean,
        state_noise_scale=state_noise_scale,
        obs_noise_var=obs_noise_var,
        recon_error=math.sqrt(obs_noise_var),
    )


def simulate_lds(params: LdsParams, q: int, seed: int, x0: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Run the dynamic texture forward for q frames.

    Args:
        params: System to simulate; d must be a perfect square
        q: Number of frames, >= 1
        seed: Seed for the state and observation noise
        x0: Initial state; drawn from the state noise distribution when omitted

    Returns:
        (q, p, p) array clamped to [0, 1]
    """
    if q < 1:
        raise ConfigurationError(f"q must be >= 1, got {q}")
    p = math.isqrt(params.d)
    if p * p != params.d:
        raise DimensionMismatchError(f"observation dimension {params.d} is not a square")

    rng = np.random.default_rng(seed)
    n = params.n
    obs_std = math.sqrt(params.obs_noise_var)

    if x0 is None:
        x = rng.standard_normal(n) * params.state_noise_scale
    else:
        x = np.asarray(x0, dtype=np.float64)
        if x.shape != (n,):
            raise DimensionMismatchError(f"x0 must have shape ({n},), got {x.shape}")

    out = np.empty((q, params.d))
    for t in range(q):
        out[t] = params.C @ x + params.y_mean + rng.standard_normal(params.d) * obs_std
        x = params.A @ x + rng.standard_normal(n) * params.state_noise_scale

    return np.clip(out, 0.0, 1.0).reshape(q, p, p)


def lds_features(params: LdsParams) -> np.ndarray:
    """
    Similarity-invariant feature vector of a fitted system.

    Layout (length n + 4): eigenvalue magnitudes of A sorted descending, spectral
    radius, recon_error, mean state noise scale, obs_noise_var.
    """
    magnitudes = np.sort(np.abs(scipy.linalg.eigvals(params.A)))[::-1]
    radius = magnitudes[0] if magnitudes.size else 0.0
    return np.concatenate([
        magnitudes,
        [radius, params.recon_error, float(np.mean(params.state_noise_scale)), params.obs_noise_var],
    ]).astype(np.float64)


def feature_dim(n: int) -> int:
    return n + N_EXTRA_FEATURES


def extract_features(grid: CubeGrid, n: int) -> np.ndarray:
    """
    Feature matrix of a cube grid.

    Args:
        grid: Extracted cubes
        n: State dimension

    Returns:
        (len(grid), n + 4) matrix in grid order
    """
    _check_state_dim(n, grid.spec.d, grid.spec.q)
    features = np.empty((len(grid), feature_dim(n)))
    degenerate = 0
    for row, cube in enumerate(grid.cubes):
        params = fit_lds(cube, n)
        degenerate += params.degenerate
        features[row] = lds_features(params)

    if not np.all(np.isfinite(features)):
        raise NumericError("non-finite dynamic texture features")
    logger.debug(f"Fitted {len(grid)} dynamic textures ({degenerate} static)")
    return features

"""Monte Carlo oracles for the linear Gaussian models.

Draws ``η ~ CN(0, Σ)``, forms ``y = X F η + z``, applies the LMMSE estimator
and averages the squared error. Trials are generated in fixed-size blocks,
each from its own ``SeedSequence`` child keyed by the block index, so every
trial is a deterministic function of ``(seed, trial index)`` however the
blocks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import GaussianPrior, NoiseModel
from .errors import DimensionMismatch, SingularGram

__all__ = [
    "McConfig",
    "McResult",
    "sample_model",
    "lmmse_estimate",
    "empirical_mmse",
    "orthogonality_residual",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class McConfig:
    n_trials: int = 100_000
    seed: int = 0
    report_stderr: bool = True

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")


@dataclass(frozen=True)
class McResult:
    empirical_mmse: float
    stderr: float
    n_trials: int


def _system_matrix(x_factor, f, prior: GaussianPrior) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x_factor, dtype=complex))
    f = np.eye(prior.dim, dtype=complex) if f is None else np.atleast_2d(np.asarray(f, dtype=complex))
    if f.shape[1] != prior.dim or x.shape[1] != f.shape[0]:
        raise DimensionMismatch(f"X {x.shape}, F {f.shape} and prior dim {prior.dim} are inconsistent")
    return x @ f


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    draws = rng.standard_normal((2, *shape))
    return (draws[0] + 1j * draws[1]) / np.sqrt(2.0)


def _draw_block(a, prior, noise_var, rng, n):
    u = prior.covariance.eigenvectors
    root = u * np.sqrt(prior.variances)
    eta = _cn(rng, (n, prior.dim)) @ root.T
    z = _cn(rng, (n, a.shape[0])) * np.sqrt(noise_var)
    return eta, eta @ a.T + z


def sample_model(x_factor, f, prior: GaussianPrior, noise: NoiseModel | float, seed: int, n_trials: int = 1):
    """Draw ``n_trials`` pairs ``(η, y)``; rows are trials.

    ``noise`` may be a :class:`NoiseModel` or a bare variance (zero allowed,
    for noiseless checks). ``f=None`` means the identity.
    """
    a = _system_matrix(x_factor, f, prior)
    noise_var = noise.sigma_z_sq if isinstance(noise, NoiseModel) else float(noise)
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    etas, ys = [], []
    for block, start in enumerate(range(0, n_trials, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, n_trials - start)
        eta, y = _draw_block(a, prior, noise_var, _block_rng(seed, block), BLOCK_SIZE)
        etas.append(eta[:n])
        ys.append(y[:n])
    return np.concatenate(etas), np.concatenate(ys)


class _Lmmse:
    """Gain ``Σ A^H (A Σ A^H + σ_z^2 I)^{-1}`` via a Cholesky solve."""

    def __init__(self, a, prior: GaussianPrior, noise_var: float):
        sigma = prior.matrix()
        s = a @ sigma @ a.conj().T + noise_var * np.eye(a.shape[0])
        s = 0.5 * (s + s.conj().T)
        try:
            factor = linalg.cho_factor(s, lower=True)
        except linalg.LinAlgError as exc:
            raise SingularGram("innovation covariance is singular") from exc
        # gain^T = S^{-T} (A Σ)^T ; S Hermitian so solve S w = A Σ, gain = w^H
        self.gain = linalg.cho_solve(factor, a @ sigma).conj().T

    def __call__(self, y):
        return y @ self.gain.T


def lmmse_estimate(y, x_factor, f, prior: GaussianPrior, noise: NoiseModel | float) -> np.ndarray:
    """Posterior mean ``Σ A^H (A Σ A^H + σ_z^2 I)^{-1} y`` with ``A = X F``.

    ``y`` may be a single observation or a batch with trials along the rows.
    """
    a = _system_matrix(x_factor, f, prior)
    noise_var = noise.sigma_z_sq if isinstance(noise, NoiseModel) else float(noise)
    y = np.asarray(y, dtype=complex)
    est = _Lmmse(a, prior, noise_var)(np.atleast_2d(y))
    return est[0] if y.ndim == 1 else est


def empirical_mmse(x_factor, f, prior: GaussianPrior, noise: NoiseModel, cfg: McConfig) -> McResult:
    """Mean of ``||η - η̂||^2`` over ``cfg.n_trials`` trials and its standard error."""
    a = _system_matrix(x_factor, f, prior)
    estimator = _Lmmse(a, prior, noise.sigma_z_sq)
    errors = np.empty(cfg.n_trials)
    for block, start in enumerate(range(0, cfg.n_trials, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, cfg.n_trials - start)
        eta, y = _draw_block(a, prior, noise.sigma_z_sq, _block_rng(cfg.seed, block), BLOCK_SIZE)
        errors[start:start + n] = np.sum(np.abs(eta[:n] - estimator(y[:n])) ** 2, axis=1)
    mean = float(np.mean(errors))
    stderr = float(np.std(errors, ddof=1) / np.sqrt(cfg.n_trials)) if cfg.n_trials > 1 else 0.0
    return McResult(mean, stderr if cfg.report_stderr else 0.0, cfg.n_trials)


def orthogonality_residual(eta, eta_hat, y) -> float:
    """Largest normalized sample correlation between estimation error and observations."""
    err = np.asarray(eta) - np.asarray(eta_hat)
    y = np.asarray(y)
    n = err.shape[0]
    cross = err.T @ y.conj() / n
    scale = np.sqrt(np.mean(np.abs(err) ** 2, axis=0))[:, None] * np.sqrt(np.mean(np.abs(y) ** 2, axis=0))[None, :]
    return float(np.max(np.abs(cross) / np.maximum(scale, 1e-300)))

"""Gaussian linear model ``y = X h + z`` with ``h ~ CN(0, Σ)``.

MI and MMSE are evaluated in the prior eigenbasis: with ``Σ = U Λ U^H`` and
``K = Λ^{1/2} U^H R_x U Λ^{1/2} / σ_z^2``,

    I(X)    = ln det(I + K)
    MMSE(X) = tr((I + K)^{-1} Λ),

which avoids forming ``Σ^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    DEFAULT_TOL,
    GaussianPrior,
    NoiseModel,
    Tolerances,
    WaveformGram,
    hermitian_part,
    random_gaussian_matrix,
)
from .errors import DimensionMismatch, InsufficientRows, NumericalFailure, SingularPrior
from .waterfill import (
    WaterfillAllocation,
    rate_from_allocation,
    waterfill_direct,
    waterfill_inverse,
)

__all__ = [
    "GlmAnalysis",
    "OptimalWaveform",
    "glm_mi",
    "glm_mmse",
    "glm_optimal_waveform",
    "glm_ser",
    "estimation_rate",
    "orthonormal_factor",
]


@dataclass(frozen=True)
class GlmAnalysis:
    mi_nats: float
    mmse: float
    ser_nats: float
    alloc: WaterfillAllocation
    per_mode_distortion: np.ndarray

    @property
    def gap_nats(self) -> float:
        return self.mi_nats - self.ser_nats


class OptimalWaveform(NamedTuple):
    gram: WaveformGram
    factor: np.ndarray
    alloc: WaterfillAllocation


def _gram_matrix(gram) -> np.ndarray:
    return gram.gram if isinstance(gram, WaveformGram) else np.asarray(gram, dtype=complex)


def _whitened_spectrum(prior: GaussianPrior, gram_matrix: np.ndarray, noise: NoiseModel, tol: Tolerances):
    m = prior.dim
    if gram_matrix.shape != (m, m):
        raise DimensionMismatch(f"gram is {gram_matrix.shape}, prior dimension is {m}")
    u = prior.covariance.eigenvectors
    root = np.sqrt(np.maximum(prior.variances, 0.0))
    k = (root[:, None] * (u.conj().T @ gram_matrix @ u) * root[None, :]) / noise.sigma_z_sq
    values, vectors = np.linalg.eigh(hermitian_part(k))
    floor = tol.tol_psd * max(1.0, float(np.max(np.abs(values))))
    if values[0] < -floor:
        raise NumericalFailure(f"I + K is not positive definite (eigenvalue {values[0]:.3e})")
    return np.maximum(values, 0.0), vectors


def glm_mi(prior: GaussianPrior, gram, noise: NoiseModel, tol: Tolerances = DEFAULT_TOL) -> float:
    """``ln det(I + σ_z^{-2} Σ R_x)`` in nats."""
    k, _ = _whitened_spectrum(prior, _gram_matrix(gram), noise, tol)
    return float(np.sum(np.log1p(k)))


def glm_mmse(prior: GaussianPrior, gram, noise: NoiseModel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Posterior-covariance trace ``tr((σ_z^{-2} R_x + Σ^{-1})^{-1})``."""
    if prior.covariance.rank(tol) < prior.dim:
        raise SingularPrior("MMSE needs a full-rank prior covariance")
    k, v = _whitened_spectrum(prior, _gram_matrix(gram), noise, tol)
    # tr(V diag(1/(1+k)) V^H Λ)
    weights = np.abs(v) ** 2 @ (1.0 / (1.0 + k))
    return float(np.dot(weights, prior.variances))


def orthonormal_factor(rows: int, cols: int, seed: int) -> np.ndarray:
    """Seeded ``rows x cols`` matrix with orthonormal columns (QR of a Gaussian draw)."""
    if cols == 0:
        return np.zeros((rows, 0), dtype=complex)
    q, _ = np.linalg.qr(random_gaussian_matrix(rows, cols, seed))
    return q


def glm_optimal_waveform(
    prior: GaussianPrior,
    noise: NoiseModel,
    budget: float,
    factor_rows: int,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> OptimalWaveform:
    """MI- and MMSE-optimal waveform ``X = Φ diag(p)^{1/2} U^H``.

    The powers ``p`` water-fill the floors ``σ_z^2 / σ_i^2`` and ``Φ`` is a
    seeded matrix with orthonormal columns, one per active mode.
    """
    variances = prior.variances
    floors = np.full(variances.shape, np.inf)
    positive = variances > 0
    floors[positive] = noise.sigma_z_sq / variances[positive]
    alloc = waterfill_direct(floors, budget, tol)
    active = np.flatnonzero(alloc.levels > 0)
    if factor_rows < active.size:
        raise InsufficientRows(f"{active.size} active modes need at least that many rows, got {factor_rows}")

    u = prior.covariance.eigenvectors
    gram = hermitian_part((u * alloc.levels) @ u.conj().T)
    phi = orthonormal_factor(factor_rows, active.size, seed)
    factor = (phi * np.sqrt(alloc.levels[active])) @ u[:, active].conj().T
    if active.size == 0:
        factor = np.zeros((factor_rows, prior.dim), dtype=complex)
    return OptimalWaveform(WaveformGram(gram, budget, factor_rows, tol=tol), factor, alloc)


def estimation_rate(variances, distortion: float, tol: Tolerances = DEFAULT_TOL) -> tuple[float, WaterfillAllocation]:
    """Gaussian rate-distortion ``R(D)`` for independent modes, in nats."""
    alloc = waterfill_inverse(variances, distortion, tol)
    return rate_from_allocation(variances, alloc), alloc


def glm_ser(prior: GaussianPrior, gram, noise: NoiseModel, tol: Tolerances = DEFAULT_TOL) -> GlmAnalysis:
    """MI, MMSE and estimation rate ``R_E(MMSE(X))`` for one waveform."""
    mmse = glm_mmse(prior, gram, noise, tol)
    mi = glm_mi(prior, gram, noise, tol)
    ser, alloc = estimation_rate(prior.variances, mmse, tol)
    return GlmAnalysis(mi, mmse, ser, alloc, alloc.levels.copy())

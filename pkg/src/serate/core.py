"""Shared domain types: Hermitian spectra, Gaussian priors, noise, waveforms.

All types are frozen dataclasses holding numpy arrays; treat the arrays as
read-only. Complex Gaussians are circularly symmetric with the total
variance split evenly between real and imaginary parts, and every rate is
in nats unless a caller converts it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IndefiniteInput,
    NonPositiveInput,
    NotHermitian,
    SingularPrior,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "HermitianSpectrum",
    "GaussianPrior",
    "NoiseModel",
    "WaveformGram",
    "spectrum_from_matrix",
    "random_gaussian_matrix",
    "random_unitary",
    "random_covariance",
    "random_feasible_waveform",
    "hermitian_part",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used throughout the package.

    ``tol_psd`` and ``tol_herm`` are relative to the largest magnitude of the
    matrix they are applied to (with a floor of one), so they behave the same
    for unit-scale and large-scale inputs.
    """

    tol_psd: float = 1e-10
    tol_unitary: float = 1e-10
    tol_herm: float = 1e-10
    tol_rel: float = 1e-9
    tol_bisect: float = 1e-12

    def __post_init__(self):
        for name in ("tol_psd", "tol_unitary", "tol_herm", "tol_rel", "tol_bisect"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOL = Tolerances()


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    return 0.5 * (matrix + matrix.conj().T)


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigen-decomposition ``A = U diag(eigenvalues) U^H`` of a PSD matrix.

    Eigenvalues are sorted in descending order; ``eigenvectors`` holds the
    matching orthonormal columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.eigenvalues, dtype=float)
        vectors = np.asarray(self.eigenvectors, dtype=complex)
        if values.ndim != 1 or vectors.shape != (values.size, values.size):
            raise DimensionMismatch(
                f"eigenvalues {values.shape} and eigenvectors {vectors.shape} disagree"
            )
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "eigenvectors", vectors)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def matrix(self) -> np.ndarray:
        """Recompose ``U Λ U^H``."""
        u = self.eigenvectors
        return hermitian_part((u * self.eigenvalues) @ u.conj().T)

    def rank(self, tol: Tolerances = DEFAULT_TOL) -> int:
        if self.dim == 0:
            return 0
        scale = max(self.eigenvalues[0], 0.0)
        return int(np.count_nonzero(self.eigenvalues > tol.tol_psd * max(scale, 1e-300)))

    @classmethod
    def diagonal(cls, values) -> "HermitianSpectrum":
        """Spectrum of ``diag(values)``, eigenvectors are (permuted) unit vectors."""
        values = np.asarray(values, dtype=float)
        order = np.argsort(-values, kind="stable")
        return cls(values[order], np.eye(values.size, dtype=complex)[:, order])


def spectrum_from_matrix(
    matrix: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
    require_psd: bool = True,
) -> HermitianSpectrum:
    """Eigen-decompose a Hermitian PSD matrix.

    The input is symmetrized as ``(A + A^H)/2`` after checking that its
    anti-Hermitian part is below ``tol_herm``. Slightly negative eigenvalues
    (within ``tol_psd`` of zero, relative to the spectral scale) are clipped
    to zero.

    Raises
    ------
    NotHermitian
        If ``max|A - A^H|`` exceeds ``tol_herm`` times the matrix scale.
    IndefiniteInput
        If ``require_psd`` and an eigenvalue lies below ``-tol_psd``.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return HermitianSpectrum(np.zeros(0), np.zeros((0, 0), dtype=complex))
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > tol.tol_herm * scale:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds tolerance")

    values, vectors = np.linalg.eigh(hermitian_part(a))
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()

    floor = tol.tol_psd * max(1.0, float(np.max(np.abs(values))))
    if require_psd and values[-1] < -floor:
        raise IndefiniteInput(f"eigenvalue {values[-1]:.3e} is below -{floor:.1e}")
    values[(values < 0) & (values >= -floor)] = 0.0
    return HermitianSpectrum(values, vectors)


@dataclass(frozen=True)
class GaussianPrior:
    """Zero-mean Gaussian prior ``CN(0, Σ)`` stored through its spectrum.

    Set ``real=True`` for real-valued parameters (used by the nonlinear
    channels, whose parameters are angles, delays and so on).
    """

    covariance: HermitianSpectrum
    degenerate: bool = False
    real: bool = False
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.covariance.dim < 1:
            raise DimensionMismatch("prior dimension must be positive")
        if not self.degenerate and self.covariance.rank(self.tol) < self.dim:
            raise SingularPrior(
                "covariance is rank deficient; pass degenerate=True to allow it"
            )

    @property
    def dim(self) -> int:
        return self.covariance.dim

    @property
    def mean(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=float if self.real else complex)

    @property
    def variances(self) -> np.ndarray:
        """Prior eigenvalues (mode variances), descending."""
        return self.covariance.eigenvalues

    @property
    def total_variance(self) -> float:
        return float(np.sum(self.covariance.eigenvalues))

    def matrix(self) -> np.ndarray:
        return self.covariance.matrix()

    @classmethod
    def from_covariance(cls, matrix, tol: Tolerances = DEFAULT_TOL, **kwargs) -> "GaussianPrior":
        return cls(spectrum_from_matrix(matrix, tol), tol=tol, **kwargs)

    @classmethod
    def from_variances(cls, variances, **kwargs) -> "GaussianPrior":
        """Prior with independent modes of the given variances."""
        return cls(HermitianSpectrum.diagonal(variances), **kwargs)


@dataclass(frozen=True)
class NoiseModel:
    """Circularly symmetric white noise with per-sample variance ``sigma_z_sq``."""

    sigma_z_sq: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma_z_sq) and self.sigma_z_sq > 0):
            raise NonPositiveInput(f"noise variance must be positive, got {self.sigma_z_sq!r}")


@dataclass(frozen=True)
class WaveformGram:
    """Gram matrix ``R_x = X^H X`` of a waveform under the budget ``T P_T``.

    ``factor_rows`` is the number of rows available to an explicit waveform
    ``X`` that reproduces the gram; it bounds the rank.
    """

    gram: np.ndarray
    budget: float
    factor_rows: int
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatch(f"gram must be square, got {g.shape}")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.factor_rows < 1:
            raise ValueError("factor_rows must be positive")
        spectrum = spectrum_from_matrix(g, self.tol)
        g = hermitian_part(g)
        trace = float(np.real(np.trace(g)))
        if trace > self.budget * (1 + self.tol.tol_rel) + self.tol.tol_psd:
            raise ValueError(f"trace {trace!r} exceeds budget {self.budget!r}")
        if spectrum.rank(self.tol) > min(g.shape[0], self.factor_rows):
            raise ValueError("gram rank exceeds the available factor rows")
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def power(self) -> float:
        """Energy actually used, ``tr(R_x) = ||X||_F^2``."""
        return float(np.real(np.trace(self.gram)))

    @classmethod
    def from_factor(cls, factor, budget: float | None = None, **kwargs) -> "WaveformGram":
        x = np.asarray(factor, dtype=complex)
        gram = x.conj().T @ x
        if budget is None:
            budget = float(np.real(np.trace(gram)))
        return cls(gram, budget, x.shape[0], **kwargs)

    @classmethod
    def zeros(cls, dim: int, budget: float = 0.0, factor_rows: int | None = None) -> "WaveformGram":
        return cls(np.zeros((dim, dim), dtype=complex), budget, factor_rows or dim)


def random_gaussian_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """I.i.d. ``CN(0, 1)`` entries, deterministic for a given seed."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((2, rows, cols))
    return (draws[0] + 1j * draws[1]) / np.sqrt(2.0)


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary via QR with the diagonal phase fix."""
    q, r = np.linalg.qr(random_gaussian_matrix(n, n, seed))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_covariance(dim: int, seed: int, samples: int | None = None) -> np.ndarray:
    """Seeded full-rank covariance ``B B^H / n`` with ``B`` standard complex Gaussian.

    ``samples`` defaults to ``2 * dim`` columns, which keeps the matrix well
    conditioned while leaving the eigenvalues visibly spread.
    """
    n = samples or 2 * dim
    b = random_gaussian_matrix(dim, n, seed)
    return hermitian_part(b @ b.conj().T / n)


def random_feasible_waveform(factor_rows: int, dim: int, budget: float, seed: int) -> np.ndarray:
    """A seeded arbitrary waveform ``X`` (factor_rows x dim) with ``||X||_F^2 = budget``."""
    x = random_gaussian_matrix(factor_rows, dim, seed)
    norm_sq = float(np.sum(np.abs(x) ** 2))
    return x * np.sqrt(budget / norm_sq)

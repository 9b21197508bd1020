"""Bayesian Cramér-Rao bound machinery for nonlinear Gaussian channels.

For ``y = X h(η) + z`` the Bayesian Fisher information is

    J = E[σ_z^{-2} F_η^H R_x F_η] + J_P,

with ``F_η`` the Jacobian of ``h``. Replacing the expectation by a rank-1
Choi factor ``G`` (the dominant eigenvector of ``Ψ = E[vec F_η vec F_η^H]``)
turns the BCRB minimization into a semi-controllable GLM problem with
``F -> G`` and ``Σ -> J_P^{-1}``, which gives a computable upper bound on the
estimation rate.

The module also carries the scalar time-delay example: the deterministic
delay CRB ``(8 π^2 B_rms^2 SNR)^{-1}``, its Bayesian counterpart and the rate
``ln(1 + σ_η^2 / σ_CRB^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import DEFAULT_TOL, GaussianPrior, NoiseModel, Tolerances, WaveformGram, hermitian_part
from .errors import DimensionMismatch, InvariantViolation, JacobianFailure, NonPositiveInput, SingularPrior, ZeroEnergy
from .glm import estimation_rate
from .semiglm import SemiGlmProblem, semiglm_mmse_optimal
from .waterfill import WaterfillAllocation

__all__ = [
    "NonlinearChannel",
    "ChoiReduction",
    "BcrbResult",
    "SerBound",
    "prior_fim_gaussian",
    "finite_difference_jacobian",
    "choi_reduce",
    "bcrb_min",
    "ser_upper_bound",
    "effective_bandwidth",
    "delay_crb",
    "delay_bcrb",
    "delay_ser",
    "delay_channel",
]


def finite_difference_jacobian(h_map: Callable, eta: np.ndarray) -> np.ndarray:
    """Central differences with step ``1e-5 * (1 + |η_i|)``."""
    eta = np.asarray(eta, dtype=float)
    columns = []
    for i in range(eta.size):
        step = 1e-5 * (1.0 + abs(eta[i]))
        e = np.zeros_like(eta)
        e[i] = step
        columns.append((np.asarray(h_map(eta + e)) - np.asarray(h_map(eta - e))) / (2 * step))
    return np.stack(columns, axis=1).astype(complex)


@dataclass(frozen=True)
class NonlinearChannel:
    """Channel ``η -> h(η)`` with a Gaussian prior on the real parameters ``η``.

    ``jacobian`` defaults to central finite differences. Set
    ``constant_jacobian`` when ``F_η`` does not depend on ``η``; the Choi
    reduction then evaluates it once, exactly.
    """

    h_map: Callable[[np.ndarray], np.ndarray]
    prior: GaussianPrior
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    prior_fim: np.ndarray | None = None
    constant_jacobian: bool = False

    @property
    def n_params(self) -> int:
        return self.prior.dim

    def jacobian_at(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        jac = self.jacobian(eta) if self.jacobian is not None else finite_difference_jacobian(self.h_map, eta)
        jac = np.atleast_2d(np.asarray(jac, dtype=complex))
        if jac.shape[1] != self.n_params:
            raise DimensionMismatch(f"Jacobian has {jac.shape[1]} columns for {self.n_params} parameters")
        if not np.all(np.isfinite(jac)):
            raise JacobianFailure(f"non-finite Jacobian at η = {eta!r}")
        return jac

    def fisher_prior(self) -> np.ndarray:
        return prior_fim_gaussian(self.prior) if self.prior_fim is None else np.asarray(self.prior_fim, dtype=complex)


@dataclass(frozen=True)
class ChoiReduction:
    psi: np.ndarray
    lambda_psi: float
    u: np.ndarray
    G: np.ndarray
    rank1_residual: float


class BcrbResult(NamedTuple):
    value: float
    gram: WaveformGram
    alloc: WaterfillAllocation
    lambda_j: np.ndarray
    lambda_g: np.ndarray
    weights: np.ndarray


class SerBound(NamedTuple):
    bound: float
    ser_bcrb: float
    bcrb: float


def prior_fim_gaussian(prior: GaussianPrior, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Prior Fisher information of a Gaussian prior, ``Σ^{-1}``."""
    spec = prior.covariance
    if spec.rank(tol) < spec.dim:
        raise SingularPrior("prior Fisher information needs a full-rank covariance")
    u = spec.eigenvectors
    fim = hermitian_part((u / spec.eigenvalues) @ u.conj().T)
    return np.real(fim) if prior.real else fim


def _sample_prior(prior: GaussianPrior, n: int, rng: np.random.Generator) -> np.ndarray:
    u = prior.covariance.eigenvectors
    root = (u * np.sqrt(prior.variances)) @ u.conj().T
    if prior.real:
        return rng.standard_normal((n, prior.dim)) @ np.real(root).T
    w = (rng.standard_normal((n, prior.dim)) + 1j * rng.standard_normal((n, prior.dim))) / np.sqrt(2)
    return w @ root.T


def choi_reduce(channel: NonlinearChannel, n_samples: int = 10_000, seed: int = 0) -> ChoiReduction:
    """Rank-1 reduction ``Ψ ≈ λ_Ψ u u^H``, ``G = sqrt(λ_Ψ) mat(u)``.

    ``Ψ`` is averaged over ``n_samples`` prior draws (one draw per row of a
    single seeded matrix, so results do not depend on evaluation order),
    or computed once at the prior mean for constant Jacobians. The
    truncation error ``1 - λ_Ψ / tr Ψ`` is reported rather than assumed away.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if channel.constant_jacobian:
        jacobians = [channel.jacobian_at(np.real(channel.prior.mean))]
    else:
        etas = _sample_prior(channel.prior, n_samples, np.random.default_rng(seed))
        jacobians = [channel.jacobian_at(np.real(eta)) for eta in etas]

    m, k = jacobians[0].shape
    vecs = np.stack([j.reshape(-1, order="F") for j in jacobians])
    psi = hermitian_part(vecs.T @ vecs.conj() / len(jacobians))
    values, vectors = np.linalg.eigh(psi)
    lam = max(float(values[-1]), 0.0)
    u = vectors[:, -1]
    anchor = u[np.argmax(np.abs(u))]
    u = u * (np.conj(anchor) / abs(anchor))
    g = np.sqrt(lam) * u.reshape((m, k), order="F")
    trace = float(np.real(np.trace(psi)))
    residual = 0.0 if trace <= 0 else min(max(1.0 - lam / trace, 0.0), 1.0)
    return ChoiReduction(psi, lam, u, g, residual)


def _surrogate_problem(channel: NonlinearChannel, reduction: ChoiReduction, noise: NoiseModel, budget: float) -> SemiGlmProblem:
    fim = channel.fisher_prior()
    cov = hermitian_part(np.linalg.inv(fim))
    prior = GaussianPrior.from_covariance(cov, real=channel.prior.real)
    return SemiGlmProblem(reduction.G, prior, noise, budget)


def bcrb_min(
    channel: NonlinearChannel,
    reduction: ChoiReduction,
    noise: NoiseModel,
    budget: float,
) -> BcrbResult:
    """Minimize ``tr((σ_z^{-2} G^H R_x G + J_P)^{-1})`` over the waveform.

    Solved as a semi-controllable GLM with ``F = G`` and prior covariance
    ``J_P^{-1}``; ``lambda_j`` are the prior variances paired with the
    eigenvalues ``lambda_g`` of ``G J_P^{-1} G^H``.
    """
    problem = _surrogate_problem(channel, reduction, noise, budget)
    opt = semiglm_mmse_optimal(problem)
    lam_g = opt.mode_gains
    sigma2 = noise.sigma_z_sq
    weights = np.zeros_like(lam_g)
    live = lam_g > 0
    weights[live] = np.sqrt(sigma2 * opt.paired_variances[live] / lam_g[live])
    return BcrbResult(opt.exact_mmse, opt.gram, opt.alloc, opt.paired_variances, lam_g, weights)


def ser_upper_bound(
    channel: NonlinearChannel,
    reduction: ChoiReduction,
    noise: NoiseModel,
    budget: float,
    tol: Tolerances = DEFAULT_TOL,
) -> SerBound:
    """Computable upper bound on ``R_E(BCRB(X*))``.

    With powers ``p_i = (sqrt(σ_z^2 Λ_J,i / Λ_G,i) λ - σ_z^2 / Λ_G,i)^+`` from
    the weighted water-filling, the bound is

        sum_i ln(1 + Λ_G,i p_i / σ_z^2),

    the information carried by the surrogate linear model at that waveform.
    ``ser_bcrb`` is the reverse water-filling rate at the minimized BCRB.
    """
    res = bcrb_min(channel, reduction, noise, budget)
    n = min(res.lambda_g.size, res.alloc.levels.size)
    bound = float(np.sum(np.log1p(res.lambda_g[:n] * res.alloc.levels[:n] / noise.sigma_z_sq)))
    variances = np.linalg.eigvalsh(hermitian_part(np.linalg.inv(channel.fisher_prior())))
    ser, _ = estimation_rate(np.maximum(variances, 0.0), res.value, tol)
    if ser > bound + tol.tol_rel * (1.0 + bound):
        raise InvariantViolation(f"R_E(BCRB) = {ser!r} exceeds the bound {bound!r}")
    return SerBound(bound, ser, res.value)


def effective_bandwidth(freqs, power) -> float:
    """Squared RMS bandwidth ``∫ f^2 |X(f)|^2 df / ∫ |X(f)|^2 df`` (trapezoid rule).

    Parameters
    ----------
    freqs : array_like
        Uniform frequency grid, at least two points.
    power : array_like
        Non-negative energy spectrum ``|X(f)|^2`` sampled on ``freqs``.
    """
    f = np.asarray(freqs, dtype=float)
    s = np.asarray(power, dtype=float)
    if f.shape != s.shape or f.ndim != 1 or f.size < 2:
        raise DimensionMismatch("need matching 1-D frequency and power arrays with >= 2 points")
    if np.any(s < 0):
        raise ValueError("energy spectrum must be non-negative")
    energy = np.trapezoid(s, f)
    if energy <= 0:
        raise ZeroEnergy("spectrum has no energy")
    return float(np.trapezoid(f**2 * s, f) / energy)


def _positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise NonPositiveInput(f"{name} must be strictly positive, got {value!r}")


def delay_crb(b_rms_sq: float, snr: float) -> float:
    """Deterministic delay CRB ``(8 π^2 B_rms^2 SNR)^{-1}``."""
    _positive(b_rms_sq=b_rms_sq, snr=snr)
    return 1.0 / (8 * np.pi**2 * b_rms_sq * snr)


def delay_bcrb(sigma_eta_sq: float, b_rms_sq: float, snr: float) -> float:
    """Bayesian delay bound ``(1/σ_CRB^2 + 1/σ_η^2)^{-1}``."""
    _positive(sigma_eta_sq=sigma_eta_sq)
    return 1.0 / (1.0 / delay_crb(b_rms_sq, snr) + 1.0 / sigma_eta_sq)


def delay_ser(sigma_eta_sq: float, b_rms_sq: float, snr: float) -> float:
    """Estimation rate of scalar delay estimation, ``ln(1 + σ_η^2 / σ_CRB^2)`` nats."""
    crb = delay_crb(b_rms_sq, snr)
    _positive(sigma_eta_sq=sigma_eta_sq)
    rate = float(np.log1p(sigma_eta_sq / crb))
    via_bcrb = max(float(np.log(sigma_eta_sq / delay_bcrb(sigma_eta_sq, b_rms_sq, snr))), 0.0)
    if abs(rate - via_bcrb) > 1e-12 * max(1.0, rate):
        raise InvariantViolation(f"delay rate forms disagree: {rate!r} vs {via_bcrb!r}")
    return rate


def delay_channel(sigma_eta_sq: float, b_rms_sq: float) -> NonlinearChannel:
    """Scalar delay model as a constant-Jacobian channel.

    With unit noise and the SNR used as the waveform budget, the data Fisher
    information ``|dh/dτ|^2 SNR`` equals ``8 π^2 B_rms^2 SNR``, i.e. the
    inverse of the delay CRB.
    """
    _positive(sigma_eta_sq=sigma_eta_sq, b_rms_sq=b_rms_sq)
    slope = np.sqrt(8 * np.pi**2 * b_rms_sq)

    def h_map(eta):
        return np.array([slope * np.asarray(eta, dtype=float)[0]], dtype=complex)

    def jacobian(eta):
        return np.array([[slope]], dtype=complex)

    prior = GaussianPrior.from_variances([sigma_eta_sq], real=True)
    return NonlinearChannel(h_map, prior, jacobian=jacobian, constant_jacobian=True)

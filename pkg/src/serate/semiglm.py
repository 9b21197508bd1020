"""Semi-controllable Gaussian linear model ``y = X F η + z``.

``F`` is fixed by the channel and only ``X`` is designed, so the MI-optimal
and MMSE-optimal waveforms generally differ:

* MI-optimal: water-fill the eigenmodes of ``F Σ F^H`` (floors
  ``σ_z^2 / Λ_F``).
* MMSE-optimal: with the SVD ``F U Λ^{1/2} = U_F S U_R^H`` and a gram
  ``R_x = U_F diag(p) U_F^H``, the MMSE is exactly

      sum_j  v_j / (σ_z^{-2} s_j^2 p_j + 1),   v_j = [U_R^H Λ U_R]_jj,

  which a weighted water-filling with ``a_j = sqrt(σ_z^2 v_j / s_j^2)``
  minimizes. When ``U_R`` is a (phase) permutation, ``v_j`` are the prior
  eigenvalues and the allocation is globally optimal.

MI-optimal and MMSE-optimal coincide when ``F`` has identical singular values
and its right singular space is the prior eigenspace; ``theorem2_certificate``
measures both conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .core import (
    DEFAULT_TOL,
    GaussianPrior,
    NoiseModel,
    Tolerances,
    WaveformGram,
    hermitian_part,
    spectrum_from_matrix,
)
from .errors import DimensionMismatch, InvariantViolation, NotPositiveDefinite, ZeroChannel
from .glm import estimation_rate, glm_mi, glm_mmse
from .waterfill import WaterfillAllocation, waterfill_direct, waterfill_weighted

__all__ = [
    "SemiGlmProblem",
    "SemiGlmAnalysis",
    "MiOptimal",
    "MmseOptimal",
    "Theorem2Certificate",
    "Lemma1Result",
    "semiglm_mi_optimal",
    "semiglm_mmse_optimal",
    "semiglm_mmse_at",
    "semiglm_mi_at",
    "theorem2_certificate",
    "lemma1_check",
    "semiglm_analyze",
]


@dataclass(frozen=True)
class SemiGlmProblem:
    channel_map: np.ndarray
    prior: GaussianPrior
    noise: NoiseModel
    budget: float
    factor_rows: int | None = None
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        f = np.asarray(self.channel_map, dtype=complex)
        if f.ndim != 2 or f.shape[1] != self.prior.dim:
            raise DimensionMismatch(
                f"channel map {f.shape} does not act on a {self.prior.dim}-dim parameter"
            )
        if not np.all(np.isfinite(f)):
            raise ValueError("channel map has non-finite entries")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        object.__setattr__(self, "channel_map", f)

    @property
    def obs_dim(self) -> int:
        return self.channel_map.shape[0]

    @property
    def rows(self) -> int:
        return self.factor_rows or self.obs_dim


class MiOptimal(NamedTuple):
    gram: WaveformGram
    mi_nats: float
    alloc: WaterfillAllocation


class MmseOptimal(NamedTuple):
    gram: WaveformGram
    bound_value: float
    exact_mmse: float
    alloc: WaterfillAllocation
    paired_variances: np.ndarray
    mode_gains: np.ndarray
    globally_optimal: bool


@dataclass(frozen=True)
class Theorem2Certificate:
    residual_alignment: float
    residual_spread: float
    full_rank: bool
    tol: float

    @property
    def passed(self) -> bool:
        return self.full_rank and self.residual_alignment <= self.tol and self.residual_spread <= self.tol


class Lemma1Result(NamedTuple):
    slack: float
    holds: bool
    diagonal: bool


@dataclass(frozen=True)
class SemiGlmAnalysis:
    mi_opt: float
    mmse_mi_waveform: float
    mmse_opt: float
    ser_mi: float
    ser_mmse: float
    equality_certificate: Theorem2Certificate
    mi_waveform: MiOptimal
    mmse_waveform: MmseOptimal

    @property
    def gap(self) -> float:
        return self.mi_opt - self.ser_mmse


def _as_matrix(gram) -> np.ndarray:
    return gram.gram if isinstance(gram, WaveformGram) else np.asarray(gram, dtype=complex)


def _effective_gram(problem: SemiGlmProblem, gram) -> np.ndarray:
    r = _as_matrix(gram)
    if r.shape != (problem.obs_dim, problem.obs_dim):
        raise DimensionMismatch(f"gram is {r.shape}, expected {problem.obs_dim}x{problem.obs_dim}")
    f = problem.channel_map
    return hermitian_part(f.conj().T @ r @ f)


def semiglm_mi_at(problem: SemiGlmProblem, gram) -> float:
    """``ln det(I + σ_z^{-2} F Σ F^H R_x)`` for a given gram."""
    return glm_mi(problem.prior, _effective_gram(problem, gram), problem.noise, problem.tol)


def semiglm_mmse_at(problem: SemiGlmProblem, gram) -> float:
    """Exact MMSE ``tr((σ_z^{-2} F^H R_x F + Σ^{-1})^{-1})`` for a given gram."""
    return glm_mmse(problem.prior, _effective_gram(problem, gram), problem.noise, problem.tol)


def _active_mask(values: np.ndarray, tol: Tolerances) -> np.ndarray:
    if values.size == 0 or values[0] <= 0:
        return np.zeros(values.shape, dtype=bool)
    return values > tol.tol_psd * values[0]


def semiglm_mi_optimal(problem: SemiGlmProblem) -> MiOptimal:
    """Water-filling over the eigenmodes of ``F Σ F^H``."""
    f = problem.channel_map
    spec = spectrum_from_matrix(f @ problem.prior.matrix() @ f.conj().T, problem.tol)
    active = _active_mask(spec.eigenvalues, problem.tol)
    if not np.any(active):
        raise ZeroChannel("F Σ F^H vanishes")
    floors = np.full(spec.dim, np.inf)
    floors[active] = problem.noise.sigma_z_sq / spec.eigenvalues[active]
    alloc = waterfill_direct(floors, problem.budget, problem.tol)
    u = spec.eigenvectors
    gram = hermitian_part((u * alloc.levels) @ u.conj().T)
    mi = float(np.sum(np.log1p(spec.eigenvalues[active] * alloc.levels[active] / problem.noise.sigma_z_sq)))
    return MiOptimal(WaveformGram(gram, problem.budget, problem.rows, tol=problem.tol), mi, alloc)


def _whitened_svd(problem: SemiGlmProblem):
    """SVD ``F U Λ^{1/2} = U_F S U_R^H`` with a canonical basis inside tied singular values.

    Within a group of equal singular values the factorization is only fixed up
    to a common unitary; the group is rotated so that ``U_R^H Λ U_R`` is
    diagonal on it, which makes ``U_R`` a phase permutation whenever the right
    singular space matches the prior eigenspace.
    """
    prior = problem.prior
    lam = prior.variances
    b = problem.channel_map @ prior.covariance.eigenvectors * np.sqrt(lam)[None, :]
    u_f, s, u_r_h = np.linalg.svd(b, full_matrices=True)
    u_r = u_r_h.conj().T
    m = prior.dim
    sv = np.zeros(m)
    sv[: s.size] = s

    start = 0
    scale = max(float(sv[0]), 1e-300)
    while start < m:
        stop = start + 1
        while stop < m and abs(sv[stop] - sv[start]) <= 1e-9 * scale:
            stop += 1
        if stop - start > 1:
            block = u_r[:, start:stop]
            _, rot = np.linalg.eigh(hermitian_part(block.conj().T @ (lam[:, None] * block)))
            rot = rot[:, ::-1]
            u_r[:, start:stop] = block @ rot
            # null-space groups have no matching left vectors to keep consistent
            if sv[start] > 0 and stop <= s.size:
                u_f[:, start:stop] = u_f[:, start:stop] @ rot
        start = stop
    return u_f, sv, u_r


def _phase_permutation_residual(u_r: np.ndarray) -> float:
    """``max|U_R' - I|`` after mapping each column to the row of its largest
    entry and removing that entry's phase."""
    m = u_r.shape[0]
    rows = np.argmax(np.abs(u_r), axis=0)
    if np.array_equal(np.sort(rows), np.arange(m)):
        aligned = np.zeros_like(u_r)
        aligned[:, rows] = u_r
    else:
        aligned = u_r.copy()
    diag = np.diag(aligned)
    phase = np.where(np.abs(diag) > 0, np.conj(diag) / np.maximum(np.abs(diag), 1e-300), 1.0)
    return float(np.max(np.abs(aligned * phase[None, :] - np.eye(m))))


def theorem2_certificate(problem: SemiGlmProblem, tol: float = 1e-8) -> Theorem2Certificate:
    """Check the two conditions under which SER at the MMSE-optimal waveform reaches the maximum MI.

    ``residual_alignment`` is ``max|U_R - I|`` after canonical permutation
    and phase alignment (right singular space of ``F`` equal to the prior
    eigenspace); ``residual_spread`` is ``(s_max - s_min) / s_max`` over the
    non-zero singular values of ``F`` (identical singular values). The
    certificate also requires ``F`` to have full column rank, otherwise
    unobserved prior modes break the equality.
    """
    f = problem.channel_map
    s_f = np.linalg.svd(f, compute_uv=False)
    if s_f.size == 0 or s_f[0] == 0:
        return Theorem2Certificate(np.inf, np.inf, False, tol)
    nonzero = s_f[s_f > problem.tol.tol_psd * s_f[0]]
    spread = float((nonzero[0] - nonzero[-1]) / nonzero[0])
    full_rank = nonzero.size == problem.prior.dim
    _, _, u_r = _whitened_svd(problem)
    return Theorem2Certificate(_phase_permutation_residual(u_r), spread, full_rank, tol)


def semiglm_mmse_optimal(problem: SemiGlmProblem, cert_tol: float = 1e-8) -> MmseOptimal:
    """Weighted water-filling waveform minimizing the MMSE over ``R_x = U_F diag(p) U_F^H``.

    ``bound_value`` is the closed-form objective at the optimal powers and
    ``exact_mmse`` the posterior trace evaluated at the constructed gram; the
    two agree to rounding. ``globally_optimal`` is set when the equality
    alignment condition holds, in which case no other gram does better.
    """
    u_f, sv, u_r = _whitened_svd(problem)
    lam_f = sv**2
    active = _active_mask(lam_f, problem.tol)
    if not np.any(active):
        raise ZeroChannel("F Σ F^H vanishes")
    sigma2 = problem.noise.sigma_z_sq
    paired = np.real(np.einsum("ij,i,ij->j", u_r.conj(), problem.prior.variances, u_r))
    paired = np.maximum(paired, 0.0)

    r = int(np.count_nonzero(active))
    floors = sigma2 / lam_f[:r]
    weights = np.sqrt(sigma2 * paired[:r] / lam_f[:r])
    alloc_active = waterfill_weighted(floors, weights, problem.budget, problem.tol)
    levels = np.zeros(problem.obs_dim)
    levels[:r] = alloc_active.levels
    alloc = WaterfillAllocation(levels, alloc_active.water_level, alloc_active.budget_used)

    basis = u_f[:, :r]
    gram = hermitian_part((basis * levels[:r]) @ basis.conj().T)
    bound = float(np.sum(paired[:r] / (lam_f[:r] * levels[:r] / sigma2 + 1.0)) + np.sum(paired[r:]))
    wg = WaveformGram(gram, problem.budget, problem.rows, tol=problem.tol)
    exact = semiglm_mmse_at(problem, wg)
    aligned = _phase_permutation_residual(u_r) <= cert_tol
    return MmseOptimal(wg, bound, exact, alloc, paired, lam_f, aligned)


def lemma1_check(a, lam, tol: Tolerances = DEFAULT_TOL) -> Lemma1Result:
    """Slack of ``tr(A^{-1} Λ) >= sum_i Λ_ii / A_ii`` for Hermitian PD ``A``.

    ``lam`` may be the positive diagonal as a vector or as a diagonal matrix.
    """
    a = np.asarray(a, dtype=complex)
    d = np.asarray(lam)
    d = np.real(np.diag(d)) if d.ndim == 2 else np.asarray(d, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or d.shape != (a.shape[0],):
        raise DimensionMismatch("A must be square and Lambda must match its size")
    try:
        factor = linalg.cho_factor(hermitian_part(a), lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("A is not positive definite") from exc
    trace = float(np.real(np.trace(linalg.cho_solve(factor, np.diag(d).astype(complex)))))
    diag = np.real(np.diag(a))
    slack = trace - float(np.sum(d / diag))
    scale = max(1.0, abs(trace))
    off = a - np.diag(np.diag(a))
    is_diagonal = float(np.max(np.abs(off), initial=0.0)) <= tol.tol_herm * max(1.0, float(np.max(np.abs(a))))
    return Lemma1Result(slack, slack >= -tol.tol_rel * scale, is_diagonal)


def semiglm_analyze(problem: SemiGlmProblem, cert_tol: float = 1e-8) -> SemiGlmAnalysis:
    """Both optimal waveforms, their MMSEs and estimation rates, and the certificate.

    Raises
    ------
    InvariantViolation
        If ``ser_mi <= ser_mmse <= mi_opt`` or ``mmse_opt <= mmse_mi_waveform``
        fails beyond ``tol_rel``.
    """
    tol = problem.tol
    mi_w = semiglm_mi_optimal(problem)
    mmse_w = semiglm_mmse_optimal(problem, cert_tol)
    mmse_mi = semiglm_mmse_at(problem, mi_w.gram)
    mmse_opt = mmse_w.exact_mmse
    variances = problem.prior.variances
    ser_mi, _ = estimation_rate(variances, mmse_mi, tol)
    ser_mmse, _ = estimation_rate(variances, mmse_opt, tol)
    cert = theorem2_certificate(problem, cert_tol)

    slack = tol.tol_rel * (1.0 + mi_w.mi_nats)
    if mmse_opt > mmse_mi * (1 + tol.tol_rel):
        raise InvariantViolation(f"MMSE-optimal waveform worse than MI-optimal: {mmse_opt!r} > {mmse_mi!r}")
    if ser_mi > ser_mmse + slack or ser_mmse > mi_w.mi_nats + slack:
        raise InvariantViolation(
            f"ordering ser_mi <= ser_mmse <= mi_opt broken: {ser_mi!r}, {ser_mmse!r}, {mi_w.mi_nats!r}"
        )
    return SemiGlmAnalysis(mi_w.mi_nats, mmse_mi, mmse_opt, ser_mi, ser_mmse, cert, mi_w, mmse_w)

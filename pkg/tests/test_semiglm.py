import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from serate.core import (
    GaussianPrior,
    NoiseModel,
    random_covariance,
    random_gaussian_matrix,
    random_unitary,
)
from serate.errors import DimensionMismatch, NotPositiveDefinite
from serate.glm import glm_optimal_waveform, glm_ser
from serate.semiglm import (
    SemiGlmProblem,
    lemma1_check,
    semiglm_analyze,
    semiglm_mi_at,
    semiglm_mi_optimal,
    semiglm_mmse_at,
    semiglm_mmse_optimal,
    theorem2_certificate,
)


def _prior(m, seed):
    return GaussianPrior.from_covariance(random_covariance(m, seed))


def _aligned(prior, sv, seed):
    m = prior.dim
    return (random_unitary(m, seed) * np.asarray(sv)) @ prior.covariance.eigenvectors.conj().T


def test_identity_map_reduces_to_glm():
    prior = _prior(4, 0)
    noise = NoiseModel(0.7)
    res = semiglm_analyze(SemiGlmProblem(np.eye(4), prior, noise, 3.0))
    glm = glm_ser(prior, glm_optimal_waveform(prior, noise, 3.0, 4).gram, noise)
    assert res.mi_opt == pytest.approx(glm.mi_nats, rel=1e-12)
    assert res.ser_mmse == pytest.approx(glm.mi_nats, rel=1e-10)
    assert res.equality_certificate.passed


def test_equal_singular_values_aligned_give_equality():
    prior = _prior(5, 1)
    problem = SemiGlmProblem(_aligned(prior, [1.3] * 5, 2), prior, NoiseModel(1.0), 4.0)
    res = semiglm_analyze(problem)
    assert res.equality_certificate.passed
    assert abs(res.ser_mmse - res.mi_opt) <= 1e-7


def test_unequal_singular_values_break_equality():
    prior = _prior(4, 3)
    problem = SemiGlmProblem(_aligned(prior, [2.0, 1.5, 1.0, 0.6], 4), prior, NoiseModel(1.0), 4.0)
    res = semiglm_analyze(problem)
    assert not res.equality_certificate.passed
    assert res.equality_certificate.residual_alignment < 1e-10
    assert res.ser_mi < res.ser_mmse < res.mi_opt
    assert res.mmse_waveform.globally_optimal


def test_random_right_basis_loses_mi():
    prior = _prior(4, 5)
    sv = [2.0, 1.5, 1.0, 0.6]
    aligned = semiglm_mi_optimal(SemiGlmProblem(_aligned(prior, sv, 6), prior, NoiseModel(1.0), 4.0))
    f = (random_unitary(4, 6) * np.asarray(sv)) @ random_unitary(4, 7).conj().T
    mixed = SemiGlmProblem(f, prior, NoiseModel(1.0), 4.0)
    assert semiglm_mi_optimal(mixed).mi_nats < aligned.mi_nats
    assert theorem2_certificate(mixed).residual_alignment > 0.1


def test_certificate_requires_full_rank():
    prior = _prior(3, 8)
    f = np.zeros((3, 3), dtype=complex)
    f[:2, :2] = np.eye(2)
    cert = theorem2_certificate(SemiGlmProblem(f, prior, NoiseModel(1.0), 2.0))
    assert not cert.full_rank and not cert.passed


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        SemiGlmProblem(np.eye(3), _prior(2, 0), NoiseModel(1.0), 1.0)


def test_lemma1_examples():
    res = lemma1_check(np.array([[2.0, 1.0], [1.0, 2.0]]), [1.0, 1.0])
    assert res.slack == pytest.approx(1 / 3)
    diag = lemma1_check(np.diag([1.0, 3.0]), np.diag([2.0, 5.0]))
    assert diag.diagonal and abs(diag.slack) < 1e-14
    with pytest.raises(NotPositiveDefinite):
        lemma1_check(np.array([[1.0, 2.0], [2.0, 1.0]]), [1.0, 1.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 5000))
def test_mi_optimal_beats_random_search(m, seed):
    prior = _prior(m, seed)
    f = random_gaussian_matrix(m, m, seed + 1)
    problem = SemiGlmProblem(f, prior, NoiseModel(1.0), 2.0)
    best = semiglm_mi_optimal(problem)
    assert best.gram.power == pytest.approx(2.0, rel=1e-9)
    rng = np.random.default_rng(seed)
    for _ in range(40):
        b = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        gram = b.conj().T @ b
        gram *= 2.0 / np.trace(gram).real
        assert semiglm_mi_at(problem, gram) <= best.mi_nats + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 5000))
def test_mmse_optimal_beats_mi_waveform_and_ordering(m, seed):
    prior = _prior(m, seed)
    f = random_gaussian_matrix(m + 1, m, seed + 2)
    problem = SemiGlmProblem(f, prior, NoiseModel(0.5), 3.0)
    res = semiglm_analyze(problem)
    opt = semiglm_mmse_optimal(problem)
    assert semiglm_mmse_at(problem, opt.gram) == pytest.approx(opt.exact_mmse, rel=1e-9)
    assert res.mmse_opt <= res.mmse_mi_waveform * (1 + 1e-9)
    assert res.ser_mi <= res.ser_mmse * (1 + 1e-9) + 1e-12
    assert res.ser_mmse <= res.mi_opt * (1 + 1e-9) + 1e-12


def test_mmse_optimal_two_mode_grid_oracle():
    # aligned F: every diagonal gram in the singular basis is reachable, so a grid is exhaustive
    prior = GaussianPrior.from_variances([2.0, 0.5])
    f = np.diag([1.5, 0.8])
    problem = SemiGlmProblem(f, prior, NoiseModel(1.0), 2.0)
    opt = semiglm_mmse_optimal(problem)
    p = np.linspace(0, 2.0, 4001)
    grid = 2.0 / (1 + 2.0 * 2.25 * p) + 0.5 / (1 + 0.5 * 0.64 * (2.0 - p))
    assert opt.exact_mmse <= grid.min() + 1e-9
    assert opt.exact_mmse == pytest.approx(grid.min(), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10_000))
def test_lemma1_property(n, seed):
    b = random_gaussian_matrix(n, n, seed)
    a = b @ b.conj().T + 0.05 * np.eye(n)
    lam = np.random.default_rng(seed).uniform(0.1, 3.0, n)
    res = lemma1_check(a, lam)
    direct = np.trace(np.linalg.inv(a) @ np.diag(lam)).real - np.sum(lam / np.diag(a).real)
    assert res.slack == pytest.approx(direct, rel=1e-8, abs=1e-10)
    assert res.slack >= -1e-10

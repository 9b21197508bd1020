import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from serate.bcrb import (
    NonlinearChannel,
    bcrb_min,
    choi_reduce,
    delay_bcrb,
    delay_channel,
    delay_crb,
    delay_ser,
    effective_bandwidth,
    finite_difference_jacobian,
    prior_fim_gaussian,
    ser_upper_bound,
)
from serate.core import GaussianPrior, NoiseModel, random_covariance, random_gaussian_matrix, random_unitary
from serate.errors import NonPositiveInput, ZeroEnergy


def _linear_channel(jac, prior):
    return NonlinearChannel(lambda eta: jac @ eta, prior, jacobian=lambda eta: jac, constant_jacobian=True)


def _bcrb_oracle(jac, sigma, gram, s2):
    info = jac.conj().T @ gram @ jac / s2 + np.linalg.inv(sigma)
    return float(np.real(np.trace(np.linalg.inv(info))))


def test_choi_rank_one_for_constant_jacobian():
    prior = GaussianPrior.from_covariance(random_covariance(3, 0))
    jac = random_gaussian_matrix(4, 3, 1)
    red = choi_reduce(_linear_channel(jac, prior))
    assert red.rank1_residual < 1e-12
    # G equals the Jacobian up to a global phase
    phase = np.vdot(red.G, jac) / abs(np.vdot(red.G, jac))
    np.testing.assert_allclose(red.G * phase, jac, atol=1e-12)


def test_choi_sampled_reports_truncation():
    prior = GaussianPrior.from_variances([0.3, 0.3], real=True)

    def h(eta):
        return np.array([np.sin(eta[0]), np.cos(eta[1]), eta[0] * eta[1]])

    red = choi_reduce(NonlinearChannel(h, prior), n_samples=300, seed=2)
    assert 0 < red.rank1_residual < 1
    assert red.lambda_psi == pytest.approx(np.linalg.eigvalsh(red.psi)[-1])


def test_finite_difference_jacobian():
    def h(eta):
        return np.array([eta[0] ** 2, np.exp(1j * eta[1])])

    eta = np.array([0.7, -0.3])
    jac = finite_difference_jacobian(h, eta)
    np.testing.assert_allclose(jac, [[1.4, 0], [0, 1j * np.exp(-0.3j)]], atol=1e-8)


def test_prior_fim_is_inverse_covariance():
    sigma = random_covariance(3, 4)
    fim = prior_fim_gaussian(GaussianPrior.from_covariance(sigma))
    np.testing.assert_allclose(fim @ sigma, np.eye(3), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 5000), st.floats(0.2, 10.0))
def test_bcrb_min_matches_oracle(m, seed, budget):
    sigma = random_covariance(m, seed)
    prior = GaussianPrior.from_covariance(sigma)
    jac = random_gaussian_matrix(m, m, seed + 1)
    ch = _linear_channel(jac, prior)
    res = bcrb_min(ch, choi_reduce(ch), NoiseModel(1.0), budget)
    assert res.value == pytest.approx(_bcrb_oracle(jac, sigma, res.gram.gram, 1.0), rel=1e-8)
    assert res.gram.power <= budget * (1 + 1e-9)
    assert res.value <= np.trace(sigma).real * (1 + 1e-12)


def test_bcrb_min_optimal_for_aligned_channel():
    prior = GaussianPrior.from_variances([2.0, 1.0, 0.5])
    jac = random_unitary(3, 5) @ np.diag([1.4, 1.0, 0.7])
    ch = _linear_channel(jac, prior)
    res = bcrb_min(ch, choi_reduce(ch), NoiseModel(1.0), 3.0)
    rng = np.random.default_rng(0)
    for _ in range(300):
        p = rng.dirichlet(np.ones(3)) * 3.0
        gram = random_unitary(3, 5) @ np.diag(p) @ random_unitary(3, 5).conj().T
        assert res.value <= _bcrb_oracle(jac, prior.matrix(), gram, 1.0) + 1e-10


def test_ser_bound_equality_aligned_and_ordering_random():
    prior = GaussianPrior.from_variances([2.0, 1.0, 0.5])
    jac = 1.3 * random_unitary(3, 7)
    ch = _linear_channel(jac, prior)
    # equal singular values and a unitary left factor: rotate the right side onto the prior basis
    b = ser_upper_bound(ch, choi_reduce(ch), NoiseModel(1.0), 2.0)
    assert abs(b.bound - b.ser_bcrb) <= 1e-7
    sigma = random_covariance(3, 8)
    jac = random_gaussian_matrix(3, 3, 9)
    ch = _linear_channel(jac, GaussianPrior.from_covariance(sigma))
    b = ser_upper_bound(ch, choi_reduce(ch), NoiseModel(1.0), 2.0)
    assert b.ser_bcrb <= b.bound + 1e-9


def test_delay_closed_forms():
    crb = delay_crb(2.0, 10.0)
    assert crb == pytest.approx(1 / (160 * np.pi**2))
    assert delay_crb(4.0, 10.0) == pytest.approx(crb / 2)
    assert delay_bcrb(1.0, 2.0, 10.0) == pytest.approx(1 / (1 / crb + 1))
    assert delay_ser(1.0, 2.0, 10.0) == pytest.approx(np.log1p(1 / crb))
    with pytest.raises(NonPositiveInput):
        delay_crb(1.0, 0.0)


def test_delay_channel_matches_bcrb_min():
    for snr in (0.1, 1.0, 10.0):
        ch = delay_channel(0.5, 1.0)
        res = bcrb_min(ch, choi_reduce(ch), NoiseModel(1.0), snr)
        assert res.value == pytest.approx(delay_bcrb(0.5, 1.0, snr), rel=1e-10)


def test_effective_bandwidth_flat_and_zero():
    b = 3.0
    f = np.linspace(-b / 2, b / 2, 4096)
    assert effective_bandwidth(f, np.ones_like(f)) == pytest.approx(b**2 / 12, rel=1e-3)
    with pytest.raises(ZeroEnergy):
        effective_bandwidth(f, np.zeros_like(f))

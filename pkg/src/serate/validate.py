"""One-shot invariant suite: closed-form identities, orderings and Monte Carlo agreement.

Each check returns its worst residual and the threshold it is compared to;
a check passes when ``residual <= threshold``. Passing ``tol`` overrides every
deterministic threshold (the Monte Carlo check is measured in standard
errors and keeps its own limit), which is how the failure path is exercised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bcrb import choi_reduce, delay_bcrb, delay_crb, ser_upper_bound, NonlinearChannel
from .core import (
    GaussianPrior,
    NoiseModel,
    WaveformGram,
    random_covariance,
    random_feasible_waveform,
    random_gaussian_matrix,
    random_unitary,
)
from .glm import glm_mi, glm_mmse, glm_optimal_waveform, glm_ser
from .montecarlo import McConfig, empirical_mmse
from .semiglm import SemiGlmProblem, lemma1_check, semiglm_analyze
from .waterfill import waterfill_direct, waterfill_inverse, waterfill_weighted

__all__ = ["CheckResult", "ValidationReport", "run_validate", "DEFAULT_SIZES"]

DEFAULT_SIZES = (2, 4, 8)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    seed: int = 0
    sizes: tuple = DEFAULT_SIZES

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name} residual={c.residual!r} threshold={c.threshold!r}"
            for c in self.checks
        ]


def _theorem1(seed, sizes):
    worst = 0.0
    for m in sizes:
        for k, budget in enumerate((0.1, 1.0, 10.0)):
            prior = GaussianPrior.from_covariance(random_covariance(m, seed + 7 * m + k))
            opt = glm_optimal_waveform(prior, NoiseModel(1.0), budget, m, seed=seed)
            res = glm_ser(prior, opt.gram, NoiseModel(1.0))
            worst = max(worst, abs(res.ser_nats - res.mi_nats) / (1 + res.mi_nats))
    return worst


def _bound_chain(seed, sizes):
    worst = 0.0
    noise = NoiseModel(1.0)
    for m in sizes:
        prior = GaussianPrior.from_covariance(random_covariance(m, seed + m))
        best = glm_mi(prior, glm_optimal_waveform(prior, noise, 2.0, m, seed=seed).gram, noise)
        for k in range(20):
            x = random_feasible_waveform(m, m, 2.0, seed + 100 * m + k)
            res = glm_ser(prior, WaveformGram.from_factor(x, 2.0), noise)
            worst = max(worst, (res.ser_nats - res.mi_nats) / (1 + res.mi_nats), (res.mi_nats - best) / (1 + best))
    return max(worst, 0.0)


def _theorem2(seed, sizes):
    worst = 0.0
    for m in sizes:
        prior = GaussianPrior.from_covariance(random_covariance(m, seed + m))
        f = 1.7 * random_unitary(m, seed + 11 * m) @ prior.covariance.eigenvectors.conj().T
        res = semiglm_analyze(SemiGlmProblem(f, prior, NoiseModel(0.5), 3.0))
        if not res.equality_certificate.passed:
            return float("inf")
        worst = max(worst, abs(res.ser_mmse - res.mi_opt))
    return worst


def _semiglm_order(seed, sizes):
    worst = 0.0
    for m in sizes:
        for k in range(5):
            prior = GaussianPrior.from_covariance(random_covariance(m, seed + 13 * m + k))
            f = random_gaussian_matrix(m, m, seed + 17 * m + k)
            res = semiglm_analyze(SemiGlmProblem(f, prior, NoiseModel(1.0), 2.0))
            scale = 1 + res.mi_opt
            worst = max(worst, (res.ser_mi - res.ser_mmse) / scale, (res.ser_mmse - res.mi_opt) / scale)
    return max(worst, 0.0)


def _lemma1(seed, sizes):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for m in sizes:
        for k in range(20):
            b = random_gaussian_matrix(m, m, seed + 1000 + 31 * m + k)
            a = b @ b.conj().T + 0.1 * np.eye(m)
            res = lemma1_check(a, rng.uniform(0.1, 2.0, m))
            worst = max(worst, -res.slack)
    return max(worst, 0.0)


def _waterfill(seed, sizes):
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    for m in sizes:
        floors = rng.uniform(0.1, 3.0, m)
        budget = float(rng.uniform(0.5, 5.0))
        worst = max(worst, abs(waterfill_direct(floors, budget).budget_used - budget) / budget)
        w = waterfill_weighted(floors, rng.uniform(0.2, 2.0, m), budget)
        worst = max(worst, abs(w.budget_used - budget) / budget)
        s = rng.uniform(0.1, 3.0, m)
        target = float(rng.uniform(0.05, 1.0)) * s.sum()
        worst = max(worst, abs(waterfill_inverse(s, target).budget_used - target) / target)
    return worst


def _delay(seed):
    worst = 0.0
    for snr_db in np.linspace(-20, 40, 13):
        snr = 10.0 ** (snr_db / 10)
        crb, bcrb = delay_crb(1.0, snr), delay_bcrb(1.0, 1.0, snr)
        worst = max(worst, abs(np.log1p(1.0 / crb) - max(np.log(1.0 / bcrb), 0.0)))
    return worst


def _bcrb(seed, sizes):
    worst = 0.0
    for m in sizes[:2]:
        prior = GaussianPrior.from_covariance(random_covariance(m, seed + 41 * m))
        jac = random_gaussian_matrix(m, m, seed + 43 * m)
        channel = NonlinearChannel(lambda eta, j=jac: j @ eta, prior, jacobian=lambda eta, j=jac: j, constant_jacobian=True)
        red = choi_reduce(channel, n_samples=16, seed=seed)
        bound = ser_upper_bound(channel, red, NoiseModel(1.0), 2.0)
        worst = max(worst, (bound.ser_bcrb - bound.bound) / (1 + bound.bound))
    return max(worst, 0.0)


def _monte_carlo(seed, sizes):
    worst = 0.0
    for m in sizes[:2]:
        prior = GaussianPrior.from_covariance(random_covariance(m, seed + 51 * m))
        x = random_feasible_waveform(m, m, 2.0, seed + 53 * m)
        noise = NoiseModel(1.0)
        mc = empirical_mmse(x, None, prior, noise, McConfig(20_000, seed + m))
        exact = glm_mmse(prior, x.conj().T @ x, noise)
        worst = max(worst, abs(mc.empirical_mmse - exact) / mc.stderr)
    return worst


def run_validate(seed: int = 0, sizes=DEFAULT_SIZES, tol: float | None = None) -> ValidationReport:
    """Run every check at the given problem sizes.

    Parameters
    ----------
    seed : int
        Base seed; the same seed gives an identical report.
    sizes : sequence of int
        Parameter dimensions exercised by each check.
    tol : float, optional
        Override for every deterministic threshold.
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes or min(sizes) < 1:
        raise ValueError("sizes must be positive integers")

    def thr(default):
        return default if tol is None else float(tol)

    report = ValidationReport(seed=seed, sizes=sizes)
    plan = [
        ("theorem1_equality", lambda: _theorem1(seed, sizes), thr(1e-8)),
        ("glm_bound_chain", lambda: _bound_chain(seed, sizes), thr(1e-9)),
        ("theorem2_equality", lambda: _theorem2(seed, sizes), thr(1e-7)),
        ("semiglm_ordering", lambda: _semiglm_order(seed, sizes), thr(1e-9)),
        ("lemma1_slack", lambda: _lemma1(seed, sizes), thr(1e-10)),
        ("waterfill_budget", lambda: _waterfill(seed, sizes), thr(1e-12)),
        ("delay_rate_identity", lambda: _delay(seed), thr(1e-12)),
        ("bcrb_ser_bound", lambda: _bcrb(seed, sizes), thr(1e-9)),
        ("monte_carlo_stderr", lambda: _monte_carlo(seed, sizes), 3.0),
    ]
    for name, fn, threshold in plan:
        report.checks.append(CheckResult(name, float(fn()), threshold))
    return report

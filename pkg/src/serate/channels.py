"""Concrete sensing channels: collocated MIMO radar and time-varying OFDM CIR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bcrb import NonlinearChannel
from .core import GaussianPrior
from .errors import DelayOutOfRange, DimensionMismatch

__all__ = [
    "MimoRadarScene",
    "OfdmScene",
    "steering_vector",
    "mimo_channel",
    "mimo_nonlinear_channel",
    "ofdm_cir",
]


@dataclass(frozen=True)
class MimoRadarScene:
    alphas: np.ndarray
    thetas: np.ndarray
    m_t: int
    m_r: int
    element_spacing: float = 0.5

    def __post_init__(self):
        alphas = np.atleast_1d(np.asarray(self.alphas, dtype=complex))
        thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        if alphas.shape != thetas.shape or alphas.ndim != 1:
            raise DimensionMismatch("alphas and thetas must have one entry per target")
        if np.any(np.abs(thetas) >= np.pi / 2):
            raise ValueError("target angles must lie in (-pi/2, pi/2)")
        if self.m_t < 1 or self.m_r < 1:
            raise ValueError("antenna counts must be positive")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "thetas", thetas)

    @property
    def n_targets(self) -> int:
        return self.alphas.size

    @property
    def params(self) -> np.ndarray:
        """Parameter vector ``[θ, Re α, Im α]``."""
        return np.concatenate([self.thetas, self.alphas.real, self.alphas.imag])


def steering_vector(n: int, theta: float, spacing: float = 0.5) -> np.ndarray:
    """ULA response ``exp(j 2π d k sin θ)``, ``k = 0..n-1``; element 0 is the phase reference."""
    k = np.arange(n)
    return np.exp(2j * np.pi * spacing * k * np.sin(theta))


def mimo_channel(scene: MimoRadarScene) -> tuple[np.ndarray, np.ndarray]:
    """Channel ``H = sum_i α_i a(θ_i) b(θ_i)^H`` and the Jacobian of ``vec(H)``.

    Returns
    -------
    H : ndarray, shape (m_r, m_t)
    jacobian : ndarray, shape (m_r * m_t, 3 L)
        Columns ordered as ``[∂/∂θ, ∂/∂Re α, ∂/∂Im α]``; ``vec`` stacks columns.
    """
    d = scene.element_spacing
    kr = np.arange(scene.m_r)
    kt = np.arange(scene.m_t)
    h = np.zeros((scene.m_r, scene.m_t), dtype=complex)
    n = scene.n_targets
    jac = np.zeros((scene.m_r * scene.m_t, 3 * n), dtype=complex)
    for i, (alpha, theta) in enumerate(zip(scene.alphas, scene.thetas)):
        a = steering_vector(scene.m_r, theta, d)
        b = steering_vector(scene.m_t, theta, d)
        outer = np.outer(a, b.conj())
        h += alpha * outer
        # d/dθ of exp(j 2π d (k_r - k_t) sin θ)
        phase_rate = 2j * np.pi * d * np.cos(theta) * (kr[:, None] - kt[None, :])
        jac[:, i] = (alpha * phase_rate * outer).reshape(-1, order="F")
        jac[:, n + i] = outer.reshape(-1, order="F")
        jac[:, 2 * n + i] = 1j * outer.reshape(-1, order="F")
    return h, jac


def mimo_nonlinear_channel(scene: MimoRadarScene, prior: GaussianPrior) -> NonlinearChannel:
    """Wrap the MIMO radar model as ``η -> vec(H(η))`` with ``η = [θ, Re α, Im α]``.

    The scene fixes the array geometry and target count; its parameter
    values are ignored.
    """
    n = scene.n_targets
    if prior.dim != 3 * n:
        raise DimensionMismatch(f"prior must have dimension {3 * n}")

    def at(eta):
        eta = np.asarray(eta, dtype=float)
        return MimoRadarScene(eta[2 * n:] * 1j + eta[n:2 * n], eta[:n], scene.m_t, scene.m_r, scene.element_spacing)

    def h_map(eta):
        return mimo_channel(at(eta))[0].reshape(-1, order="F")

    def jacobian(eta):
        return mimo_channel(at(eta))[1]

    return NonlinearChannel(h_map, prior, jacobian=jacobian)


@dataclass(frozen=True)
class OfdmScene:
    n_subcarriers: int
    path_gains: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.path_gains, dtype=complex))
        delays = np.atleast_1d(np.asarray(self.delays))
        dopplers = np.atleast_1d(np.asarray(self.dopplers, dtype=float))
        if not (gains.shape == delays.shape == dopplers.shape) or gains.ndim != 1:
            raise DimensionMismatch("path gains, delays and dopplers must have one entry per path")
        if gains.size > self.n_subcarriers:
            raise ValueError("more paths than subcarriers")
        if not np.all(delays == np.round(delays)):
            raise DelayOutOfRange("delays must be integer sample counts")
        delays = delays.astype(int)
        if np.any(delays < 0) or np.any(delays >= self.n_subcarriers):
            raise DelayOutOfRange(f"delays must lie in [0, {self.n_subcarriers})")
        if np.unique(delays).size != delays.size:
            raise DelayOutOfRange("path delays must be distinct")
        object.__setattr__(self, "path_gains", gains)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "dopplers", dopplers)


def ofdm_cir(scene: OfdmScene) -> np.ndarray:
    """Time-varying cyclic CIR matrix.

    Entry ``(n, (n - τ_i) mod N)`` accumulates ``α_i exp(j 2π f_D,i n)``, so
    ``y = H x`` applies ``h(n, m) = sum_i α_i δ(m - τ_i) e^{j 2π f_D,i n}`` as a
    cyclic convolution (Doppler in cycles per sample).
    """
    n_sc = scene.n_subcarriers
    rows = np.arange(n_sc)
    h = np.zeros((n_sc, n_sc), dtype=complex)
    for alpha, tau, fd in zip(scene.path_gains, scene.delays, scene.dopplers):
        h[rows, (rows - tau) % n_sc] += alpha * np.exp(2j * np.pi * fd * rows)
    return h

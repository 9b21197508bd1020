"""Optimal sensing waveform for a linear Gaussian model.

With M = 10 parameters, T = 20 snapshots and unit power per snapshot, the
water-filling waveform makes the estimation rate equal to the mutual
information at every SNR, while an arbitrary waveform of the same energy
loses on both counts.
"""

import numpy as np

from serate import GaussianPrior, NoiseModel, WaveformGram, glm_optimal_waveform, glm_ser
from serate.core import random_covariance, random_feasible_waveform

M, T, P_T = 10, 20, 1.0
budget = T * P_T
prior = GaussianPrior.from_covariance(random_covariance(M, seed=0))
x_rand = random_feasible_waveform(T, M, budget, seed=1)

print(f"{'SNR dB':>7} {'MI opt':>9} {'SER opt':>9} {'MI rand':>9} {'SER rand':>9}")
for snr_db in range(-10, 31, 5):
    noise = NoiseModel(budget / (M * 10 ** (snr_db / 10)))
    opt = glm_optimal_waveform(prior, noise, budget, T)
    a = glm_ser(prior, opt.gram, noise)
    b = glm_ser(prior, WaveformGram.from_factor(x_rand, budget), noise)
    print(f"{snr_db:7d} {a.mi_nats:9.4f} {a.ser_nats:9.4f} {b.mi_nats:9.4f} {b.ser_nats:9.4f}")

# power goes to the strongest prior modes first
opt = glm_optimal_waveform(prior, NoiseModel(1.0), budget, T)
print("\nprior variances :", np.round(prior.variances, 3))
print("power per mode  :", np.round(opt.alloc.levels, 3))

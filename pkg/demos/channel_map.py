"""How the uncontrollable part of the channel limits the estimation rate.

For y = X F eta + z the waveform cannot undo F. When F has equal singular
values and its right singular vectors line up with the prior eigenvectors,
the MMSE-optimal waveform still reaches the mutual-information optimum.
Spreading the singular values, or rotating the right basis, opens a gap.
"""

from serate.sweeps import ExperimentConfig, run_semiglm_sweep

for mode in ("equal_eigs_aligned", "random_eigs_aligned", "random_eigs_random_ur"):
    cfg = ExperimentConfig(model="semiglm", f_mode=mode, snr_grid_db=(0.0, 10.0, 20.0))
    print(mode)
    for row in run_semiglm_sweep(cfg):
        print(f"  SNR {row['snr_db']:5.1f} dB  MI* {row['mi_opt']:8.4f}  SER(MMSE wf) {row['ser_mmse']:8.4f}"
              f"  SER(MI wf) {row['ser_mi']:8.4f}  certificate {row['certificate_pass']}")

"""Sensing estimation rate, mutual information and MMSE for Gaussian sensing channels."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DEFAULT_TOL,
    GaussianPrior,
    HermitianSpectrum,
    NoiseModel,
    Tolerances,
    WaveformGram,
    random_covariance,
    random_feasible_waveform,
    random_unitary,
    spectrum_from_matrix,
)
from .errors import *  # noqa: E402,F401,F403
from .glm import glm_mi, glm_mmse, glm_optimal_waveform, glm_ser, estimation_rate  # noqa: E402
from .semiglm import (  # noqa: E402
    SemiGlmProblem,
    lemma1_check,
    semiglm_analyze,
    semiglm_mi_optimal,
    semiglm_mmse_optimal,
    theorem2_certificate,
)
from .waterfill import waterfill_direct, waterfill_inverse, waterfill_weighted  # noqa: E402
from .bcrb import (  # noqa: E402
    NonlinearChannel,
    bcrb_min,
    choi_reduce,
    delay_bcrb,
    delay_crb,
    delay_ser,
    effective_bandwidth,
    ser_upper_bound,
)
from .montecarlo import McConfig, empirical_mmse  # noqa: E402

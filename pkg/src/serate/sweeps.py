"""Batch sweeps over SNR and the CSV / manifest writers used by the CLI.

SNR is defined as ``budget / (M σ_z^2)`` with budget ``T P_T``; each sweep
keeps the budget fixed and sets the noise variance from the SNR grid. When
the budget is zero the configured ``sigma_z_sq`` is used instead (every rate
is then zero).

Seeds derived from the configured ``seed``: prior covariance ``seed``,
arbitrary waveform ``seed + 1``, orthonormal factor ``seed + 2``, singular
values of ``F`` ``seed + 3``, left/right singular bases ``seed + 4`` /
``seed + 5``, Monte Carlo trials ``seed + 6``.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bcrb import delay_bcrb, delay_crb, delay_ser
from .core import (
    GaussianPrior,
    NoiseModel,
    WaveformGram,
    random_covariance,
    random_feasible_waveform,
    random_unitary,
)
from .errors import ConfigInvalid, InvariantViolation
from .glm import glm_optimal_waveform, glm_ser
from .montecarlo import McConfig, empirical_mmse
from .semiglm import SemiGlmProblem, semiglm_analyze

__all__ = [
    "ExperimentConfig",
    "F_MODES",
    "build_channel_map",
    "run_glm_sweep",
    "run_semiglm_sweep",
    "run_delay_sweep",
    "format_csv",
    "format_manifest",
    "parse_config_text",
    "RATE_COLUMNS",
]

F_MODES = ("identity", "equal_eigs_aligned", "random_eigs_aligned", "random_eigs_random_ur")
MODELS = ("glm", "semiglm", "delay")
RATE_COLUMNS = frozenset({"mi", "ser", "gap", "mi_opt", "ser_mi", "ser_mmse"})

UNITS = {
    "snr_db": "dB (10 log10(budget / (M sigma_z_sq)))",
    "snr": "linear",
    "sigma_z_sq": "noise variance per complex sample",
    "waveform": "label",
    "mmse": "parameter variance",
    "mmse_mc": "parameter variance (Monte Carlo)",
    "mmse_mc_stderr": "parameter variance (Monte Carlo)",
    "mmse_mi_waveform": "parameter variance",
    "mmse_opt": "parameter variance",
    "residual_alignment": "dimensionless",
    "residual_spread": "dimensionless",
    "certificate_pass": "boolean",
    "b_rms_sq": "squared frequency",
    "crb": "squared delay",
    "bcrb": "squared delay",
}

SER_EQUALITY_TOL = 1e-8
THEOREM2_TOL = 1e-7
ORDER_TOL = 1e-9


@dataclass
class ExperimentConfig:
    model: str = "glm"
    M: int = 10
    T: int = 20
    m_r: int = 1
    power: float = 1.0
    snr_grid_db: tuple = tuple(float(v) for v in range(-10, 31, 5))
    sigma_z_sq: float = 1.0
    seed: int = 0
    f_mode: str = "random_eigs_aligned"
    sv_low: float = 0.5
    sv_high: float = 2.0
    mc_trials: int = 0
    log_base: str = "nats"
    sigma_eta_sq: float = 1.0
    b_rms_sq: tuple = (1.0,)

    def validate(self) -> "ExperimentConfig":
        if self.model not in MODELS:
            raise ConfigInvalid(f"model must be one of {MODELS}, got {self.model!r}")
        if self.f_mode not in F_MODES:
            raise ConfigInvalid(f"f_mode must be one of {F_MODES}, got {self.f_mode!r}")
        if self.log_base not in ("nats", "bits"):
            raise ConfigInvalid("log_base must be 'nats' or 'bits'")
        if self.M < 1 or self.T < 1 or self.m_r < 1:
            raise ConfigInvalid("M, T and m_r must be at least 1")
        if self.power < 0 or not math.isfinite(self.power):
            raise ConfigInvalid("power must be finite and non-negative")
        if not self.snr_grid_db:
            raise ConfigInvalid("snr_grid_db must not be empty")
        if any(math.isnan(v) or v == math.inf for v in self.snr_grid_db):
            raise ConfigInvalid("snr_grid_db entries must be finite or -inf")
        if self.sigma_z_sq <= 0 or self.sigma_eta_sq <= 0:
            raise ConfigInvalid("variances must be positive")
        if not self.b_rms_sq or any(b <= 0 for b in self.b_rms_sq):
            raise ConfigInvalid("b_rms_sq values must be positive")
        if not 0 < self.sv_low <= self.sv_high:
            raise ConfigInvalid("need 0 < sv_low <= sv_high")
        if self.mc_trials < 0:
            raise ConfigInvalid("mc_trials must be non-negative")
        return self

    @property
    def budget(self) -> float:
        return self.T * self.power

    @property
    def factor_rows(self) -> int:
        return self.m_r * self.T

    def noise_for(self, snr_db: float) -> float:
        if self.budget == 0:
            return self.sigma_z_sq
        snr = 10.0 ** (snr_db / 10.0)
        if snr == 0:
            raise ConfigInvalid("SNR of -inf dB needs a zero budget in the glm/semiglm sweeps")
        return self.budget / (self.M * snr)


def _parse_float_list(text: str) -> tuple:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigInvalid(f"range must be start:stop:step, got {text!r}")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def coerce_field(name: str, raw) -> object:
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    if name not in fields:
        raise ConfigInvalid(f"unknown config key {name!r}")
    default = fields[name].default
    try:
        if isinstance(default, tuple):
            return raw if isinstance(raw, tuple) else _parse_float_list(str(raw))
        if isinstance(default, bool):
            return str(raw).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigInvalid(f"bad value for {name}: {raw!r}") from exc
    return str(raw).strip()


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = coerce_field(key, value)
    return values


def _prior(cfg: ExperimentConfig) -> GaussianPrior:
    return GaussianPrior.from_covariance(random_covariance(cfg.M, cfg.seed))


def build_channel_map(cfg: ExperimentConfig, prior: GaussianPrior, f_mode: str | None = None) -> np.ndarray:
    """Channel map ``F`` for one of the ``F_MODES``.

    Modes sharing the seed share the random singular values and left basis,
    so the aligned and random-``U_R`` runs differ only in the right singular
    space.
    """
    mode = f_mode or cfg.f_mode
    m = cfg.M
    u = prior.covariance.eigenvectors
    if mode == "identity":
        return np.eye(m, dtype=complex)
    left = random_unitary(m, cfg.seed + 4)
    if mode == "equal_eigs_aligned":
        return left @ u.conj().T
    rng = np.random.default_rng(cfg.seed + 3)
    sv = np.sort(rng.uniform(cfg.sv_low, cfg.sv_high, m))[::-1]
    right = u if mode == "random_eigs_aligned" else random_unitary(m, cfg.seed + 5)
    return (left * sv) @ right.conj().T


def run_glm_sweep(cfg: ExperimentConfig) -> list[dict]:
    """MI, MMSE and SER for the optimal and a seeded arbitrary waveform per SNR point."""
    cfg.validate()
    prior = _prior(cfg)
    budget = cfg.budget
    x_rand = random_feasible_waveform(cfg.factor_rows, cfg.M, budget, cfg.seed + 1) if budget > 0 else np.zeros((cfg.factor_rows, cfg.M))
    rand_gram = WaveformGram.from_factor(x_rand, budget)
    rows = []
    for snr_db in cfg.snr_grid_db:
        noise = NoiseModel(cfg.noise_for(snr_db))
        opt = glm_optimal_waveform(prior, noise, budget, cfg.factor_rows, seed=cfg.seed + 2)
        for label, gram, factor in (("optimal", opt.gram, opt.factor), ("random", rand_gram, x_rand)):
            res = glm_ser(prior, gram, noise)
            row = {
                "snr_db": snr_db,
                "sigma_z_sq": noise.sigma_z_sq,
                "waveform": label,
                "mi": res.mi_nats,
                "mmse": res.mmse,
                "ser": res.ser_nats,
                "gap": res.mi_nats - res.ser_nats,
            }
            if cfg.mc_trials:
                mc = empirical_mmse(factor, None, prior, noise, McConfig(cfg.mc_trials, cfg.seed + 6))
                row["mmse_mc"] = mc.empirical_mmse
                row["mmse_mc_stderr"] = mc.stderr
            rows.append(row)
    check_glm_rows(rows)
    return rows


def check_glm_rows(rows: list[dict]) -> None:
    """Refuse rows that break ``ser <= mi`` or the optimal-waveform equality."""
    best = {}
    for i, row in enumerate(rows):
        slack = ORDER_TOL * (1 + abs(row["mi"]))
        if row["ser"] > row["mi"] + slack:
            raise InvariantViolation(f"row {i}: ser {row['ser']!r} exceeds mi {row['mi']!r}")
        if row["waveform"] == "optimal":
            if abs(row["ser"] - row["mi"]) > SER_EQUALITY_TOL * (1 + row["mi"]):
                raise InvariantViolation(f"row {i}: optimal waveform has ser != mi")
            best[row["snr_db"]] = row["mi"]
        elif row["snr_db"] in best and row["mi"] > best[row["snr_db"]] * (1 + ORDER_TOL) + ORDER_TOL:
            raise InvariantViolation(f"row {i}: arbitrary waveform beats the optimal MI")


def run_semiglm_sweep(cfg: ExperimentConfig) -> list[dict]:
    """MI-optimal vs MMSE-optimal waveforms for the configured ``F`` per SNR point."""
    cfg.validate()
    prior = _prior(cfg)
    f = build_channel_map(cfg, prior)
    rows = []
    for snr_db in cfg.snr_grid_db:
        noise = NoiseModel(cfg.noise_for(snr_db))
        problem = SemiGlmProblem(f, prior, noise, cfg.budget, factor_rows=cfg.factor_rows)
        res = semiglm_analyze(problem)
        cert = res.equality_certificate
        rows.append({
            "snr_db": snr_db,
            "sigma_z_sq": noise.sigma_z_sq,
            "mi_opt": res.mi_opt,
            "mmse_mi_waveform": res.mmse_mi_waveform,
            "mmse_opt": res.mmse_opt,
            "ser_mi": res.ser_mi,
            "ser_mmse": res.ser_mmse,
            "gap": res.gap,
            "residual_alignment": cert.residual_alignment,
            "residual_spread": cert.residual_spread,
            "certificate_pass": cert.passed,
        })
    check_semiglm_rows(rows)
    return rows


def check_semiglm_rows(rows: list[dict]) -> None:
    for i, row in enumerate(rows):
        slack = ORDER_TOL * (1 + abs(row["mi_opt"]))
        if not row["ser_mi"] <= row["ser_mmse"] + slack <= row["mi_opt"] + 2 * slack:
            raise InvariantViolation(f"row {i}: ser_mi <= ser_mmse <= mi_opt does not hold")
        if row["certificate_pass"] and abs(row["ser_mmse"] - row["mi_opt"]) > THEOREM2_TOL * (1 + row["mi_opt"]):
            raise InvariantViolation(f"row {i}: certificate passed but ser_mmse != mi_opt")


def run_delay_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Scalar delay estimation: CRB, BCRB and rate over the SNR and bandwidth grids.

    Here the SNR grid is the delay-model SNR itself; ``-inf`` dB gives the
    no-information row (rate 0, BCRB equal to the prior variance).
    """
    cfg.validate()
    rows = []
    s2 = cfg.sigma_eta_sq
    for b in cfg.b_rms_sq:
        for snr_db in cfg.snr_grid_db:
            snr = 10.0 ** (snr_db / 10.0)
            if snr == 0:
                crb, bcrb, ser = math.inf, s2, 0.0
            else:
                crb, bcrb, ser = delay_crb(b, snr), delay_bcrb(s2, b, snr), delay_ser(s2, b, snr)
            rows.append({"snr_db": snr_db, "snr": snr, "b_rms_sq": b, "crb": crb, "bcrb": bcrb, "ser": ser})
    for i, row in enumerate(rows):
        if row["ser"] < 0 or row["bcrb"] > s2 * (1 + ORDER_TOL):
            raise InvariantViolation(f"row {i}: delay rate or BCRB out of range")
    return rows


def _fmt(value, column: str, scale: float) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(value)
    value = float(value)
    if column in RATE_COLUMNS:
        value = value / scale
    return repr(value)


def format_csv(rows: list[dict], log_base: str = "nats") -> str:
    """Header plus one line per row; floats use the shortest round-trip repr."""
    if not rows:
        return ""
    scale = math.log(2) if log_base == "bits" else 1.0
    columns = list(rows[0])
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(row[c], c, scale) for c in columns) + "\n")
    return out.getvalue()


def format_manifest(command: str, cfg: ExperimentConfig, rows: list[dict], csv_name: str) -> str:
    lines = [
        "tool = serate",
        f"version = {__version__}",
        f"command = {command}",
        f"csv = {csv_name}",
        f"rows = {len(rows)}",
        f"budget = {cfg.budget!r}",
        f"factor_rows = {cfg.factor_rows}",
        "snr_definition = 10*log10(budget / (M * sigma_z_sq)); budget = T * power",
        "seed_derivation = prior seed, random waveform seed+1, phi seed+2, F singular values seed+3, F bases seed+4/seed+5, monte carlo seed+6",
    ]
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        lines.append(f"config.{f.name} = {value}")
    if rows:
        for column in rows[0]:
            unit = f"{cfg.log_base}" if column in RATE_COLUMNS else UNITS.get(column, "")
            lines.append(f"column.{column} = {unit}")
    return "\n".join(lines) + "\n"

import csv
import math

import numpy as np
import pytest

from serate import sweeps
from serate.cli import main
from serate.glm import GlmAnalysis
from serate.sweeps import ExperimentConfig, parse_config_text, run_semiglm_sweep
from serate.errors import ConfigInvalid
from serate.validate import run_validate


def _read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_glm_sweep_defaults(tmp_path):
    out = tmp_path / "glm.csv"
    assert main(["glm-sweep", "--out", str(out)]) == 0
    rows = _read(out)
    opt = [r for r in rows if r["waveform"] == "optimal"]
    assert len(opt) == 9
    ser = [float(r["ser"]) for r in opt]
    assert all(b > a for a, b in zip(ser, ser[1:]))
    for r in opt:
        assert abs(float(r["ser"]) - float(r["mi"])) <= 1e-8 * (1 + float(r["mi"]))
    manifest = (tmp_path / "glm.csv.manifest").read_text()
    assert "config.seed = 0" in manifest and "column.ser = nats" in manifest


def test_byte_identical_reruns(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("M = 4\nT = 6\nsnr_grid_db = -5,5,15\nseed = 7\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["glm-sweep", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["glm-sweep", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("M = 4  # parameters\nseed = 1\nsnr_grid_db = 0\n")
    out = tmp_path / "o.csv"
    assert main(["glm-sweep", "--config", str(cfg), "--seed", "5", "--M", "3", "--out", str(out)]) == 0
    manifest = (tmp_path / "o.csv.manifest").read_text()
    assert "config.M = 3" in manifest and "config.seed = 5" in manifest


def test_budget_zero_row(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["glm-sweep", "--power", "0", "--snr-grid-db", "0", "--out", str(out)]) == 0
    for r in _read(out):
        assert float(r["mi"]) == 0.0 and float(r["ser"]) == 0.0


def test_bits_divides_rates(tmp_path):
    nats, bits = tmp_path / "n.csv", tmp_path / "b.csv"
    main(["glm-sweep", "--M", "3", "--T", "4", "--snr-grid-db", "10", "--out", str(nats)])
    main(["glm-sweep", "--M", "3", "--T", "4", "--snr-grid-db", "10", "--log-base", "bits", "--out", str(bits)])
    for rn, rb in zip(_read(nats), _read(bits)):
        assert float(rb["mi"]) == pytest.approx(float(rn["mi"]) / math.log(2), rel=1e-15)
        assert rb["mmse"] == rn["mmse"]


def test_semiglm_modes(tmp_path):
    base = ExperimentConfig(model="semiglm", M=5, T=6, snr_grid_db=(-5.0, 5.0, 15.0, 25.0))
    eq = run_semiglm_sweep(ExperimentConfig(**{**base.__dict__, "f_mode": "equal_eigs_aligned"}))
    assert all(abs(r["ser_mmse"] - r["mi_opt"]) <= 1e-7 for r in eq)
    aligned = run_semiglm_sweep(ExperimentConfig(**{**base.__dict__, "f_mode": "random_eigs_aligned"}))
    assert all(r["ser_mi"] <= r["ser_mmse"] for r in aligned)
    assert any(r["mi_opt"] - r["ser_mmse"] > 1e-6 for r in aligned)
    mixed = run_semiglm_sweep(ExperimentConfig(**{**base.__dict__, "f_mode": "random_eigs_random_ur"}))
    assert all(m["mi_opt"] <= a["mi_opt"] + 1e-9 for m, a in zip(mixed, aligned))


def test_delay_sweep(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["delay-sweep", "--snr-grid-db=-inf,0,10", "--b-rms-sq", "1,2", "--out", str(out)]) == 0
    rows = _read(out)
    assert float(rows[0]["ser"]) == 0.0
    for r in rows[1:3]:
        assert float(r["ser"]) == pytest.approx(math.log1p(1 / float(r["crb"])), rel=1e-12)
    assert float(rows[4]["crb"]) == pytest.approx(float(rows[1]["crb"]) / 2, rel=1e-12)


def test_waterfill_subcommand(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["waterfill", "--values", "0.5,2", "--budget", "1", "--out", str(out)]) == 0
    rows = _read(out)
    assert [float(r["level"]) for r in rows] == [1.0, 0.0]
    assert main(["waterfill", "--mode", "weighted", "--values", "1,1", "--budget", "1"]) == 2


def test_exit_codes(tmp_path):
    assert main(["glm-sweep", "--M", "0"]) == 2
    assert main(["glm-sweep", "--f-mode", "bogus"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 3\n")
    assert main(["glm-sweep", "--config", str(bad)]) == 2
    assert main(["waterfill", "--mode", "inverse", "--values", "1,1", "--budget", "5"]) == 3


def test_invariant_violation_writes_nothing(tmp_path, monkeypatch):
    def broken(prior, gram, noise, tol=None):
        return GlmAnalysis(1.0, 1.0, 2.0, None, np.zeros(1))

    monkeypatch.setattr(sweeps, "glm_ser", broken)
    out = tmp_path / "v.csv"
    assert main(["glm-sweep", "--snr-grid-db", "0", "--out", str(out)]) == 1
    assert not out.exists()


def test_parse_config_ranges():
    values = parse_config_text("snr_grid_db = -10:30:10\nlog_base = bits\n")
    assert values["snr_grid_db"] == (-10.0, 0.0, 10.0, 20.0, 30.0)
    with pytest.raises(ConfigInvalid):
        parse_config_text("M\n")


def test_validate_report_and_failure():
    report = run_validate(seed=0, sizes=(2, 3))
    assert report.passed
    assert report.lines() == run_validate(seed=0, sizes=(2, 3)).lines()
    failing = run_validate(seed=0, sizes=(2, 3), tol=0.0)
    assert not failing.passed and failing.failed
    assert main(["validate", "--sizes", "2,3", "--tol", "0"]) == 1
    assert main(["validate", "--sizes", "2"]) == 0

import csv
import json
import math
import os

import numpy as np
import pytest
import scipy.stats

from hypercert import cli, isometry
from hypercert.chsh import TSIRELSON
from hypercert.cli import ExperimentConfig, _sample_counts, main
from hypercert.rng import substream
from hypercert.states import HyperBellLabel, hyper_bell_vector


def _read(outdir, name):
    with open(os.path.join(outdir, name)) as fh:
        return json.load(fh)


def test_config_file_and_flag_override(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({
        "label": "phi+,phi+", "seed": 1, "copies": 100,
        "noise": {"werner_p_pol": 0.9}, "out": str(tmp_path / "a"),
    }))
    cfg = ExperimentConfig.from_file(str(cfgfile))
    assert cfg.label.key == "phi+,phi+"
    assert cfg.noise.werner_p_pol == 0.9
    rc = main(["chsh", "--config", str(cfgfile), "--label", "psi-,psi-",
               "--shots", "2000", "--seed", "5", "--out", str(tmp_path / "b")])
    rep = _read(tmp_path / "b", "chsh_report.json")
    assert rep["label"] == "psi-,psi-"   # flag wins over file
    assert rep["seed"] == 5
    assert rep["noise"]["werner_p_pol"] == 0.9  # un-overridden file values survive
    assert rc == 0  # 2*sqrt(2)*0.9 still violates the classical bound


def test_chsh_ideal_violation_and_exit_code(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["chsh", "--label", "phi+,phi+", "--shots", "100000", "--seed", "3", "--out", out])
    assert rc == 0
    rep = _read(out, "chsh_report.json")
    assert rep["violation"] is True
    for dof in ("P", "S"):
        r = rep["reports"][dof]
        assert abs(r["i_value"] - TSIRELSON) <= 4 * r["stderr"]


def test_chsh_depolarized_no_violation(tmp_path):
    out = str(tmp_path / "o")
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({
        "noise": {"werner_p_pol": 0.0, "werner_p_spat": 0.0}, "out": out,
    }))
    rc = main(["chsh", "--config", str(cfgfile), "--shots", "20000", "--seed", "0"])
    assert rc == 1
    rep = _read(out, "chsh_report.json")
    for dof in ("P", "S"):
        assert abs(rep["reports"][dof]["i_value"]) < 0.1


def test_chsh_reports_byte_identical(tmp_path):
    args = ["chsh", "--label", "psi+,phi-", "--shots", "5000", "--seed", "9"]
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    main(args + ["--out", out1])
    main(args + ["--out", out2])
    b1 = open(os.path.join(out1, "chsh_report.json"), "rb").read()
    b2 = open(os.path.join(out2, "chsh_report.json"), "rb").read()
    assert b1 == b2


def test_chsh_hardware_model(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["chsh", "--label", "phi-,psi+", "--shots", "50000", "--seed", "2",
               "--hardware-model", "--out", out])
    assert rc == 0
    rep = _read(out, "chsh_report.json")
    assert rep["hardware_model"] is True
    for dof in ("P", "S"):
        r = rep["reports"][dof]
        assert abs(r["i_value"] - TSIRELSON) <= 4 * r["stderr"]


def test_chsh_shot_export(tmp_path):
    out = str(tmp_path / "o")
    main(["chsh", "--label", "phi+,phi+", "--shots", "50", "--seed", "1",
          "--export-shots", "--out", out])
    lines = open(os.path.join(out, "shots.jsonl")).read().splitlines()
    assert len(lines) == 2 * 4 * 50  # both DOFs, four pairs
    rec = json.loads(lines[0])
    assert set(rec) == {"dof", "i", "j", "a", "b"}


def test_usage_errors(tmp_path):
    assert main(["chsh", "--label", "nonsense", "--out", str(tmp_path)]) == 2
    assert main(["selftest", "--copies", "101", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["chsh", "--config", str(bad)]) == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"labell": "phi+,phi+"}))
    assert main(["chsh", "--config", str(unknown)]) == 2


def test_selftest_psi_family_full_acceptance(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["selftest", "--label", "psi+,phi-", "--copies", "10000", "--seed", "4", "--out", out])
    assert rc == 0
    rep = _read(out, "selftest_report.json")
    assert rep["certified"] == "psi+,phi-"
    assert rep["matches_claim"] is True
    assert rep["step1"]["acceptance_rate"] == pytest.approx(1.0, abs=1e-12)
    assert rep["step2"]["acceptance_rate"] == pytest.approx(1.0, abs=1e-12)
    assert rep["step2"]["exact_acceptance"] == pytest.approx(1.0, abs=1e-10)


def test_selftest_phi_family_half_acceptance_with_bd(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["selftest", "--label", "phi+,psi+", "--copies", "10000", "--seed", "8", "--out", out])
    assert rc == 0
    rep = _read(out, "selftest_report.json")
    n2 = rep["step2"]["copies"]
    sigma = math.sqrt(0.5 * 0.5 / n2)
    assert abs(rep["step2"]["acceptance_rate"] - 0.5) <= 3 * sigma
    assert rep["step2"]["bd_applied"] is True
    assert rep["certified"] == "phi+,psi+"


def test_selftest_claim_mismatch(tmp_path):
    out = str(tmp_path / "o")
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({
        "label": "phi+,phi+", "source_label": "phi-,phi+",
        "copies": 10000, "seed": 3, "out": out,
    }))
    rc = main(["selftest", "--config", str(cfgfile)])
    assert rc == 1
    rep = _read(out, "selftest_report.json")
    assert rep["step2"]["acceptance_rate"] == pytest.approx(0.0, abs=1e-12)
    assert rep["matches_claim"] is False


def test_selftest_empirical_matches_exact_chi2():
    # step-2 branch frequencies against exact probabilities over many seeds
    lbl = HyperBellLabel.parse("phi+,phi+")
    res = isometry.run_step2_polarization(hyper_bell_vector(lbl), lbl)
    probs = {k: v for k, v in res.branch_probabilities().items() if v > 1e-12}
    keys = sorted(probs)
    n = 10000
    passes = 0
    for seed in range(50):
        counts = _sample_counts(probs, n, substream(seed, "chi2"))
        observed = [counts.get(k, 0) for k in keys]
        expected = [probs[k] * n for k in keys]
        _, p = scipy.stats.chisquare(observed, expected)
        if p >= 0.01:
            passes += 1
    assert passes >= 45  # >= 95% at the 1% level


def test_bounds_from_flags(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["bounds", "--epsilon-p", "2.40e-4", "--epsilon-s", "2.40e-4", "--out", out])
    assert rc == 0
    rep = _read(out, "bounds_report.json")
    assert rep["bound"]["f_p_lb"] == pytest.approx(0.5, abs=0.01)
    assert rep["bound"]["f_t_lb"] == pytest.approx(0.25, abs=0.01)


def test_bounds_sweep_csv(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["bounds", "--epsilon-p", "0", "--epsilon-s", "0",
               "--sweep", "1e-7:1e-3:100", "--out", out])
    assert rc == 0
    with open(os.path.join(out, "sweep.csv")) as fh:
        reader = csv.reader(fh)
        assert next(reader) == ["epsilon", "f_p_lb", "f_t_lb"]
        rows = [(float(a), float(b), float(c)) for a, b, c in reader]
    assert len(rows) == 100
    assert all(r1[1] >= r2[1] and r1[2] >= r2[2] for r1, r2 in zip(rows, rows[1:]))


def test_bounds_from_prior_chsh_report(tmp_path):
    out = str(tmp_path / "o")
    main(["chsh", "--label", "phi+,phi+", "--shots", "5000", "--seed", "6", "--out", out])
    rc = main(["bounds", "--out", out])
    assert rc == 0
    chsh_rep = _read(out, "chsh_report.json")
    rep = _read(out, "bounds_report.json")
    assert rep["epsilon_p"] == chsh_rep["reports"]["P"]["epsilon"]


def test_bounds_requires_epsilon_or_report(tmp_path):
    assert main(["bounds", "--out", str(tmp_path / "empty")]) == 2


def test_bounds_negative_epsilon_clamped(tmp_path, capsys):
    out = str(tmp_path / "o")
    rc = main(["bounds", "--epsilon-p=-1e-5", "--epsilon-s", "0", "--out", out])
    assert rc == 0
    rep = _read(out, "bounds_report.json")
    assert rep["epsilon_p"] == 0.0
    assert rep["clamped_inputs"] == ["P"]
    assert "clamped" in capsys.readouterr().err


def test_certify_ideal_pass(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["certify", "--label", "phi+,phi+", "--shots", "100000", "--seed", "0", "--out", out])
    assert rc == 0
    rep = _read(out, "certify_report.json")
    assert rep["verdict"] == "PASS"
    assert rep["measured_fidelities"]["f_full"] > 0.99
    assert rep["bounds"]["f_p_lb"] <= 1.0


def test_certify_mild_werner_pass(tmp_path):
    out = str(tmp_path / "o")
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({
        "label": "phi+,phi+",
        "noise": {"werner_p_pol": 0.9999, "werner_p_spat": 0.9999},
        "chsh_shots": 100000, "tomography_shots": 100000, "seed": 1, "out": out,
    }))
    rc = main(["certify", "--config", str(cfgfile)])
    assert rc == 0
    rep = _read(out, "certify_report.json")
    assert rep["verdict"] == "PASS"
    assert rep["measured_fidelities"]["f_p"] > 0.99


def test_certify_reproducible(tmp_path):
    args = ["certify", "--label", "psi-,phi+", "--shots", "20000", "--seed", "12"]
    outs = [str(tmp_path / d) for d in ("a", "b")]
    reps = []
    for out in outs:
        main(args + ["--out", out])
        reps.append(open(os.path.join(out, "certify_report.json"), "rb").read())
    assert reps[0] == reps[1]


def test_tomo_command(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["tomo", "--label", "phi+,phi+", "--shots", "20000", "--seed", "2", "--out", out])
    assert rc == 0
    rep = _read(out, "tomo_report.json")
    assert rep["shots_per_setting"] == 20000
    assert rep["fidelities"]["f_full"] > 0.98
    assert os.path.exists(os.path.join(out, "counts.jsonl"))


def test_report_embeds_config_hash(tmp_path):
    out = str(tmp_path / "o")
    main(["chsh", "--label", "phi+,phi+", "--shots", "100", "--seed", "0", "--out", out])
    rep = _read(out, "chsh_report.json")
    assert len(rep["config_sha256"]) == 64
    assert rep["schema_version"] == 1
